from __future__ import annotations

import pytest

from crala import build_workspace, parse
from crala.model import ComponentImplementation, Configuration, Specification
from crala.refinement import (
    build_variability_graph,
    check_assembly_deploys_config,
    check_config_refines_spec,
)


def _parse_all(text: str):
    result = parse(text, "ref.crala")
    assert result.ok, [d.render() for d in result.diagnostics]
    return result.documents


def test_config1_refines_spec1(config1, spec1):
    report = check_config_refines_spec(config1, spec1)
    assert report.ok
    bound = {(b.abstract, b.concrete) for b in report.bindings}
    assert bound == {
        ("Localisation", "LocalisationService"),
        ("PathPlanning", "PathPlanningService"),
        ("CameraDriver", "CameraDriverImpl"),
        ("Robot1", "R1"),
    }


def test_binding_totality_on_ok(config2, spec1):
    report = check_config_refines_spec(config2, spec1)
    assert report.ok
    abstracts = {b.abstract for b in report.bindings}
    assert abstracts == {r.name for r in spec1.roles} | {r.name for r in spec1.robots}


def test_missing_realization_is_ref01(config1, spec1):
    slim = Configuration(
        config1.name,
        config1.implements,
        config1.robots,
        config1.vms,
        tuple(i for i in config1.impls if i.name != "PathPlanningService"),
        tuple(
            c
            for c in config1.connections
            if "PathPlanningService" not in (c.source.path[0], c.target.path[0])
        ),
    )
    # oracle: set difference of declared role names vs realized role names
    realized = {impl.realizes for impl in slim.impls}
    declared = {role.name for role in spec1.roles}
    assert declared - realized == {"PathPlanning"}
    report = check_config_refines_spec(slim, spec1)
    assert not report.ok
    ref01 = [d for d in report.diagnostics if d.code == "E-REF-01"]
    assert len(ref01) == 1
    assert "PathPlanning" in ref01[0].message


def test_vacuous_refinement():
    spec = Specification("S")
    config = Configuration("C", "S")
    report = check_config_refines_spec(config, spec)
    assert report.ok
    assert report.bindings == ()


def test_interface_deficit_is_ref02(spec1, config1):
    weakened = tuple(
        ComponentImplementation(
            impl.name, impl.variant, impl.realizes, impl.host, frozenset(), impl.annotations
        )
        if impl.name == "LocalisationService"
        else impl
        for impl in config1.impls
    )
    config = Configuration(
        config1.name, config1.implements, config1.robots, config1.vms, weakened,
        config1.connections,
    )
    report = check_config_refines_spec(config, spec1)
    codes = {d.code for d in report.diagnostics}
    assert "E-REF-02" in codes


def test_kind_mismatch_is_ref03():
    spec, config = _parse_all(
        "specification S { concept_robot R { sensor c: Camera } }\n"
        "configuration C implements S { robot RM realizes R { sensor l: Lidar } }\n"
    )
    report = check_config_refines_spec(config, spec)
    assert [d.code for d in report.diagnostics] == ["E-REF-03"]
    assert "Camera" in report.diagnostics[0].message


def test_kind_coverage_is_by_kind_not_name():
    spec, config = _parse_all(
        "specification S { concept_robot R { sensor primary_cam: Camera } }\n"
        "configuration C implements S { robot RM realizes R { sensor other_name: Camera } }\n"
    )
    assert check_config_refines_spec(config, spec).ok


def test_abstract_connection_satisfied_by_hosting(config1, spec1):
    assert check_config_refines_spec(config1, spec1).ok


def test_abstract_connection_satisfied_transitively():
    spec, config = _parse_all(
        "specification S {\n"
        "  role A { provides P }\n"
        "  role B { provides Q }\n"
        "  concept_robot R { sensor c: Camera }\n"
        "  connect A -> B\n"
        "  connect A ~ R\n"
        "}\n"
        "configuration C implements S {\n"
        "  robot RM realizes R { sensor c: Camera }\n"
        '  vm V { os "u" cpu 1 ram 1 }\n'
        "  service AS realizes A on V { provides P }\n"
        "  component BC realizes B on RM { provides Q }\n"
        "  connect AS -> BC via ros_tcp\n"
        "}\n"
    )
    assert check_config_refines_spec(config, spec).ok


def test_unrealized_abstract_connection_is_ref04():
    spec, config = _parse_all(
        "specification S {\n"
        "  role A { provides P }\n"
        "  concept_robot R { sensor c: Camera }\n"
        "  connect A ~ R\n"
        "}\n"
        "configuration C implements S {\n"
        "  robot RM realizes R { sensor c: Camera }\n"
        '  vm V { os "u" cpu 1 ram 1 }\n'
        "  service AS realizes A on V { provides P }\n"
        "}\n"
    )
    report = check_config_refines_spec(config, spec)
    assert [d.code for d in report.diagnostics] == ["E-REF-04"]


def test_lost_connection_is_ref05():
    spec, config = _parse_all(
        "specification S {\n"
        "  role A { provides P }\n"
        "  role B { requires P }\n"
        "  connect A -> B\n"
        "}\n"
        "configuration C implements S {\n"
        '  vm V { os "u" cpu 1 ram 1 }\n'
        "  service AS realizes A on V { provides P }\n"
        "  service BS realizes B on V { requires P }\n"
        "}\n"
    )
    report = check_config_refines_spec(config, spec)
    assert [d.code for d in report.diagnostics] == ["E-REF-05"]


def test_unknown_spec_name_is_hard_error(config1):
    with pytest.raises(ValueError):
        check_config_refines_spec(config1, Specification("Wrong"))


def test_refinement_monotonicity(spec1, config1):
    # adding an implementation never introduces E-REF-01/E-REF-03
    extra = ComponentImplementation(
        "SecondLocaliser",
        config1.impls[0].variant,
        "Localisation",
        "VM1",
        frozenset(),
    )
    grown = Configuration(
        config1.name, config1.implements, config1.robots, config1.vms,
        config1.impls + (extra,), config1.connections,
    )
    report = check_config_refines_spec(grown, spec1)
    codes = {d.code for d in report.diagnostics}
    assert "E-REF-01" not in codes
    assert "E-REF-03" not in codes
    assert "E-REF-02" in codes  # the new implementation is deficient


# --- assembly deploys configuration ---------------------------------------------


def test_ass2_deploys_config1(ass2, config1):
    report = check_assembly_deploys_config(ass2, config1)
    assert report.ok
    placements = {
        (b.abstract, b.concrete) for b in report.bindings if b.kind == "placement"
    }
    assert placements == {("VM1", "NovaFlat.PM1"), ("VM2", "NovaFlat.PM1")}


def test_ghost_instance_is_ref06(ass1, config1):
    # oracle: membership test of instance.of names
    impl_names = {impl.name for impl in config1.impls}
    docs = _parse_all(
        "assembly Ghosted deploys Config1 {\n"
        "  cloud N { network sdn scheduler spread machine M { cpu 1 ram 8192 } }\n"
        "  place VM1 on M in N\n"
        "  place VM2 on M in N\n"
        "  instance a_1 of LocalisationService\n"
        "  instance b_1 of PathPlanningService\n"
        "  instance c_1 of CameraDriverImpl\n"
        "  instance g_1 of GhostService\n"
        "}\n"
    )
    assembly = docs[0]
    assert "GhostService" not in impl_names
    report = check_assembly_deploys_config(assembly, config1)
    assert [d.code for d in report.diagnostics] == ["E-REF-06"]


def test_empty_deployment_ok():
    config = Configuration("C", "S")
    docs = _parse_all("assembly A deploys C {\n}\n")
    report = check_assembly_deploys_config(docs[0], config)
    assert report.ok
    assert report.bindings == ()


def test_wrong_config_is_hard_error(ass1):
    with pytest.raises(ValueError):
        check_assembly_deploys_config(ass1, Configuration("Other", "S"))


# --- variability graph ------------------------------------------------------------


def test_variability_graph_paper_chain(chain):
    graph = build_variability_graph(chain.workspace)
    assert len(graph.nodes) == 5
    edges = {(e.child, e.parent, e.kind) for e in graph.edges}
    assert edges == {
        ("Config1", "Spec1", "implements"),
        ("Config2", "Spec1", "implements"),
        ("Ass1", "Config1", "deploys"),
        ("Ass2", "Config1", "deploys"),
    }


def test_single_specification_graph():
    ws = build_workspace(_parse_all("specification Solo {\n}\n"))
    graph = build_variability_graph(ws)
    assert len(graph.nodes) == 1
    assert graph.edges == ()
    assert graph.micro_edges == ()


def test_micro_chains_share_role_across_configurations(spec1, config1, config2):
    ws = build_workspace([spec1, config1, config2])
    graph = build_variability_graph(ws)
    localisation = [
        c for c in graph.micro_edges if c.role == "Spec1.Localisation"
    ]
    assert {c.implementation for c in localisation} == {
        "Config1.LocalisationService",
        "Config2.LocalisationService2",
    }
    assert all(c.instance is None for c in localisation)


def test_micro_chains_reach_instances(chain):
    graph = build_variability_graph(chain.workspace)
    localisation = [
        c for c in graph.micro_edges if c.role == "Spec1.Localisation"
    ]
    instances = {c.instance for c in localisation}
    assert "Ass1.localisation_1" in instances
    assert "Ass2.localisation_1" in instances
    assert None in instances  # Config2's realization has no assembly


def test_graph_shows_declared_relations_even_when_refinement_fails():
    docs = _parse_all(
        "specification S { role A { provides P } }\n"
        "configuration C implements S {\n}\n"
    )
    ws = build_workspace(docs)
    report = check_config_refines_spec(docs[1], docs[0])
    assert not report.ok
    graph = build_variability_graph(ws)
    assert {(e.child, e.parent) for e in graph.edges} == {("C", "S")}
