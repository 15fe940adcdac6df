from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from crala import check_files, parse
from crala.model import ConnectionFlavor, EndKind, Severity
from crala.rules import CATALOG, is_cataloged
from crala.validate import (
    validate_assembly,
    validate_configuration,
    validate_specification,
)

from conftest import VIOLATIONS


def _parse_one(text: str):
    result = parse(text, "v.crala")
    assert result.ok, [d.render() for d in result.diagnostics]
    return result.documents


def test_spec1_is_clean(spec1):
    assert validate_specification(spec1) == []


def test_empty_specification_vacuously_valid():
    (spec,) = _parse_one("specification S {\n}\n")
    assert validate_specification(spec) == []


# oracle for the connection taxonomy: enumerate the allowed kind pairs
ALLOWED_SPEC_PAIRS = {
    frozenset({EndKind.ROLE}),
    frozenset({EndKind.ROLE, EndKind.SENSOR}),
    frozenset({EndKind.ROLE, EndKind.ACTUATOR}),
}


def test_sensor_actuator_connection_rejected():
    (spec,) = _parse_one(
        "specification S {\n"
        "  concept_robot R { sensor eye: Camera actuator w: Drive }\n"
        "  connect R.eye -> R.w\n"
        "}\n"
    )
    conn = spec.connections[0]
    assert frozenset({conn.source.kind, conn.target.kind}) not in ALLOWED_SPEC_PAIRS
    assert [d.code for d in validate_specification(spec)] == ["E-CONN-01"]


def test_all_disallowed_spec_pairs_rejected():
    # build one document exposing each end kind, then try every pair
    base = (
        "specification S {{\n"
        "  role A {{ provides P }}\n"
        "  role B {{ requires P }}\n"
        "  concept_robot R {{ sensor eye: Camera actuator w: Drive }}\n"
        "  connect {src} -> {dst}\n"
        "}}\n"
    )
    ends = {
        "A": EndKind.ROLE,
        "R": EndKind.ROBOT,
        "R.eye": EndKind.SENSOR,
        "R.w": EndKind.ACTUATOR,
    }
    for (src, src_kind), (dst, dst_kind) in itertools.product(ends.items(), repeat=2):
        if src == dst:
            continue
        (spec,) = _parse_one(base.format(src=src, dst=dst))
        codes = {d.code for d in validate_specification(spec) if d.is_error}
        allowed = frozenset({src_kind, dst_kind}) in ALLOWED_SPEC_PAIRS
        if allowed:
            assert "E-CONN-01" not in codes, (src, dst)
        else:
            assert "E-CONN-01" in codes, (src, dst)


def test_protocol_in_specification_rejected():
    (spec,) = _parse_one(
        "specification S { role A { provides P } role B { requires P } connect A -> B via http }"
    )
    assert [d.code for d in validate_specification(spec)] == ["E-CONN-02"]


def test_empty_role_needs_incomplete_marker():
    (spec,) = _parse_one("specification S { role A { } role B { @incomplete true } }")
    codes = [d.code for d in validate_specification(spec) if d.is_error]
    assert codes == ["E-ROLE-01"]
    messages = [d.message for d in validate_specification(spec) if d.is_error]
    assert "A" in messages[0]


def test_unconnected_role_warns():
    (spec,) = _parse_one("specification S { role A { provides P } }")
    diags = validate_specification(spec)
    assert [d.code for d in diags] == ["W-SPEC-01"]
    assert diags[0].severity is Severity.WARNING


def test_config1_is_clean(config1):
    assert validate_configuration(config1) == []


def test_abstract_connection_in_configuration():
    # oracle: scan connection flavors for the abstract form
    (spec, config) = _parse_one(
        "specification S { role A { provides P } concept_robot R { sensor c: Camera } connect A ~ R }\n"
        "configuration C implements S {\n"
        "  robot RM realizes R { sensor c: Camera }\n"
        "  component AI realizes A on RM { provides P }\n"
        "  connect AI ~ RM\n"
        "}\n"
    )
    flagged = [c for c in config.connections if c.flavor is ConnectionFlavor.ABSTRACT_ROBOT]
    assert len(flagged) == 1
    assert [d.code for d in validate_configuration(config)] == ["E-CONN-03"]


def test_unknown_host_flagged():
    (_, config) = _parse_one(
        "specification S { }\n"
        "configuration C implements S { component X realizes A on Ghost { provides P } }\n"
    )
    assert [d.code for d in validate_configuration(config)] == ["E-HOST-01"]


def test_cross_host_connection_requires_protocol():
    (_, config) = _parse_one(
        "specification S { }\n"
        "configuration C implements S {\n"
        '  vm V1 { os "u" cpu 1 ram 1 }\n'
        '  vm V2 { os "u" cpu 1 ram 1 }\n'
        "  service A1 realizes A on V1 { provides P }\n"
        "  service B1 realizes B on V2 { requires P }\n"
        "  connect A1 -> B1\n"
        "}\n"
    )
    assert [d.code for d in validate_configuration(config)] == ["E-PROTO-01"]


def test_same_host_connection_needs_no_protocol():
    (_, config) = _parse_one(
        "specification S { }\n"
        "configuration C implements S {\n"
        '  vm V1 { os "u" cpu 1 ram 1 }\n'
        "  service A1 realizes A on V1 { provides P }\n"
        "  service B1 realizes B on V1 { requires P }\n"
        "  connect A1 -> B1\n"
        "}\n"
    )
    assert validate_configuration(config) == []


def test_vm_without_os_warns():
    (_, config) = _parse_one(
        "specification S { }\nconfiguration C implements S { vm V { cpu 1 ram 1 } }\n"
    )
    diags = validate_configuration(config)
    assert [d.code for d in diags] == ["W-OS-01"]
    (_, config_with_os) = _parse_one(
        'specification S { }\nconfiguration C implements S { vm V { os "u" cpu 1 ram 1 } }\n'
    )
    assert validate_configuration(config_with_os) == []


def test_ass1_is_clean(ass1, config1):
    assert validate_assembly(ass1, config1) == []


def test_flat_network_subnet_conflict(config1):
    text = (
        "specification S { }\n"
        "configuration C implements S {\n"
        '  vm V1 { os "u" cpu 1 ram 1 subnet "a" }\n'
        '  vm V2 { os "u" cpu 1 ram 1 subnet "b" }\n'
        "}\n"
        "assembly A deploys C {\n"
        "  cloud N { network %s scheduler pack machine M { cpu 4 ram 4096 } }\n"
        "  place V1 on M in N\n"
        "  place V2 on M in N\n"
        "}\n"
    )
    _, config, assembly = _parse_one(text % "flat")
    # oracle: group placed vms by cloud, compare distinct declared subnets to 1
    placed_subnets = {
        vm.subnet for vm in config.vms if assembly.placement_of(vm.name) and vm.subnet
    }
    assert len(placed_subnets) > 1
    assert [d.code for d in validate_assembly(assembly, config)] == ["E-NET-01"]

    _, config_sdn, assembly_sdn = _parse_one(text % "sdn")
    assert validate_assembly(assembly_sdn, config_sdn) == []


def test_degenerate_assembly_only_flags_empty_cloud():
    (_, config, assembly) = _parse_one(
        "specification S { }\n"
        "configuration C implements S { }\n"
        "assembly A deploys C { cloud N { network sdn scheduler spread } }\n"
    )
    assert [d.code for d in validate_assembly(assembly, config)] == ["E-CLOUD-01"]


def test_capacity_overcommit():
    (_, config, assembly) = _parse_one(
        "specification S { }\n"
        "configuration C implements S {\n"
        '  vm V1 { os "u" cpu 1 ram 3000 }\n'
        '  vm V2 { os "u" cpu 1 ram 3000 }\n'
        "}\n"
        "assembly A deploys C {\n"
        "  cloud N { network sdn scheduler pack machine M { cpu 4 ram 4096 } }\n"
        "  place V1 on M in N\n"
        "  place V2 on M in N\n"
        "}\n"
    )
    assert [d.code for d in validate_assembly(assembly, config)] == ["E-CAP-01"]


def test_validation_pure_and_sorted(spec1, config1):
    first = validate_specification(spec1)
    second = validate_specification(spec1)
    assert first == second
    diags = validate_configuration(config1)
    assert diags == sorted(diags, key=lambda d: d.sort_key())


# --- seeded corpus completeness ------------------------------------------------


def _corpus_cases():
    return [
        pytest.param(path, id=path.stem) for path in sorted(VIOLATIONS.glob("*.crala"))
    ]


@pytest.mark.parametrize("path", _corpus_cases())
def test_violation_fixture_triggers_exactly_its_code(path: Path):
    expected = path.stem.upper()
    assert is_cataloged(expected)
    result = check_files([str(path)])
    codes = {d.code for d in result.diagnostics}
    error_codes = {d.code for d in result.diagnostics if d.is_error}
    assert expected in codes
    if expected.startswith("E-"):
        assert error_codes == {expected}, result.diagnostics
    else:
        assert not error_codes, result.diagnostics


def test_corpus_covers_every_cataloged_code():
    covered = {path.stem.upper() for path in VIOLATIONS.glob("*.crala")}
    assert covered == {rule.code for rule in CATALOG}


def test_every_emitted_code_is_cataloged():
    seen = set()
    for path in sorted(VIOLATIONS.glob("*.crala")):
        seen.update(d.code for d in check_files([str(path)]).diagnostics)
    assert all(is_cataloged(code) for code in seen)
