"""Cross-level conformance checking and the variability graph.

A configuration refines its specification when every role and concept robot
is realized faithfully (rules R1-R5 below); an assembly deploys its
configuration when every vm is placed and every implementation instantiated.
The variability graph records the declared implements/deploys fan-out plus
the per-functionality chains role -> implementation -> instance.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .model import (
    Assembly,
    ComponentImplementation,
    Configuration,
    ConnectionFlavor,
    Diagnostic,
    EndKind,
    Level,
    Severity,
    Specification,
    document_level,
    end_candidates,
    sort_diagnostics,
)
from .workspace import Workspace


@dataclass(frozen=True)
class Binding:
    abstract: str
    concrete: str
    kind: str  # role | robot | placement | instance


@dataclass(frozen=True)
class RefinementReport:
    ok: bool
    bindings: tuple[Binding, ...]
    diagnostics: tuple[Diagnostic, ...]


@dataclass(frozen=True)
class GraphNode:
    name: str
    level: Level


@dataclass(frozen=True)
class GraphEdge:
    child: str
    parent: str
    kind: str  # implements | deploys


@dataclass(frozen=True)
class MicroChain:
    """One role -> implementation -> instance lineage, qualified by document."""

    role: str
    implementation: str
    instance: Optional[str]


@dataclass(frozen=True)
class VariabilityGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    micro_edges: tuple[MicroChain, ...]


def _error(code: str, message: str, span) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, span)


def _report(bindings: list[Binding], diagnostics: list[Diagnostic]) -> RefinementReport:
    diags = sort_diagnostics(diagnostics)
    ok = not any(d.is_error for d in diags)
    return RefinementReport(ok, tuple(bindings), diags)


def _impl_adjacency(config: Configuration) -> dict[str, set[str]]:
    """Undirected implementation-to-implementation connection graph."""
    adjacency: dict[str, set[str]] = {impl.name: set() for impl in config.impls}
    for conn in config.connections:
        ends = []
        for end in (conn.source, conn.target):
            candidates = end_candidates(config, end.path)
            if len(candidates) == 1 and candidates[0].kind in (
                EndKind.COMPONENT,
                EndKind.SERVICE,
            ):
                ends.append(candidates[0].element.name)
        if len(ends) == 2:
            adjacency[ends[0]].add(ends[1])
            adjacency[ends[1]].add(ends[0])
    return adjacency


def _reaches_host(
    start: str, hosts: set[str], config: Configuration, adjacency: dict[str, set[str]]
) -> bool:
    """True if `start` or any implementation reachable from it is hosted on
    one of `hosts`."""
    impl_by_name = {impl.name: impl for impl in config.impls}
    seen = {start}
    queue = deque([start])
    while queue:
        name = queue.popleft()
        impl = impl_by_name.get(name)
        if impl is not None and impl.host in hosts:
            return True
        for neighbor in adjacency.get(name, ()):
            if neighbor not in seen:
                seen.add(neighbor)
                queue.append(neighbor)
    return False


def check_config_refines_spec(
    config: Configuration, spec: Specification
) -> RefinementReport:
    """Check rules R1-R5; bindings cover every role and concept robot when ok.

    R1 every role realized (E-REF-01); R2 realizing interfaces cover the
    role's (E-REF-02); R3 every concept robot realized with covering
    sensor/actuator kinds (E-REF-03); R4 every abstract connection realized
    by hosting or transitive connection (E-REF-04); R5 every spec role-role
    connection has a configuration counterpart (E-REF-05).
    """
    if config.implements != spec.name:
        raise ValueError(
            f"{config.name} implements {config.implements!r}, not {spec.name!r}"
        )
    diagnostics: list[Diagnostic] = []
    bindings: list[Binding] = []

    roles = {role.name: role for role in spec.roles}
    impls_of_role: dict[str, list[ComponentImplementation]] = {name: [] for name in roles}
    for impl in config.impls:
        if impl.realizes in impls_of_role:
            impls_of_role[impl.realizes].append(impl)

    # R1 + R2
    for role_name, role in roles.items():
        realizers = impls_of_role[role_name]
        if not realizers:
            diagnostics.append(
                _error(
                    "E-REF-01",
                    f"role {role_name!r} has no realizing implementation in "
                    f"{config.name}",
                    config.span,
                )
            )
            continue
        for impl in realizers:
            bindings.append(Binding(role_name, impl.name, "role"))
            missing = sorted(
                ref.render() for ref in role.interfaces - impl.interfaces
            )
            if missing:
                diagnostics.append(
                    _error(
                        "E-REF-02",
                        f"{impl.name} realizes {role_name} but lacks "
                        f"{', '.join(missing)}",
                        impl.span,
                    )
                )

    # R3: concept robots realized with covering kinds
    models_of_robot: dict[str, list] = {robot.name: [] for robot in spec.robots}
    for model in config.robots:
        if model.realizes in models_of_robot:
            models_of_robot[model.realizes].append(model)
    for robot in spec.robots:
        models = models_of_robot[robot.name]
        if not models:
            diagnostics.append(
                _error(
                    "E-REF-03",
                    f"concept robot {robot.name!r} has no realizing robot model "
                    f"in {config.name}",
                    config.span,
                )
            )
            continue
        wanted_sensors = {sensor.kind for sensor in robot.sensors}
        wanted_actuators = {actuator.kind for actuator in robot.actuators}
        for model in models:
            bindings.append(Binding(robot.name, model.name, "robot"))
            missing = sorted(
                wanted_sensors - {sensor.kind for sensor in model.sensors}
            ) + sorted(
                wanted_actuators - {actuator.kind for actuator in model.actuators}
            )
            if missing:
                diagnostics.append(
                    _error(
                        "E-REF-03",
                        f"robot model {model.name} realizes {robot.name} but "
                        f"exposes no {', '.join(missing)}",
                        model.span,
                    )
                )

    adjacency = _impl_adjacency(config)

    # R4 + R5 walk the specification connections
    for conn in spec.connections:
        resolved = []
        for end in (conn.source, conn.target):
            candidates = end_candidates(spec, end.path)
            if len(candidates) == 1:
                resolved.append(candidates[0])
        if len(resolved) != 2:
            continue  # unresolvable ends are the validator's finding
        kinds = {resolved[0].kind, resolved[1].kind}
        if conn.flavor is ConnectionFlavor.ABSTRACT_ROBOT:
            if kinds != {EndKind.ROLE, EndKind.ROBOT}:
                continue
            role_end = next(r for r in resolved if r.kind is EndKind.ROLE)
            robot_end = next(r for r in resolved if r.kind is EndKind.ROBOT)
            realizers = impls_of_role.get(role_end.element.name, [])
            models = models_of_robot.get(robot_end.element.name, [])
            if not realizers or not models:
                continue  # R1/R3 already reported the missing side
            hosts = {model.name for model in models}
            if not any(
                _reaches_host(impl.name, hosts, config, adjacency)
                for impl in realizers
            ):
                diagnostics.append(
                    _error(
                        "E-REF-04",
                        f"abstract connection {conn.render()!r} is unrealized: "
                        f"no implementation of {role_end.element.name} is hosted "
                        f"on or connected to a realization of "
                        f"{robot_end.element.name}",
                        conn.span,
                    )
                )
        elif kinds == {EndKind.ROLE}:
            role_a = resolved[0].element.name
            role_b = resolved[1].element.name
            impls_a = {impl.name for impl in impls_of_role.get(role_a, [])}
            impls_b = {impl.name for impl in impls_of_role.get(role_b, [])}
            if not impls_a or not impls_b:
                continue  # R1 already reported
            connected = any(
                neighbor in impls_b
                for name in impls_a
                for neighbor in adjacency.get(name, ())
            )
            if not connected:
                diagnostics.append(
                    _error(
                        "E-REF-05",
                        f"specification connection {conn.render()!r} has no "
                        f"counterpart between implementations in {config.name}",
                        conn.span,
                    )
                )

    return _report(bindings, diagnostics)


def check_assembly_deploys_config(ass: Assembly, config: Configuration) -> RefinementReport:
    """Check deployment totality: every vm placed, every implementation
    instantiated, every instance backed by a real implementation."""
    if ass.deploys != config.name:
        raise ValueError(f"{ass.name} deploys {ass.deploys!r}, not {config.name!r}")
    diagnostics: list[Diagnostic] = []
    bindings: list[Binding] = []

    for vm in config.vms:
        placement = ass.placement_of(vm.name)
        if placement is None:
            diagnostics.append(
                _error(
                    "E-PLACE-01",
                    f"vm {vm.name!r} of configuration {config.name} has no "
                    f"placement",
                    ass.span,
                )
            )
        else:
            bindings.append(
                Binding(vm.name, f"{placement.cloud}.{placement.machine}", "placement")
            )

    impl_names = {impl.name for impl in config.impls}
    instantiated: dict[str, list[str]] = {name: [] for name in impl_names}
    for instance in ass.instances:
        if instance.of not in impl_names:
            diagnostics.append(
                _error(
                    "E-REF-06",
                    f"instance {instance.name} is of {instance.of!r}, which "
                    f"{config.name} does not define",
                    instance.span,
                )
            )
            continue
        instantiated[instance.of].append(instance.name)
    for impl in config.impls:
        names = instantiated[impl.name]
        if not names:
            diagnostics.append(
                _error(
                    "E-INST-01",
                    f"implementation {impl.name!r} has no instance",
                    ass.span,
                )
            )
        for name in names:
            bindings.append(Binding(impl.name, name, "instance"))

    return _report(bindings, diagnostics)


_LEVEL_ORDER = {Level.SPECIFICATION: 0, Level.CONFIGURATION: 1, Level.ASSEMBLY: 2}


def build_variability_graph(workspace: Workspace) -> VariabilityGraph:
    """Graph of declared relations: documents as nodes, implements/deploys
    links as edges, role->implementation->instance chains as micro edges.

    Edges show declared relations whether or not refinement passes."""
    nodes = tuple(
        GraphNode(doc.name, document_level(doc))
        for doc in sorted(
            workspace.documents,
            key=lambda d: (_LEVEL_ORDER[document_level(d)], d.name),
        )
    )
    edges = tuple(
        GraphEdge(link.child, link.parent, link.kind) for link in workspace.links
    )

    chains: list[MicroChain] = []
    for doc in workspace.documents:
        if not isinstance(doc, Configuration):
            continue
        spec = workspace.specification_of(doc)
        if spec is None:
            continue
        role_names = {role.name for role in spec.roles}
        assemblies = [
            child
            for child in workspace.children_of(doc.name)
            if isinstance(child, Assembly)
        ]
        for impl in doc.impls:
            if impl.realizes not in role_names:
                continue
            role = f"{spec.name}.{impl.realizes}"
            implementation = f"{doc.name}.{impl.name}"
            found_instance = False
            for assembly in assemblies:
                for instance in assembly.instances:
                    if instance.of == impl.name:
                        chains.append(
                            MicroChain(
                                role, implementation, f"{assembly.name}.{instance.name}"
                            )
                        )
                        found_instance = True
            if not found_instance:
                chains.append(MicroChain(role, implementation, None))

    chains.sort(key=lambda c: (c.role, c.implementation, c.instance or ""))
    return VariabilityGraph(nodes, edges, tuple(chains))
