"""Intra-level validation: one rule set per architecture level.

All checks are pure functions from documents to sorted diagnostic lists;
nothing is ever raised for a model finding. Connection-end kinds are
re-derived here (not trusted from the parser) so programmatically built
documents get the same treatment as parsed ones.
"""

from __future__ import annotations

from typing import Optional

from .model import (
    Assembly,
    ComponentImplementation,
    Configuration,
    Connection,
    ConnectionFlavor,
    Diagnostic,
    EndKind,
    NetworkMode,
    ResolvedEnd,
    Severity,
    SourceSpan,
    Specification,
    end_candidates,
    sort_diagnostics,
)

_IMPLISH = {EndKind.COMPONENT, EndKind.SERVICE}


def _diag(code: str, message: str, span: Optional[SourceSpan], severity=Severity.ERROR) -> Diagnostic:
    return Diagnostic(severity, code, message, span)


def _resolve_ends(
    doc, conn: Connection, out: list[Diagnostic]
) -> list[Optional[ResolvedEnd]]:
    """Resolve each end, reporting E-CONN-04 for the ones that fail."""
    resolved: list[Optional[ResolvedEnd]] = []
    for end in (conn.source, conn.target):
        candidates = end_candidates(doc, end.path)
        if len(candidates) == 1:
            resolved.append(candidates[0])
            continue
        resolved.append(None)
        if not candidates:
            out.append(
                _diag(
                    "E-CONN-04",
                    f"connection end {end.render()!r} does not resolve",
                    conn.span,
                )
            )
        else:
            out.append(
                _diag(
                    "E-CONN-04",
                    f"connection end {end.render()!r} is ambiguous "
                    f"({len(candidates)} candidates)",
                    conn.span,
                )
            )
    return resolved


def validate_specification(spec: Specification) -> list[Diagnostic]:
    """Specification-level rules.

    E-CONN-01 disallowed end pairing, E-CONN-02 protocol at this level,
    E-CONN-04 unresolved end, E-ROLE-01 empty role not marked incomplete,
    W-SPEC-01 unconnected role.
    """
    out: list[Diagnostic] = []
    connected_roles: set[str] = set()
    for conn in spec.connections:
        if conn.protocol is not None:
            out.append(
                _diag(
                    "E-CONN-02",
                    f"specification connections carry no protocol "
                    f"(found via {conn.protocol!r})",
                    conn.span,
                )
            )
        ends = _resolve_ends(spec, conn, out)
        for end in ends:
            if end is not None and end.kind is EndKind.ROLE:
                connected_roles.add(end.element.name)
        if any(end is None for end in ends):
            continue
        kinds = {ends[0].kind, ends[1].kind}
        if conn.flavor is ConnectionFlavor.ABSTRACT_ROBOT:
            if kinds != {EndKind.ROLE, EndKind.ROBOT}:
                out.append(
                    _diag(
                        "E-CONN-01",
                        f"abstract connection must link a role and a robot, "
                        f"got {conn.render()!r}",
                        conn.span,
                    )
                )
        elif kinds not in ({EndKind.ROLE}, {EndKind.ROLE, EndKind.SENSOR}, {EndKind.ROLE, EndKind.ACTUATOR}):
            out.append(
                _diag(
                    "E-CONN-01",
                    f"connection {conn.render()!r} links "
                    f"{'/'.join(sorted(k.value for k in kinds))}, which is not an "
                    f"allowed pairing",
                    conn.span,
                )
            )
    for role in spec.roles:
        if not role.interfaces and not role.incomplete:
            out.append(
                _diag(
                    "E-ROLE-01",
                    f"role {role.name!r} declares no interfaces and is not "
                    f"annotated @incomplete",
                    role.span,
                )
            )
        if role.name not in connected_roles:
            out.append(
                _diag(
                    "W-SPEC-01",
                    f"role {role.name!r} participates in no connection",
                    role.span,
                    Severity.WARNING,
                )
            )
    return list(sort_diagnostics(out))


def validate_configuration(config: Configuration) -> list[Diagnostic]:
    """Configuration-level rules.

    E-CONN-03 abstract connection at this level, E-CONN-01 disallowed
    pairing (robots never connect to implementations here), E-CONN-04
    unresolved end, E-HOST-01 unknown host, E-PROTO-01 missing protocol on a
    cross-host connection, W-OS-01 vm without an operating system.
    """
    out: list[Diagnostic] = []
    for conn in config.connections:
        if conn.flavor is ConnectionFlavor.ABSTRACT_ROBOT:
            out.append(
                _diag(
                    "E-CONN-03",
                    f"abstract robot connections are not permitted at "
                    f"configuration level: {conn.render()!r}",
                    conn.span,
                )
            )
            continue
        ends = _resolve_ends(config, conn, out)
        if any(end is None for end in ends):
            continue
        kinds = {ends[0].kind, ends[1].kind}
        allowed = (
            kinds <= _IMPLISH
            or (len(kinds & _IMPLISH) == 1 and (EndKind.SENSOR in kinds or EndKind.ACTUATOR in kinds))
        )
        if not allowed:
            out.append(
                _diag(
                    "E-CONN-01",
                    f"connection {conn.render()!r} links "
                    f"{'/'.join(sorted(k.value for k in kinds))}, which is not an "
                    f"allowed pairing at configuration level",
                    conn.span,
                )
            )
            continue
        if kinds <= _IMPLISH and conn.protocol is None:
            impl_a: ComponentImplementation = ends[0].element
            impl_b: ComponentImplementation = ends[1].element
            if impl_a.host != impl_b.host:
                out.append(
                    _diag(
                        "E-PROTO-01",
                        f"{impl_a.name} (on {impl_a.host}) and {impl_b.name} "
                        f"(on {impl_b.host}) communicate across hosts but the "
                        f"connection declares no protocol",
                        conn.span,
                    )
                )
    for impl in config.impls:
        if config.host_of(impl.host) is None:
            out.append(
                _diag(
                    "E-HOST-01",
                    f"{impl.name} is hosted on {impl.host!r}, which names no vm "
                    f"or robot",
                    impl.span,
                )
            )
    for vm in config.vms:
        if vm.os is None:
            out.append(
                _diag(
                    "W-OS-01",
                    f"vm {vm.name!r} declares no operating system",
                    vm.span,
                    Severity.WARNING,
                )
            )
    return list(sort_diagnostics(out))


def validate_assembly(ass: Assembly, config: Configuration) -> list[Diagnostic]:
    """Assembly-level rules, checked against the deployed configuration.

    E-CLOUD-01 machine-less cloud, E-NET-01 subnet conflict on a flat cloud,
    E-PLACE-01 unplaced vm, E-PLACE-02 unknown machine/cloud, E-PLACE-03
    unknown vm, E-CAP-01 ram overcommit, E-INST-01 implementation without an
    instance.
    """
    out: list[Diagnostic] = []
    clouds = {cloud.name: cloud for cloud in ass.clouds}
    vms = {vm.name: vm for vm in config.vms}

    for cloud in ass.clouds:
        if not cloud.machines:
            out.append(
                _diag(
                    "E-CLOUD-01",
                    f"cloud {cloud.name!r} declares no physical machine",
                    cloud.span,
                )
            )

    placed: dict[tuple[str, str], list[str]] = {}  # (cloud, machine) -> vm names
    for placement in ass.placements:
        cloud = clouds.get(placement.cloud)
        if cloud is None:
            out.append(
                _diag(
                    "E-PLACE-02",
                    f"placement of {placement.vm} names unknown cloud "
                    f"{placement.cloud!r}",
                    placement.span,
                )
            )
            continue
        machine = cloud.machine(placement.machine)
        if machine is None:
            out.append(
                _diag(
                    "E-PLACE-02",
                    f"placement of {placement.vm} names unknown machine "
                    f"{placement.machine!r} in cloud {cloud.name}",
                    placement.span,
                )
            )
            continue
        if placement.vm not in vms:
            out.append(
                _diag(
                    "E-PLACE-03",
                    f"placement names vm {placement.vm!r}, unknown to "
                    f"configuration {config.name}",
                    placement.span,
                )
            )
            continue
        placed.setdefault((cloud.name, machine.name), []).append(placement.vm)

    for vm in config.vms:
        if ass.placement_of(vm.name) is None:
            out.append(
                _diag(
                    "E-PLACE-01",
                    f"vm {vm.name!r} of configuration {config.name} has no "
                    f"placement",
                    ass.span,
                )
            )

    for (cloud_name, machine_name), vm_names in sorted(placed.items()):
        machine = clouds[cloud_name].machine(machine_name)
        total = sum(vms[name].ram_mb for name in vm_names)
        if total > machine.ram_mb:
            out.append(
                _diag(
                    "E-CAP-01",
                    f"machine {cloud_name}.{machine_name} holds {total} MB of "
                    f"vm ram but its capacity is {machine.ram_mb} MB",
                    machine.span,
                )
            )

    for cloud in ass.clouds:
        if cloud.network is not NetworkMode.FLAT:
            continue
        subnets = sorted(
            {
                vms[vm_name].subnet
                for (cloud_name, _), vm_names in placed.items()
                if cloud_name == cloud.name
                for vm_name in vm_names
                if vms[vm_name].subnet is not None
            }
        )
        if len(subnets) > 1:
            out.append(
                _diag(
                    "E-NET-01",
                    f"flat cloud {cloud.name!r} hosts vms from subnets "
                    f"{', '.join(subnets)}; a flat network has a single subnet",
                    cloud.span,
                )
            )

    instantiated = {instance.of for instance in ass.instances}
    for impl in config.impls:
        if impl.name not in instantiated:
            out.append(
                _diag(
                    "E-INST-01",
                    f"implementation {impl.name!r} has no instance",
                    ass.span,
                )
            )

    return list(sort_diagnostics(out))
