"""Deployment planning, failure simulation and deployment metrics.

plan_deployment derives an assembly from a configuration and a cloud under
one of two policies:

  spread  machines are ordered once by descending capacity (declaration
          order on ties) and VMs, largest first, are dealt round-robin
          across them, advancing past machines that are full;
  pack    VMs, largest first, go to the first machine in declaration order
          with room, so a new machine opens only when the previous ones are
          exhausted.

Both are deterministic: equal inputs produce byte-identical assemblies.
Only VMs are placed; implementations hosted on robots stay on their robot.
Capacity means RAM; cpu_cores is descriptive only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import (
    Assembly,
    CloudDescription,
    ComponentInstance,
    Configuration,
    InstanceState,
    NetworkMode,
    SchedulerKind,
    VirtualMachine,
    VmPlacement,
)


class PlanningError(Exception):
    pass


class InsufficientCapacity(PlanningError):
    def __init__(self, vm: VirtualMachine, cloud: CloudDescription):
        self.vm = vm.name
        self.ram_mb = vm.ram_mb
        super().__init__(
            f"no machine in cloud {cloud.name} can hold vm {vm.name} "
            f"({vm.ram_mb} MB)"
        )


class FlatNetworkConflict(PlanningError):
    def __init__(self, cloud: CloudDescription, subnets: list[str]):
        self.cloud = cloud.name
        self.subnets = tuple(subnets)
        super().__init__(
            f"cloud {cloud.name} has a flat network but the configuration "
            f"asks for subnets {', '.join(subnets)}"
        )


class UnknownTargetError(ValueError):
    pass


class AmbiguousTargetError(ValueError):
    def __init__(self, target: str, candidates: list[str]):
        self.candidates = sorted(candidates)
        super().__init__(
            f"machine name {target!r} is ambiguous: {', '.join(self.candidates)}"
        )


class FailureTargetKind(str, Enum):
    VM = "vm"
    PHYSICAL_MACHINE = "physical_machine"


@dataclass(frozen=True)
class FailureEvent:
    target: str
    target_kind: FailureTargetKind


@dataclass(frozen=True)
class ImpactReport:
    event: FailureEvent
    failed_vms: tuple[str, ...]
    lost_instances: tuple[str, ...]
    surviving_instances: tuple[str, ...]
    lost_implementations: tuple[str, ...]
    uncovered_roles: tuple[str, ...]


@dataclass(frozen=True)
class DeploymentMetrics:
    colocated_vm_pairs: int
    max_single_vm_loss: int
    max_single_pm_loss: int
    min_ram_headroom_mb: int


def _vm_order(config: Configuration) -> list[VirtualMachine]:
    return sorted(config.vms, key=lambda vm: (-vm.ram_mb, vm.name))


def plan_deployment(
    config: Configuration, cloud: CloudDescription, policy: SchedulerKind
) -> Assembly:
    """Place every vm of `config` onto `cloud` and instantiate every
    implementation once (running).

    Raises InsufficientCapacity on the first unplaceable vm and
    FlatNetworkConflict when the configuration needs several subnets on a
    flat cloud. The result passes validate_assembly and
    check_assembly_deploys_config by construction.
    """
    if not cloud.machines:
        raise PlanningError(f"cloud {cloud.name} has no machines")
    subnets = sorted({vm.subnet for vm in config.vms if vm.subnet is not None})
    if cloud.network is NetworkMode.FLAT and len(subnets) > 1:
        raise FlatNetworkConflict(cloud, subnets)

    free = {machine.name: machine.ram_mb for machine in cloud.machines}
    placements: list[VmPlacement] = []

    if policy is SchedulerKind.SPREAD:
        ring = sorted(cloud.machines, key=lambda m: -m.ram_mb)
        cursor = 0
        for vm in _vm_order(config):
            for offset in range(len(ring)):
                machine = ring[(cursor + offset) % len(ring)]
                if free[machine.name] >= vm.ram_mb:
                    free[machine.name] -= vm.ram_mb
                    placements.append(VmPlacement(vm.name, machine.name, cloud.name))
                    cursor = (cursor + offset + 1) % len(ring)
                    break
            else:
                raise InsufficientCapacity(vm, cloud)
    else:
        for vm in _vm_order(config):
            for machine in cloud.machines:
                if free[machine.name] >= vm.ram_mb:
                    free[machine.name] -= vm.ram_mb
                    placements.append(VmPlacement(vm.name, machine.name, cloud.name))
                    break
            else:
                raise InsufficientCapacity(vm, cloud)

    placements.sort(key=lambda p: p.vm)
    instances = tuple(
        ComponentInstance(f"{impl.name}_inst", impl.name, InstanceState.RUNNING)
        for impl in config.impls
    )
    return Assembly(
        f"{config.name}_{policy.value}",
        config.name,
        (cloud,),
        tuple(placements),
        instances,
    )


def _failed_vms(ass: Assembly, config: Configuration, event: FailureEvent) -> set[str]:
    if event.target_kind is FailureTargetKind.VM:
        if all(vm.name != event.target for vm in config.vms):
            raise UnknownTargetError(
                f"no vm named {event.target!r} in configuration {config.name}"
            )
        return {event.target}
    # physical machine: bare name or Cloud.Machine
    if "." in event.target:
        cloud_name, _, machine_name = event.target.partition(".")
        wanted = [(cloud_name, machine_name)]
    else:
        wanted = [
            (cloud.name, machine.name)
            for cloud in ass.clouds
            for machine in cloud.machines
            if machine.name == event.target
        ]
        if len(wanted) > 1:
            raise AmbiguousTargetError(
                event.target, [f"{c}.{m}" for c, m in wanted]
            )
    known = {
        (cloud.name, machine.name)
        for cloud in ass.clouds
        for machine in cloud.machines
    }
    if not wanted or wanted[0] not in known:
        raise UnknownTargetError(
            f"no physical machine named {event.target!r} in assembly {ass.name}"
        )
    cloud_name, machine_name = wanted[0]
    return {
        placement.vm
        for placement in ass.placements
        if placement.cloud == cloud_name and placement.machine == machine_name
    }


def simulate_failure(
    ass: Assembly, config: Configuration, event: FailureEvent
) -> ImpactReport:
    """Report what a single vm or physical machine failure takes down.

    A machine failure fails every vm placed on it; a vm failure fails every
    running instance of the implementations it hosts. Roles are uncovered
    when their last running realization is lost. Robot-hosted
    implementations are unaffected by cloud failures.
    """
    failed = _failed_vms(ass, config, event)
    host_of = {impl.name: impl.host for impl in config.impls}
    role_of = {impl.name: impl.realizes for impl in config.impls}

    lost: list[str] = []
    surviving: list[str] = []
    running_before: dict[str, int] = {}
    running_after: dict[str, int] = {}
    for instance in ass.instances:
        if instance.state is not InstanceState.RUNNING:
            continue
        impl = instance.of
        if impl not in host_of:
            continue
        running_before[impl] = running_before.get(impl, 0) + 1
        if host_of[impl] in failed:
            lost.append(instance.name)
        else:
            surviving.append(instance.name)
            running_after[impl] = running_after.get(impl, 0) + 1

    lost_impls = sorted(
        impl for impl in running_before if running_after.get(impl, 0) == 0
    )
    roles_before = {role_of[impl] for impl in running_before}
    roles_after = {role_of[impl] for impl in running_after}
    return ImpactReport(
        event,
        tuple(sorted(failed)),
        tuple(sorted(lost)),
        tuple(sorted(surviving)),
        tuple(lost_impls),
        tuple(sorted(roles_before - roles_after)),
    )


def evaluate_metrics(ass: Assembly, config: Configuration) -> DeploymentMetrics:
    """Trade-off metrics for a deployment.

    colocated_vm_pairs counts unordered vm pairs sharing a machine;
    max_single_vm_loss / max_single_pm_loss enumerate every single failure
    via simulate_failure and take the worst implementation loss;
    min_ram_headroom_mb is the tightest machine after subtracting placed vm
    ram (0 when there are no machines at all).
    """
    groups: dict[tuple[str, str], int] = {}
    for placement in ass.placements:
        key = (placement.cloud, placement.machine)
        groups[key] = groups.get(key, 0) + 1
    colocated = sum(count * (count - 1) // 2 for count in groups.values())

    vm_losses = [
        len(
            simulate_failure(
                ass, config, FailureEvent(vm.name, FailureTargetKind.VM)
            ).lost_implementations
        )
        for vm in config.vms
    ]
    pm_losses = [
        len(
            simulate_failure(
                ass,
                config,
                FailureEvent(
                    f"{cloud.name}.{machine.name}", FailureTargetKind.PHYSICAL_MACHINE
                ),
            ).lost_implementations
        )
        for cloud in ass.clouds
        for machine in cloud.machines
    ]

    ram_used: dict[tuple[str, str], int] = {}
    vms = {vm.name: vm for vm in config.vms}
    for placement in ass.placements:
        vm = vms.get(placement.vm)
        if vm is not None:
            key = (placement.cloud, placement.machine)
            ram_used[key] = ram_used.get(key, 0) + vm.ram_mb
    headrooms = [
        machine.ram_mb - ram_used.get((cloud.name, machine.name), 0)
        for cloud in ass.clouds
        for machine in cloud.machines
    ]

    return DeploymentMetrics(
        colocated_vm_pairs=colocated,
        max_single_vm_loss=max(vm_losses, default=0),
        max_single_pm_loss=max(pm_losses, default=0),
        min_ram_headroom_mb=min(headrooms, default=0),
    )
