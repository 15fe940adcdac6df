"""Seeded random document generator for property sweeps.

Connections are assembled through the same end-resolution the parser uses,
so generated documents are exactly what parsing their canonical text yields.
Name pools are disjoint per element kind to keep connection ends
unambiguous.
"""

from __future__ import annotations

import random

from crala.model import (
    ActuatorSpec,
    Assembly,
    CloudDescription,
    ComponentImplementation,
    ComponentInstance,
    ComponentRole,
    ConceptRobot,
    Configuration,
    Connection,
    ConnectionEnd,
    Direction,
    ImplVariant,
    InstanceState,
    InterfaceRef,
    NetworkMode,
    PhysicalMachine,
    RobotModel,
    SchedulerKind,
    SensorSpec,
    Specification,
    VirtualMachine,
    VmPlacement,
    classify_flavor,
    resolve_end,
)

KINDS = ["Camera", "Lidar", "Imu", "DifferentialDrive", "Gripper", "Sonar"]
WORDS = ["Pose", "Image", "Path", "Map", "Twist", "Scan", "Goal", "Grip"]
OSES = ["ubuntu-ros-indigo", "ubuntu-ros-kinetic", "debian-rt"]
PROTOCOLS = ["ros_tcp", "http", "mqtt", "dds rtps"]  # one needs quoting


def _interfaces(rng: random.Random, low: int = 0, high: int = 4) -> frozenset[InterfaceRef]:
    count = rng.randint(low, high)
    picks = rng.sample(WORDS, min(count, len(WORDS)))
    return frozenset(
        InterfaceRef(name, rng.choice((Direction.PROVIDED, Direction.REQUIRED)))
        for name in picks
    )


def _annotations(rng: random.Random) -> dict[str, str]:
    out: dict[str, str] = {}
    if rng.random() < 0.3:
        out["task"] = rng.choice(["navigation", "mapping", "pick and place"])
    if rng.random() < 0.2:
        out["tags"] = ",".join(rng.sample(["slam", "planning", "driver"], 2))
    return out


def _sensors(rng: random.Random, prefix: str, max_count: int = 3):
    sensors = tuple(
        SensorSpec(f"{prefix}_s{i}", rng.choice(KINDS))
        for i in range(rng.randint(0, max_count))
    )
    actuators = tuple(
        ActuatorSpec(f"{prefix}_a{i}", rng.choice(KINDS))
        for i in range(rng.randint(0, max_count))
    )
    return sensors, actuators


def _link(doc, a: tuple[str, ...], b: tuple[str, ...], abstract: bool, protocol):
    """Build a connection the way the parser would: ends carry resolved kinds."""
    res_a = resolve_end(doc, a)
    res_b = resolve_end(doc, b)
    source = ConnectionEnd(a, res_a.kind if res_a else None)
    target = ConnectionEnd(b, res_b.kind if res_b else None)
    flavor = classify_flavor(source.kind, target.kind, abstract)
    return Connection(source, target, flavor, protocol)


def random_specification(rng: random.Random, name: str = "GenSpec") -> Specification:
    roles = tuple(
        ComponentRole(f"Role{i}", _interfaces(rng), _annotations(rng))
        for i in range(rng.randint(0, 4))
    )
    robots = tuple(
        ConceptRobot(f"Bot{i}", *_sensors(rng, f"b{i}"))
        for i in range(rng.randint(0, 2))
    )
    spec = Specification(name, roles, robots)

    connections = []
    for _ in range(rng.randint(0, 4)):
        if not roles:
            break
        role = rng.choice(roles)
        pick = rng.random()
        if pick < 0.5 and len(roles) > 1:
            other = rng.choice([r for r in roles if r.name != role.name])
            connections.append(_link(spec, (role.name,), (other.name,), False, None))
        elif pick < 0.8 and robots:
            robot = rng.choice(robots)
            if rng.random() < 0.5 or not robot.sensors:
                connections.append(_link(spec, (role.name,), (robot.name,), True, None))
            else:
                sensor = rng.choice(robot.sensors)
                connections.append(
                    _link(spec, (role.name,), (robot.name, sensor.name), False, None)
                )
    return Specification(name, roles, robots, tuple(connections))


def random_configuration(
    rng: random.Random, name: str = "GenConfig", implements: str = "GenSpec"
) -> Configuration:
    robots = tuple(
        RobotModel(f"Rm{i}", f"Bot{i}", rng.choice(["Pioneer3DX", "NAO", ""]),
                   *_sensors(rng, f"rm{i}"))
        for i in range(rng.randint(0, 2))
    )
    vms = tuple(
        VirtualMachine(
            f"Vm{i}",
            rng.choice(OSES) if rng.random() < 0.8 else None,
            rng.randint(1, 8),
            rng.choice([512, 1024, 2048, 4096]),
            rng.choice([None, "net_a", "net_b"]) if rng.random() < 0.4 else None,
        )
        for i in range(rng.randint(0, 4))
    )
    hosts = [vm.name for vm in vms] + [robot.name for robot in robots]
    impls = tuple(
        ComponentImplementation(
            f"Impl{i}",
            rng.choice((ImplVariant.COMPONENT_CLASS, ImplVariant.WEB_SERVICE)),
            f"Role{i}",
            rng.choice(hosts),
            _interfaces(rng),
            _annotations(rng),
        )
        for i in range(rng.randint(0, 4) if hosts else 0)
    )
    config = Configuration(name, implements, robots, vms, impls)

    connections = []
    for _ in range(rng.randint(0, 3)):
        if len(impls) < 2:
            break
        a, b = rng.sample(list(impls), 2)
        protocol = rng.choice(PROTOCOLS) if rng.random() < 0.6 else None
        connections.append(_link(config, (a.name,), (b.name,), False, protocol))
    return Configuration(name, implements, robots, vms, impls, tuple(connections))


def random_cloud(rng: random.Random, name: str = "GenCloud") -> CloudDescription:
    machines = tuple(
        PhysicalMachine(f"Pm{i}", rng.randint(1, 16), rng.choice([2048, 4096, 8192, 16384]))
        for i in range(rng.randint(1, 4))
    )
    return CloudDescription(
        name,
        rng.choice((NetworkMode.FLAT, NetworkMode.SDN)),
        rng.choice((SchedulerKind.SPREAD, SchedulerKind.PACK)),
        machines,
    )


def random_assembly(
    rng: random.Random, config: Configuration, name: str = "GenAss"
) -> Assembly:
    cloud = random_cloud(rng)
    placements = tuple(
        VmPlacement(vm.name, rng.choice(cloud.machines).name, cloud.name)
        for vm in config.vms
    )
    instances = tuple(
        ComponentInstance(
            f"{impl.name.lower()}_{i}",
            impl.name,
            rng.choice((InstanceState.RUNNING, InstanceState.FAILED))
            if rng.random() < 0.2
            else InstanceState.RUNNING,
        )
        for i, impl in enumerate(config.impls)
    )
    return Assembly(name, config.name, (cloud,), placements, instances)


def random_document(rng: random.Random, index: int):
    kind = rng.randrange(3)
    if kind == 0:
        return random_specification(rng, f"Spec{index}")
    if kind == 1:
        return random_configuration(rng, f"Config{index}", f"Spec{index}")
    config = random_configuration(rng, f"Config{index}", f"Spec{index}")
    return random_assembly(rng, config, f"Ass{index}")
