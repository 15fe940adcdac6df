"""In-memory model of the three architecture levels.

Documents (Specification, Configuration, Assembly) and every element they
contain are frozen dataclasses: immutable after construction and safely
shareable. Source spans are carried for diagnostics but excluded from
structural equality, so parse(format(doc)) == doc holds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Union

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def check_identifier(text: str, what: str = "identifier") -> str:
    if not IDENTIFIER_RE.match(text):
        raise ValueError(f"invalid {what}: {text!r}")
    return text


class Level(str, Enum):
    SPECIFICATION = "specification"
    CONFIGURATION = "configuration"
    ASSEMBLY = "assembly"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Direction(str, Enum):
    PROVIDED = "provided"
    REQUIRED = "required"


class ImplVariant(str, Enum):
    COMPONENT_CLASS = "component_class"
    WEB_SERVICE = "web_service"


class NetworkMode(str, Enum):
    FLAT = "flat"
    SDN = "sdn"


class SchedulerKind(str, Enum):
    SPREAD = "spread"
    PACK = "pack"


class InstanceState(str, Enum):
    RUNNING = "running"
    FAILED = "failed"


class EndKind(str, Enum):
    """What a connection end resolved to within its document."""

    ROLE = "role"
    ROBOT = "robot"
    SENSOR = "sensor"
    ACTUATOR = "actuator"
    COMPONENT = "component"
    SERVICE = "service"
    ROBOT_MODEL = "robot_model"


class ConnectionFlavor(str, Enum):
    ROLE_ROLE = "role_role"
    ROLE_SENSOR = "role_sensor"
    ROLE_ACTUATOR = "role_actuator"
    ABSTRACT_ROBOT = "abstract_robot"


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span {self.start}..{self.end}")


@dataclass(frozen=True)
class Diagnostic:
    """A severity-tagged finding with a stable catalog code."""

    severity: Severity
    code: str
    message: str
    span: Optional[SourceSpan] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        if self.span is None:
            return ("", -1, -1, self.code, self.message)
        return (self.span.file, self.span.start, self.span.end, self.code, self.message)

    def render(self) -> str:
        where = ""
        if self.span is not None:
            where = f"{self.span.file}:{self.span.start}-{self.span.end}: "
        return f"{where}{self.severity.value} {self.code}: {self.message}"


def sort_diagnostics(diags) -> tuple[Diagnostic, ...]:
    return tuple(sorted(diags, key=Diagnostic.sort_key))


def dedupe_diagnostics(diags) -> tuple[Diagnostic, ...]:
    """Drop exact repeats (same severity, code, message and span)."""
    seen: set = set()
    out: list[Diagnostic] = []
    for diag in diags:
        key = (diag.severity, diag.code, diag.message, diag.span)
        if key not in seen:
            seen.add(key)
            out.append(diag)
    return tuple(out)


@dataclass(frozen=True)
class InterfaceRef:
    name: str
    direction: Direction

    def __post_init__(self) -> None:
        check_identifier(self.name, "interface name")

    def render(self) -> str:
        word = "provides" if self.direction is Direction.PROVIDED else "requires"
        return f"{word} {self.name}"


@dataclass(frozen=True)
class ComponentRole:
    name: str
    interfaces: frozenset[InterfaceRef] = frozenset()
    annotations: Mapping[str, str] = field(default_factory=dict)
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "role name")

    @property
    def incomplete(self) -> bool:
        return self.annotations.get("incomplete") == "true"


@dataclass(frozen=True)
class SensorSpec:
    name: str
    kind: str
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "sensor name")
        if not self.kind:
            raise ValueError(f"sensor {self.name}: kind must be non-empty")


@dataclass(frozen=True)
class ActuatorSpec:
    name: str
    kind: str
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "actuator name")
        if not self.kind:
            raise ValueError(f"actuator {self.name}: kind must be non-empty")


@dataclass(frozen=True)
class ConceptRobot:
    """Abstract robot defined only by the sensor/actuator kinds it exposes."""

    name: str
    sensors: tuple[SensorSpec, ...] = ()
    actuators: tuple[ActuatorSpec, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "robot name")


@dataclass(frozen=True)
class ConnectionEnd:
    """One side of a connection: a dotted path plus the kind it resolved to.

    kind is None when the path did not resolve (reported as E-CONN-04).
    """

    path: tuple[str, ...]
    kind: Optional[EndKind] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.path:
            raise ValueError("connection end path must be non-empty")
        for part in self.path:
            check_identifier(part, "path segment")

    def render(self) -> str:
        return ".".join(self.path)


@dataclass(frozen=True)
class Connection:
    """Directed in syntax; constraint checks treat the end pair symmetrically.

    flavor is None when the end kinds match no allowed pairing (E-CONN-01).
    """

    source: ConnectionEnd
    target: ConnectionEnd
    flavor: Optional[ConnectionFlavor] = None
    protocol: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)

    @property
    def abstract(self) -> bool:
        return self.flavor is ConnectionFlavor.ABSTRACT_ROBOT

    def render(self) -> str:
        op = "~" if self.abstract else "->"
        text = f"{self.source.render()} {op} {self.target.render()}"
        if self.protocol is not None:
            text += f" via {self.protocol}"
        return text


@dataclass(frozen=True)
class Specification:
    name: str
    roles: tuple[ComponentRole, ...] = ()
    robots: tuple[ConceptRobot, ...] = ()
    connections: tuple[Connection, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    LEVEL = Level.SPECIFICATION

    def __post_init__(self) -> None:
        check_identifier(self.name, "specification name")


@dataclass(frozen=True)
class RobotModel:
    """A concrete robot platform realizing a ConceptRobot."""

    name: str
    realizes: str
    model: str = ""
    sensors: tuple[SensorSpec, ...] = ()
    actuators: tuple[ActuatorSpec, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "robot model name")
        check_identifier(self.realizes, "realized robot name")


@dataclass(frozen=True)
class VirtualMachine:
    name: str
    os: Optional[str] = None
    cpu_cores: int = 1
    ram_mb: int = 1
    subnet: Optional[str] = None
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "vm name")
        if self.cpu_cores < 1:
            raise ValueError(f"vm {self.name}: cpu_cores must be >= 1")
        if self.ram_mb < 1:
            raise ValueError(f"vm {self.name}: ram_mb must be >= 1")


@dataclass(frozen=True)
class ComponentImplementation:
    name: str
    variant: ImplVariant
    realizes: str
    host: str
    interfaces: frozenset[InterfaceRef] = frozenset()
    annotations: Mapping[str, str] = field(default_factory=dict)
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "implementation name")
        check_identifier(self.realizes, "realized role name")
        check_identifier(self.host, "host name")

    @property
    def end_kind(self) -> EndKind:
        if self.variant is ImplVariant.WEB_SERVICE:
            return EndKind.SERVICE
        return EndKind.COMPONENT


@dataclass(frozen=True)
class Configuration:
    name: str
    implements: str
    robots: tuple[RobotModel, ...] = ()
    vms: tuple[VirtualMachine, ...] = ()
    impls: tuple[ComponentImplementation, ...] = ()
    connections: tuple[Connection, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    LEVEL = Level.CONFIGURATION

    def __post_init__(self) -> None:
        check_identifier(self.name, "configuration name")
        check_identifier(self.implements, "implemented specification name")

    def host_of(self, name: str) -> Union[VirtualMachine, RobotModel, None]:
        for vm in self.vms:
            if vm.name == name:
                return vm
        for robot in self.robots:
            if robot.name == name:
                return robot
        return None


@dataclass(frozen=True)
class PhysicalMachine:
    name: str
    cpu_cores: int = 1
    ram_mb: int = 1
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "machine name")
        if self.cpu_cores < 1:
            raise ValueError(f"machine {self.name}: cpu_cores must be >= 1")
        if self.ram_mb < 1:
            raise ValueError(f"machine {self.name}: ram_mb must be >= 1")


@dataclass(frozen=True)
class CloudDescription:
    """Deployment substrate: machines, network mode and scheduling policy.

    Zero machines is representable; validate_assembly reports it (E-CLOUD-01).
    """

    name: str
    network: NetworkMode = NetworkMode.FLAT
    scheduler: SchedulerKind = SchedulerKind.SPREAD
    machines: tuple[PhysicalMachine, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "cloud name")

    def machine(self, name: str) -> Optional[PhysicalMachine]:
        for pm in self.machines:
            if pm.name == name:
                return pm
        return None


@dataclass(frozen=True)
class VmPlacement:
    vm: str
    machine: str
    cloud: str
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.vm, "placed vm name")
        check_identifier(self.machine, "machine name")
        check_identifier(self.cloud, "cloud name")


@dataclass(frozen=True)
class ComponentInstance:
    name: str
    of: str
    state: InstanceState = InstanceState.RUNNING
    span: Optional[SourceSpan] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        check_identifier(self.name, "instance name")
        check_identifier(self.of, "instantiated implementation name")


@dataclass(frozen=True)
class Assembly:
    name: str
    deploys: str
    clouds: tuple[CloudDescription, ...] = ()
    placements: tuple[VmPlacement, ...] = ()
    instances: tuple[ComponentInstance, ...] = ()
    span: Optional[SourceSpan] = field(default=None, compare=False)

    LEVEL = Level.ASSEMBLY

    def __post_init__(self) -> None:
        check_identifier(self.name, "assembly name")
        check_identifier(self.deploys, "deployed configuration name")

    def placement_of(self, vm: str) -> Optional[VmPlacement]:
        for placement in self.placements:
            if placement.vm == vm:
                return placement
        return None


Document = Union[Specification, Configuration, Assembly]


def document_level(doc: Document) -> Level:
    return doc.LEVEL


@dataclass(frozen=True)
class ResolvedEnd:
    kind: EndKind
    element: object
    owner: Optional[str] = None  # robot owning a sensor/actuator end


def _end_candidates(doc: Document, path: tuple[str, ...]) -> list[ResolvedEnd]:
    found: list[ResolvedEnd] = []
    if isinstance(doc, Specification):
        robots: tuple = doc.robots
        if len(path) == 1:
            name = path[0]
            found += [ResolvedEnd(EndKind.ROLE, r) for r in doc.roles if r.name == name]
            found += [ResolvedEnd(EndKind.ROBOT, r) for r in robots if r.name == name]
    elif isinstance(doc, Configuration):
        robots = doc.robots
        if len(path) == 1:
            name = path[0]
            found += [ResolvedEnd(i.end_kind, i) for i in doc.impls if i.name == name]
            found += [ResolvedEnd(EndKind.ROBOT_MODEL, r) for r in robots if r.name == name]
    else:
        return []
    if len(path) == 1:
        # bare sensor/actuator name, unique across robots or ambiguous
        name = path[0]
        for robot in robots:
            for sensor in robot.sensors:
                if sensor.name == name:
                    found.append(ResolvedEnd(EndKind.SENSOR, sensor, robot.name))
            for actuator in robot.actuators:
                if actuator.name == name:
                    found.append(ResolvedEnd(EndKind.ACTUATOR, actuator, robot.name))
    elif len(path) == 2:
        owner, name = path
        for robot in robots:
            if robot.name != owner:
                continue
            for sensor in robot.sensors:
                if sensor.name == name:
                    found.append(ResolvedEnd(EndKind.SENSOR, sensor, robot.name))
            for actuator in robot.actuators:
                if actuator.name == name:
                    found.append(ResolvedEnd(EndKind.ACTUATOR, actuator, robot.name))
    return found


def end_candidates(doc: Document, path: tuple[str, ...]) -> list[ResolvedEnd]:
    """All elements a connection-end path could name inside its document."""
    return _end_candidates(doc, path)


def resolve_end(doc: Document, path: tuple[str, ...]) -> Optional[ResolvedEnd]:
    """Resolve a connection-end path inside its enclosing document.

    Returns None unless exactly one element matches (unknown and ambiguous
    ends are both validation findings, not model errors).
    """
    found = _end_candidates(doc, path)
    if len(found) == 1:
        return found[0]
    return None


_ROLEISH = {EndKind.ROLE, EndKind.COMPONENT, EndKind.SERVICE}


def classify_flavor(
    a: Optional[EndKind], b: Optional[EndKind], abstract: bool
) -> Optional[ConnectionFlavor]:
    """Derive a connection flavor from resolved end kinds (order-insensitive)."""
    if abstract:
        return ConnectionFlavor.ABSTRACT_ROBOT
    if a is None or b is None:
        return None
    kinds = {a, b}
    if kinds <= _ROLEISH:
        return ConnectionFlavor.ROLE_ROLE
    if len(kinds & _ROLEISH) == 1:
        if EndKind.SENSOR in kinds:
            return ConnectionFlavor.ROLE_SENSOR
        if EndKind.ACTUATOR in kinds:
            return ConnectionFlavor.ROLE_ACTUATOR
    return None
