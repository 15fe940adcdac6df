"""Canonical text form of model documents.

format_document() output re-parses to a structurally identical document
(spans aside). Indentation is two spaces, element order is preserved,
interface and annotation lines are emitted in sorted order (those fields
are sets/maps in the model).
"""

from __future__ import annotations

from .model import (
    ActuatorSpec,
    Assembly,
    CloudDescription,
    ComponentImplementation,
    ComponentRole,
    ConceptRobot,
    Configuration,
    Connection,
    Direction,
    IDENTIFIER_RE,
    ImplVariant,
    InstanceState,
    InterfaceRef,
    RobotModel,
    SensorSpec,
    Specification,
    VirtualMachine,
)

INDENT = "  "


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _word_or_quote(text: str) -> str:
    return text if IDENTIFIER_RE.match(text) else _quote(text)


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    def line(self, text: str) -> None:
        self.lines.append(INDENT * self.depth + text)

    def block(self, header: str, body) -> None:
        self.line(header + " {")
        self.depth += 1
        body()
        self.depth -= 1
        self.line("}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _interface_lines(writer: _Writer, interfaces: frozenset[InterfaceRef]) -> None:
    provided = sorted(i.name for i in interfaces if i.direction is Direction.PROVIDED)
    required = sorted(i.name for i in interfaces if i.direction is Direction.REQUIRED)
    for name in provided:
        writer.line(f"provides {name}")
    for name in required:
        writer.line(f"requires {name}")


def _annotation_lines(writer: _Writer, annotations) -> None:
    for key in sorted(annotations):
        writer.line(f"@{key} {_word_or_quote(annotations[key])}")


def _sensor_lines(writer: _Writer, sensors, actuators) -> None:
    for sensor in sensors:
        writer.line(f"sensor {sensor.name}: {_word_or_quote(sensor.kind)}")
    for actuator in actuators:
        writer.line(f"actuator {actuator.name}: {_word_or_quote(actuator.kind)}")


def _connection_line(writer: _Writer, conn: Connection) -> None:
    op = "~" if conn.abstract else "->"
    text = f"connect {conn.source.render()} {op} {conn.target.render()}"
    if conn.protocol is not None:
        text += f" via {_word_or_quote(conn.protocol)}"
    writer.line(text)


def _role(writer: _Writer, role: ComponentRole) -> None:
    def body() -> None:
        _interface_lines(writer, role.interfaces)
        _annotation_lines(writer, role.annotations)

    writer.block(f"role {role.name}", body)


def _concept_robot(writer: _Writer, robot: ConceptRobot) -> None:
    writer.block(
        f"concept_robot {robot.name}",
        lambda: _sensor_lines(writer, robot.sensors, robot.actuators),
    )


def _robot_model(writer: _Writer, robot: RobotModel) -> None:
    header = f"robot {robot.name}"
    if robot.model:
        header += f" model {_quote(robot.model)}"
    header += f" realizes {robot.realizes}"
    writer.block(header, lambda: _sensor_lines(writer, robot.sensors, robot.actuators))


def _vm(writer: _Writer, vm: VirtualMachine) -> None:
    def body() -> None:
        if vm.os is not None:
            writer.line(f"os {_quote(vm.os)}")
        writer.line(f"cpu {vm.cpu_cores}")
        writer.line(f"ram {vm.ram_mb}")
        if vm.subnet is not None:
            writer.line(f"subnet {_quote(vm.subnet)}")

    writer.block(f"vm {vm.name}", body)


def _impl(writer: _Writer, impl: ComponentImplementation) -> None:
    keyword = "service" if impl.variant is ImplVariant.WEB_SERVICE else "component"

    def body() -> None:
        _interface_lines(writer, impl.interfaces)
        _annotation_lines(writer, impl.annotations)

    writer.block(
        f"{keyword} {impl.name} realizes {impl.realizes} on {impl.host}", body
    )


def _cloud(writer: _Writer, cloud: CloudDescription) -> None:
    def body() -> None:
        writer.line(f"network {cloud.network.value}")
        writer.line(f"scheduler {cloud.scheduler.value}")
        for machine in cloud.machines:

            def machine_body(m=machine) -> None:
                writer.line(f"cpu {m.cpu_cores}")
                writer.line(f"ram {m.ram_mb}")

            writer.block(f"machine {machine.name}", machine_body)

    writer.block(f"cloud {cloud.name}", body)


def format_document(doc) -> str:
    """Render a document (or standalone cloud) as canonical `.crala` text."""
    writer = _Writer()
    if isinstance(doc, Specification):

        def spec_body() -> None:
            for role in doc.roles:
                _role(writer, role)
            for robot in doc.robots:
                _concept_robot(writer, robot)
            for conn in doc.connections:
                _connection_line(writer, conn)

        writer.block(f"specification {doc.name}", spec_body)
    elif isinstance(doc, Configuration):

        def config_body() -> None:
            for robot in doc.robots:
                _robot_model(writer, robot)
            for vm in doc.vms:
                _vm(writer, vm)
            for impl in doc.impls:
                _impl(writer, impl)
            for conn in doc.connections:
                _connection_line(writer, conn)

        writer.block(f"configuration {doc.name} implements {doc.implements}", config_body)
    elif isinstance(doc, Assembly):

        def assembly_body() -> None:
            for cloud in doc.clouds:
                _cloud(writer, cloud)
            for placement in doc.placements:
                writer.line(
                    f"place {placement.vm} on {placement.machine} in {placement.cloud}"
                )
            for instance in doc.instances:
                suffix = (
                    " state failed" if instance.state is InstanceState.FAILED else ""
                )
                writer.line(f"instance {instance.name} of {instance.of}{suffix}")

        writer.block(f"assembly {doc.name} deploys {doc.deploys}", assembly_body)
    elif isinstance(doc, CloudDescription):
        _cloud(writer, doc)
    else:
        raise TypeError(f"cannot format {type(doc).__name__}")
    return writer.text()


def format_documents(docs) -> str:
    return "\n".join(format_document(doc) for doc in docs)
