"""Recursive-descent parser for `.crala` documents.

Grammar reference: docs/language-reference.md. Recovery is skip-to-next-
declaration: after an error the parser resynchronizes on the next item
keyword (or the matching close brace), so one typo does not mask later
diagnostics. Documents that produced any error diagnostic are flagged
partial; callers should not run semantic checks on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .lexer import Token, TokenKind, tokenize
from .model import (
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
    Diagnostic,
    Direction,
    Document,
    ImplVariant,
    InstanceState,
    InterfaceRef,
    NetworkMode,
    PhysicalMachine,
    RobotModel,
    SchedulerKind,
    SensorSpec,
    Severity,
    SourceSpan,
    Specification,
    VirtualMachine,
    VmPlacement,
    classify_flavor,
    dedupe_diagnostics,
    resolve_end,
    sort_diagnostics,
)

ParsedDocument = Union[Document, CloudDescription]

TOP_KEYWORDS = frozenset({"specification", "configuration", "assembly", "cloud"})
SPEC_ITEMS = frozenset({"role", "concept_robot", "connect"})
CONFIG_ITEMS = frozenset({"robot", "vm", "service", "component", "connect"})
ASSEMBLY_ITEMS = frozenset({"cloud", "place", "instance"})
CLOUD_ITEMS = frozenset({"network", "scheduler", "machine"})


@dataclass(frozen=True)
class ParseResult:
    documents: tuple[ParsedDocument, ...]
    diagnostics: tuple[Diagnostic, ...]
    partial: frozenset[str]  # names of documents that hit an error

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)

    def clean_documents(self) -> tuple[ParsedDocument, ...]:
        return tuple(d for d in self.documents if d.name not in self.partial)


class _Recover(Exception):
    """Internal: unwind to the nearest recovery point."""


class _Parser:
    def __init__(self, text: str, file: str) -> None:
        self.file = file
        self.tokens, lex_diags = tokenize(text, file)
        self.diagnostics: list[Diagnostic] = list(lex_diags)
        self.pos = 0

    # --- token plumbing -------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.cur
        if token.kind is not TokenKind.EOF:
            self.pos += 1
        return token

    def at(self, kind: TokenKind) -> bool:
        return self.cur.kind is kind

    def at_word(self, *texts: str) -> bool:
        return self.cur.kind is TokenKind.WORD and self.cur.text in texts

    def span(self, start: Token, end: Optional[Token] = None) -> SourceSpan:
        last = end if end is not None else self.tokens[max(self.pos - 1, 0)]
        return SourceSpan(self.file, start.start, max(last.end, start.end))

    def error(self, message: str, token: Optional[Token] = None, code: str = "E-PARSE-01") -> None:
        token = token if token is not None else self.cur
        start, end = token.start, token.end
        if end <= start:  # zero-width (EOF): anchor on the last byte
            start = max(0, start - 1)
            end = max(end, start)
        self.diagnostics.append(
            Diagnostic(Severity.ERROR, code, message, SourceSpan(self.file, start, end))
        )

    def fail(self, message: str) -> None:
        found = self.cur.text or "end of input"
        self.error(f"{message}, found {found!r}")
        raise _Recover

    def expect_word(self, text: str) -> Token:
        if not self.at_word(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def expect_name(self, what: str) -> Token:
        if not self.at(TokenKind.WORD):
            self.fail(f"expected {what}")
        return self.advance()

    def expect(self, kind: TokenKind, what: str) -> Token:
        if not self.at(kind):
            self.fail(f"expected {what}")
        return self.advance()

    def expect_string(self, what: str) -> Token:
        if not self.at(TokenKind.STRING):
            self.fail(f"expected quoted string for {what}")
        return self.advance()

    def expect_positive_int(self, what: str) -> int:
        token = self.expect(TokenKind.INT, f"positive integer for {what}")
        value = int(token.value)  # type: ignore[arg-type]
        if value < 1:
            self.error(f"{what} must be a positive integer")
            return 1
        return value

    def name_or_string(self, what: str) -> str:
        if self.at(TokenKind.WORD):
            return self.advance().text
        if self.at(TokenKind.STRING):
            return str(self.advance().value)
        self.fail(f"expected {what}")
        raise AssertionError("unreachable")

    # --- recovery -------------------------------------------------------

    def sync_to(self, words: frozenset[str]) -> None:
        """Skip until a declaration keyword, a close brace, or EOF."""
        while not self.at(TokenKind.EOF):
            if self.at(TokenKind.RBRACE):
                return
            if self.at(TokenKind.AT) and "@" in words:
                return
            if self.cur.kind is TokenKind.WORD and (
                self.cur.text in words or self.cur.text in TOP_KEYWORDS
            ):
                return
            if self.at(TokenKind.LBRACE):
                self.advance()
                self.skip_balanced()
                continue
            self.advance()

    def skip_balanced(self) -> None:
        """Consume tokens up to and including the brace matching an already
        consumed '{'."""
        depth = 1
        while depth > 0 and not self.at(TokenKind.EOF):
            token = self.advance()
            if token.kind is TokenKind.LBRACE:
                depth += 1
            elif token.kind is TokenKind.RBRACE:
                depth -= 1

    # --- duplicate bookkeeping -------------------------------------------

    def duplicate(self, kind: str, name: str, span: SourceSpan) -> None:
        self.diagnostics.append(
            Diagnostic(
                Severity.ERROR,
                "E-PARSE-02",
                f"duplicate {kind} {name!r}",
                span,
            )
        )

    # --- entry point ------------------------------------------------------

    def parse_file(self) -> ParseResult:
        documents: list[ParsedDocument] = []
        partial: set[str] = set()
        while not self.at(TokenKind.EOF):
            if not self.at(TokenKind.WORD) or self.cur.text not in TOP_KEYWORDS:
                found = self.cur.text or "end of input"
                self.error(
                    f"expected one of {', '.join(sorted(TOP_KEYWORDS))}, found {found!r}"
                )
                self.advance()
                self.sync_to(frozenset())
                continue
            before = sum(1 for d in self.diagnostics if d.is_error)
            doc = self.parse_document()
            if doc is not None:
                documents.append(doc)
                after = sum(1 for d in self.diagnostics if d.is_error)
                if after > before:
                    partial.add(doc.name)
        diagnostics = dedupe_diagnostics(sort_diagnostics(self.diagnostics))
        # lexer errors are emitted before any document is assembled: mark the
        # documents whose source region contains an error as partial too
        for doc in documents:
            if doc.name in partial or doc.span is None:
                continue
            for diag in diagnostics:
                if (
                    diag.is_error
                    and diag.span is not None
                    and diag.span.start >= doc.span.start
                    and diag.span.start < doc.span.end
                ):
                    partial.add(doc.name)
                    break
        return ParseResult(tuple(documents), diagnostics, frozenset(partial))

    def parse_document(self) -> Optional[ParsedDocument]:
        keyword = self.cur.text
        try:
            if keyword == "specification":
                return self.parse_specification()
            if keyword == "configuration":
                return self.parse_configuration()
            if keyword == "assembly":
                return self.parse_assembly()
            return self.parse_cloud(top_level=True)
        except _Recover:
            self.sync_to(frozenset())
            if self.at(TokenKind.RBRACE):
                self.advance()
            return None

    # --- shared pieces ----------------------------------------------------

    def parse_body(self, items: frozenset[str], handler) -> None:
        """Parse `{ item* }` dispatching each item keyword to handler."""
        self.expect(TokenKind.LBRACE, "'{'")
        while True:
            if self.at(TokenKind.RBRACE):
                self.advance()
                return
            if self.at(TokenKind.EOF):
                self.error("missing '}' before end of input")
                raise _Recover
            keyword: Optional[str] = None
            if self.at(TokenKind.AT) and "@" in items:
                keyword = "@"
            elif self.cur.kind is TokenKind.WORD and self.cur.text in items:
                keyword = self.cur.text
            if keyword is None:
                if self.cur.kind is TokenKind.WORD and self.cur.text in TOP_KEYWORDS:
                    # runaway body: pretend it was closed so the next
                    # declaration still parses
                    self.error("missing '}'")
                    return
                found = self.cur.text or "end of input"
                self.error(
                    f"unknown declaration {found!r}, expected one of "
                    f"{', '.join(sorted(items))}"
                )
                self.advance()
                self.sync_to(items)
                continue
            try:
                handler(keyword)
            except _Recover:
                self.sync_to(items)

    def parse_path(self) -> ConnectionEnd:
        start = self.expect_name("a name")
        parts = [start.text]
        while self.at(TokenKind.DOT):
            self.advance()
            parts.append(self.expect_name("a name after '.'").text)
        return ConnectionEnd(tuple(parts), None, self.span(start))

    def parse_connect(self, connections: list[dict]) -> None:
        start = self.expect_word("connect")
        source = self.parse_path()
        if self.at(TokenKind.ARROW):
            abstract = False
        elif self.at(TokenKind.TILDE):
            abstract = True
        else:
            self.fail("expected '->' or '~'")
        self.advance()
        target = self.parse_path()
        protocol = None
        if self.at_word("via"):
            self.advance()
            protocol = self.name_or_string("a protocol name")
        connections.append(
            {
                "source": source,
                "target": target,
                "abstract": abstract,
                "protocol": protocol,
                "span": self.span(start),
            }
        )

    def parse_interface_or_annotation(
        self,
        keyword: str,
        owner: str,
        interfaces: dict[InterfaceRef, SourceSpan],
        annotations: dict[str, str],
    ) -> None:
        if keyword == "@":
            at = self.expect(TokenKind.AT, "'@'")
            key = self.expect_name("an annotation key").text
            value = self.name_or_string("an annotation value")
            if key in annotations:
                self.duplicate("annotation", f"{owner}.@{key}", self.span(at))
                return
            annotations[key] = value
            return
        token = self.advance()  # provides | requires
        direction = Direction.PROVIDED if token.text == "provides" else Direction.REQUIRED
        name = self.expect_name("an interface name")
        ref = InterfaceRef(name.text, direction)
        span = self.span(token)
        if ref in interfaces:
            self.duplicate("interface", f"{owner}.{token.text} {name.text}", span)
            return
        interfaces[ref] = span

    def parse_sensor_or_actuator(
        self, keyword: str, owner: str, sensors: dict[str, SensorSpec], actuators: dict[str, ActuatorSpec]
    ) -> None:
        start = self.advance()  # sensor | actuator
        name = self.expect_name(f"a {keyword} name")
        self.expect(TokenKind.COLON, "':'")
        kind = self.name_or_string(f"a {keyword} kind")
        span = self.span(start)
        if name.text in sensors or name.text in actuators:
            self.duplicate("sensor/actuator", f"{owner}.{name.text}", span)
            return
        if keyword == "sensor":
            sensors[name.text] = SensorSpec(name.text, kind, span)
        else:
            actuators[name.text] = ActuatorSpec(name.text, kind, span)

    @staticmethod
    def link_connections(doc_factory, raw_connections: list[dict]):
        """Second pass: resolve connection ends against the finished document
        and derive flavors. Returns the document rebuilt with connections."""
        doc = doc_factory(())
        connections = []
        for raw in raw_connections:
            src_res = resolve_end(doc, raw["source"].path)
            dst_res = resolve_end(doc, raw["target"].path)
            source = ConnectionEnd(
                raw["source"].path,
                src_res.kind if src_res else None,
                raw["source"].span,
            )
            target = ConnectionEnd(
                raw["target"].path,
                dst_res.kind if dst_res else None,
                raw["target"].span,
            )
            flavor = classify_flavor(source.kind, target.kind, raw["abstract"])
            connections.append(
                Connection(source, target, flavor, raw["protocol"], raw["span"])
            )
        return doc_factory(tuple(connections))

    # --- specification -----------------------------------------------------

    def parse_specification(self) -> Specification:
        start = self.expect_word("specification")
        name = self.expect_name("a specification name")
        roles: dict[str, ComponentRole] = {}
        robots: dict[str, ConceptRobot] = {}
        raw_connections: list[dict] = []

        def handle(keyword: str) -> None:
            if keyword == "role":
                self.parse_role(roles)
            elif keyword == "concept_robot":
                self.parse_concept_robot(robots)
            else:
                self.parse_connect(raw_connections)

        self.parse_body(SPEC_ITEMS, handle)
        span = self.span(start)
        return self.link_connections(
            lambda conns: Specification(
                name.text, tuple(roles.values()), tuple(robots.values()), conns, span
            ),
            raw_connections,
        )

    def parse_role(self, roles: dict[str, ComponentRole]) -> None:
        start = self.expect_word("role")
        name = self.expect_name("a role name")
        interfaces: dict[InterfaceRef, SourceSpan] = {}
        annotations: dict[str, str] = {}

        def handle(keyword: str) -> None:
            self.parse_interface_or_annotation(keyword, name.text, interfaces, annotations)

        self.parse_body(frozenset({"provides", "requires", "@"}), handle)
        span = self.span(start)
        if name.text in roles:
            self.duplicate("role", name.text, span)
            return
        roles[name.text] = ComponentRole(name.text, frozenset(interfaces), annotations, span)

    def parse_concept_robot(self, robots: dict[str, ConceptRobot]) -> None:
        start = self.expect_word("concept_robot")
        name = self.expect_name("a robot name")
        sensors: dict[str, SensorSpec] = {}
        actuators: dict[str, ActuatorSpec] = {}

        def handle(keyword: str) -> None:
            self.parse_sensor_or_actuator(keyword, name.text, sensors, actuators)

        self.parse_body(frozenset({"sensor", "actuator"}), handle)
        span = self.span(start)
        if name.text in robots:
            self.duplicate("concept_robot", name.text, span)
            return
        robots[name.text] = ConceptRobot(
            name.text, tuple(sensors.values()), tuple(actuators.values()), span
        )

    # --- configuration ------------------------------------------------------

    def parse_configuration(self) -> Configuration:
        start = self.expect_word("configuration")
        name = self.expect_name("a configuration name")
        self.expect_word("implements")
        implements = self.expect_name("a specification name")
        robots: dict[str, RobotModel] = {}
        vms: dict[str, VirtualMachine] = {}
        impls: dict[str, ComponentImplementation] = {}
        raw_connections: list[dict] = []

        def handle(keyword: str) -> None:
            if keyword == "robot":
                self.parse_robot_model(robots)
            elif keyword == "vm":
                self.parse_vm(vms)
            elif keyword in ("service", "component"):
                self.parse_impl(keyword, impls)
            else:
                self.parse_connect(raw_connections)

        self.parse_body(CONFIG_ITEMS, handle)
        span = self.span(start)
        return self.link_connections(
            lambda conns: Configuration(
                name.text,
                implements.text,
                tuple(robots.values()),
                tuple(vms.values()),
                tuple(impls.values()),
                conns,
                span,
            ),
            raw_connections,
        )

    def parse_robot_model(self, robots: dict[str, RobotModel]) -> None:
        start = self.expect_word("robot")
        name = self.expect_name("a robot name")
        model = ""
        if self.at_word("model"):
            self.advance()
            model = str(self.expect_string("the robot model").value)
        self.expect_word("realizes")
        realizes = self.expect_name("a concept robot name")
        sensors: dict[str, SensorSpec] = {}
        actuators: dict[str, ActuatorSpec] = {}

        def handle(keyword: str) -> None:
            self.parse_sensor_or_actuator(keyword, name.text, sensors, actuators)

        self.parse_body(frozenset({"sensor", "actuator"}), handle)
        span = self.span(start)
        if name.text in robots:
            self.duplicate("robot", name.text, span)
            return
        robots[name.text] = RobotModel(
            name.text,
            realizes.text,
            model,
            tuple(sensors.values()),
            tuple(actuators.values()),
            span,
        )

    def parse_vm(self, vms: dict[str, VirtualMachine]) -> None:
        start = self.expect_word("vm")
        name = self.expect_name("a vm name")
        attrs: dict[str, object] = {}

        def set_attr(key: str, value: object, token: Token) -> None:
            if key in attrs:
                self.duplicate("attribute", f"{name.text}.{key}", self.span(token))
                return
            attrs[key] = value

        def handle(keyword: str) -> None:
            token = self.advance()
            if keyword == "os":
                set_attr("os", str(self.expect_string("the operating system").value), token)
            elif keyword == "cpu":
                set_attr("cpu", self.expect_positive_int("cpu"), token)
            elif keyword == "ram":
                set_attr("ram", self.expect_positive_int("ram"), token)
            else:
                set_attr("subnet", str(self.expect_string("the subnet").value), token)

        self.parse_body(frozenset({"os", "cpu", "ram", "subnet"}), handle)
        span = self.span(start)
        if name.text in vms:
            self.duplicate("vm", name.text, span)
            return
        vms[name.text] = VirtualMachine(
            name.text,
            attrs.get("os"),  # type: ignore[arg-type]
            int(attrs.get("cpu", 1)),  # type: ignore[call-overload]
            int(attrs.get("ram", 1)),  # type: ignore[call-overload]
            attrs.get("subnet"),  # type: ignore[arg-type]
            span,
        )

    def parse_impl(self, keyword: str, impls: dict[str, ComponentImplementation]) -> None:
        start = self.expect_word(keyword)
        variant = ImplVariant.WEB_SERVICE if keyword == "service" else ImplVariant.COMPONENT_CLASS
        name = self.expect_name(f"a {keyword} name")
        self.expect_word("realizes")
        realizes = self.expect_name("a role name")
        self.expect_word("on")
        host = self.expect_name("a host name")
        interfaces: dict[InterfaceRef, SourceSpan] = {}
        annotations: dict[str, str] = {}

        def handle(kw: str) -> None:
            self.parse_interface_or_annotation(kw, name.text, interfaces, annotations)

        self.parse_body(frozenset({"provides", "requires", "@"}), handle)
        span = self.span(start)
        if name.text in impls:
            self.duplicate(keyword, name.text, span)
            return
        impls[name.text] = ComponentImplementation(
            name.text,
            variant,
            realizes.text,
            host.text,
            frozenset(interfaces),
            annotations,
            span,
        )

    # --- assembly -------------------------------------------------------------

    def parse_assembly(self) -> Assembly:
        start = self.expect_word("assembly")
        name = self.expect_name("an assembly name")
        self.expect_word("deploys")
        deploys = self.expect_name("a configuration name")
        clouds: dict[str, CloudDescription] = {}
        placements: dict[str, VmPlacement] = {}
        instances: dict[str, ComponentInstance] = {}

        def handle(keyword: str) -> None:
            if keyword == "cloud":
                cloud = self.parse_cloud(top_level=False)
                if cloud.name in clouds:
                    self.duplicate("cloud", cloud.name, cloud.span)
                else:
                    clouds[cloud.name] = cloud
            elif keyword == "place":
                self.parse_placement(placements)
            else:
                self.parse_instance(instances)

        self.parse_body(ASSEMBLY_ITEMS, handle)
        return Assembly(
            name.text,
            deploys.text,
            tuple(clouds.values()),
            tuple(placements.values()),
            tuple(instances.values()),
            self.span(start),
        )

    def parse_placement(self, placements: dict[str, VmPlacement]) -> None:
        start = self.expect_word("place")
        vm = self.expect_name("a vm name")
        self.expect_word("on")
        machine = self.expect_name("a machine name")
        self.expect_word("in")
        cloud = self.expect_name("a cloud name")
        span = self.span(start)
        if vm.text in placements:
            self.duplicate("placement for vm", vm.text, span)
            return
        placements[vm.text] = VmPlacement(vm.text, machine.text, cloud.text, span)

    def parse_instance(self, instances: dict[str, ComponentInstance]) -> None:
        start = self.expect_word("instance")
        name = self.expect_name("an instance name")
        self.expect_word("of")
        of = self.expect_name("an implementation name")
        state = InstanceState.RUNNING
        if self.at_word("state"):
            self.advance()
            if not self.at_word("running", "failed"):
                self.fail("expected 'running' or 'failed'")
            state = InstanceState(self.advance().text)
        span = self.span(start)
        if name.text in instances:
            self.duplicate("instance", name.text, span)
            return
        instances[name.text] = ComponentInstance(name.text, of.text, state, span)

    # --- cloud ------------------------------------------------------------------

    def parse_cloud(self, top_level: bool) -> CloudDescription:
        start = self.expect_word("cloud")
        name = self.expect_name("a cloud name")
        network: Optional[NetworkMode] = None
        scheduler: Optional[SchedulerKind] = None
        machines: dict[str, PhysicalMachine] = {}

        def handle(keyword: str) -> None:
            nonlocal network, scheduler
            token = self.advance()
            if keyword == "network":
                if not self.at_word("flat", "sdn"):
                    self.fail("expected 'flat' or 'sdn'")
                if network is not None:
                    self.duplicate("attribute", f"{name.text}.network", self.span(token))
                network = NetworkMode(self.advance().text)
            elif keyword == "scheduler":
                if not self.at_word("spread", "pack"):
                    self.fail("expected 'spread' or 'pack'")
                if scheduler is not None:
                    self.duplicate("attribute", f"{name.text}.scheduler", self.span(token))
                scheduler = SchedulerKind(self.advance().text)
            else:
                self.parse_machine(machines)

        self.parse_body(CLOUD_ITEMS, handle)
        return CloudDescription(
            name.text,
            network if network is not None else NetworkMode.FLAT,
            scheduler if scheduler is not None else SchedulerKind.SPREAD,
            tuple(machines.values()),
            self.span(start),
        )

    def parse_machine(self, machines: dict[str, PhysicalMachine]) -> None:
        start = self.tokens[self.pos - 1]  # 'machine' token consumed by handler
        name = self.expect_name("a machine name")
        attrs: dict[str, int] = {}

        def handle(keyword: str) -> None:
            token = self.advance()
            value = self.expect_positive_int(keyword)
            if keyword in attrs:
                self.duplicate("attribute", f"{name.text}.{keyword}", self.span(token))
                return
            attrs[keyword] = value

        self.parse_body(frozenset({"cpu", "ram"}), handle)
        span = self.span(start)
        if name.text in machines:
            self.duplicate("machine", name.text, span)
            return
        machines[name.text] = PhysicalMachine(
            name.text, attrs.get("cpu", 1), attrs.get("ram", 1), span
        )


def parse(text: str, file_name: str) -> ParseResult:
    """Parse `.crala` source into model documents with source spans."""
    return _Parser(text, file_name).parse_file()
