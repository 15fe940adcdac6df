"""Diagnostic rule catalog.

Every diagnostic emitted anywhere in the toolchain uses a code registered
here; docs/rules.md is the human-readable twin and the test suite keeps the
two in sync. Codes are stable: tools may match on them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Severity


@dataclass(frozen=True)
class Rule:
    code: str
    level: str  # parse | workspace | specification | configuration | assembly | refinement
    description: str
    severity: Severity


_E = Severity.ERROR
_W = Severity.WARNING

CATALOG: tuple[Rule, ...] = (
    Rule("E-LEX-01", "parse", "lexical error: unexpected character or unterminated string", _E),
    Rule("E-PARSE-01", "parse", "unexpected token or unknown declaration keyword", _E),
    Rule("E-PARSE-02", "parse", "duplicate declaration within its namespace", _E),
    Rule("E-WS-01", "workspace", "duplicate document name in the workspace", _E),
    Rule("E-WS-02", "workspace", "implements/deploys link targets a document of the wrong level", _E),
    Rule("E-WS-03", "workspace", "dangling implements/deploys/realizes reference", _E),
    Rule("E-CONN-01", "specification", "connection end kinds match no allowed pairing", _E),
    Rule("E-CONN-02", "specification", "protocol given on a specification-level connection", _E),
    Rule("E-CONN-03", "configuration", "abstract robot connection outside a specification", _E),
    Rule("E-CONN-04", "specification", "connection end does not resolve (unknown or ambiguous)", _E),
    Rule("E-ROLE-01", "specification", "role has no interfaces and is not annotated @incomplete", _E),
    Rule("W-SPEC-01", "specification", "role participates in no connection", _W),
    Rule("E-HOST-01", "configuration", "implementation host names no vm or robot", _E),
    Rule("E-PROTO-01", "configuration", "cross-host connection declares no protocol", _E),
    Rule("W-OS-01", "configuration", "virtual machine declares no operating system", _W),
    Rule("E-CLOUD-01", "assembly", "cloud declares no physical machine", _E),
    Rule("E-NET-01", "assembly", "flat-network cloud hosts vms from different subnets", _E),
    Rule("E-PLACE-01", "assembly", "vm of the deployed configuration has no placement", _E),
    Rule("E-PLACE-02", "assembly", "placement names an unknown machine or cloud", _E),
    Rule("E-PLACE-03", "assembly", "placement names a vm unknown to the configuration", _E),
    Rule("E-CAP-01", "assembly", "placed vm ram exceeds the machine's capacity", _E),
    Rule("E-INST-01", "assembly", "implementation has no instance", _E),
    Rule("E-REF-01", "refinement", "component role has no realizing implementation", _E),
    Rule("E-REF-02", "refinement", "implementation interfaces do not cover its role's interfaces", _E),
    Rule("E-REF-03", "refinement", "concept robot unrealized or sensor/actuator kinds uncovered", _E),
    Rule("E-REF-04", "refinement", "abstract robot connection has no realization", _E),
    Rule("E-REF-05", "refinement", "specification connection has no configuration counterpart", _E),
    Rule("E-REF-06", "refinement", "instance references an implementation absent from the configuration", _E),
)

_BY_CODE = {rule.code: rule for rule in CATALOG}

assert len(_BY_CODE) == len(CATALOG), "duplicate rule codes"


def rule(code: str) -> Rule:
    return _BY_CODE[code]


def is_cataloged(code: str) -> bool:
    return code in _BY_CODE
