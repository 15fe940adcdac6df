"""Command line interface: crala check | graph | match | plan | simulate.

Exit codes: 0 clean, 1 diagnostics with errors (or a planning failure),
2 usage or I/O errors. With --json, stdout carries exactly one JSON
document; human-readable diagnostics always go to stderr. CRALA_COLOR=never
disables ANSI colors (default: auto-detect a tty).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Iterable, Optional

from .dot import graph_to_dot
from .jsonio import (
    check_payload,
    graph_payload,
    impact_payload,
    match_payload,
    plan_payload,
)
from .matchmaker import RepositoryError, load_repository, match_role
from .model import (
    Assembly,
    CloudDescription,
    Configuration,
    Diagnostic,
    SchedulerKind,
    Specification,
)
from .parser import ParseResult, parse
from .pipeline import check_files
from .planner import (
    AmbiguousTargetError,
    FailureEvent,
    FailureTargetKind,
    FlatNetworkConflict,
    InsufficientCapacity,
    PlanningError,
    UnknownTargetError,
    evaluate_metrics,
    plan_deployment,
    simulate_failure,
)
from .printer import format_document
from .refinement import build_variability_graph, check_assembly_deploys_config
from .validate import validate_assembly, validate_configuration
from .workspace import build_workspace

OK, FINDINGS, USAGE = 0, 1, 2


def _use_color() -> bool:
    mode = os.environ.get("CRALA_COLOR", "auto")
    if mode == "never":
        return False
    return sys.stderr.isatty()


def _print_diagnostics(diagnostics: Iterable[Diagnostic]) -> None:
    color = _use_color()
    for diag in diagnostics:
        line = diag.render()
        if color:
            tint = "31" if diag.is_error else "33"
            line = f"\x1b[{tint}m{line}\x1b[0m"
        print(line, file=sys.stderr)


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE


def _parse_files(paths: list[str]) -> Optional[list[ParseResult]]:
    results = []
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return None
        results.append(parse(text, path))
    return results


def _write_out(path: str, text: str) -> bool:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return False
    return True


def _pick(documents: list, wanted: Optional[str], what: str, where: str):
    if wanted is not None:
        for doc in documents:
            if doc.name == wanted:
                return doc
        print(f"error: no {what} named {wanted!r} in {where}", file=sys.stderr)
        return None
    if len(documents) == 1:
        return documents[0]
    if not documents:
        print(f"error: {where} declares no {what}", file=sys.stderr)
    else:
        names = ", ".join(doc.name for doc in documents)
        print(
            f"error: {where} declares several {what}s ({names}); pick one",
            file=sys.stderr,
        )
    return None


# --- check -----------------------------------------------------------------


def cmd_check(args: argparse.Namespace) -> int:
    try:
        result = check_files(args.files)
    except OSError as exc:
        return _usage_error(str(exc))
    _print_diagnostics(result.diagnostics)
    if args.json:
        _emit_json(check_payload(args.files, result.diagnostics))
    else:
        errors = sum(1 for d in result.diagnostics if d.is_error)
        warnings = len(result.diagnostics) - errors
        print(
            f"{len(args.files)} file(s) checked: {errors} error(s), "
            f"{warnings} warning(s)"
        )
    return OK if result.ok else FINDINGS


# --- graph -----------------------------------------------------------------


def cmd_graph(args: argparse.Namespace) -> int:
    parsed = _parse_files(args.files)
    if parsed is None:
        return USAGE
    diagnostics = [d for result in parsed for d in result.diagnostics]
    if any(d.is_error for d in diagnostics):
        _print_diagnostics(diagnostics)
        return FINDINGS
    documents = [
        doc
        for result in parsed
        for doc in result.documents
        if not isinstance(doc, CloudDescription)
    ]
    workspace = build_workspace(documents)
    _print_diagnostics(workspace.diagnostics)
    graph = build_variability_graph(workspace)
    if args.json:
        _emit_json(graph_payload(graph))
    else:
        text = graph_to_dot(graph, micro=args.micro)
        if args.out:
            if not _write_out(args.out, text):
                return USAGE
        else:
            sys.stdout.write(text)
    return OK if workspace.ok else FINDINGS


# --- match -----------------------------------------------------------------


def _parse_constraints(pairs: list[str]) -> Optional[dict[str, str]]:
    constraints: dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            print(f"error: constraint {pair!r} is not key=value", file=sys.stderr)
            return None
        constraints[key] = value
    return constraints


def cmd_match(args: argparse.Namespace) -> int:
    parsed = _parse_files([args.spec_file])
    if parsed is None:
        return USAGE
    result = parsed[0]
    if not result.ok:
        _print_diagnostics(result.diagnostics)
        return FINDINGS
    role = None
    for doc in result.documents:
        if isinstance(doc, Specification):
            for candidate in doc.roles:
                if candidate.name == args.role:
                    role = candidate
    if role is None:
        return _usage_error(f"no role named {args.role!r} in {args.spec_file}")
    constraints = _parse_constraints(args.constraint)
    if constraints is None:
        return USAGE
    try:
        repo = load_repository(args.repo_file)
    except OSError as exc:
        return _usage_error(str(exc))
    except RepositoryError as exc:
        print(f"error: {args.repo_file}: {exc}", file=sys.stderr)
        return FINDINGS
    outcome = match_role(role, repo, constraints)
    if args.json:
        _emit_json(match_payload(outcome))
        return OK
    if not outcome.candidates:
        print(f"no candidates for role {outcome.role}")
    else:
        width = max(len(c.entry.name) for c in outcome.candidates)
        print(f"candidates for role {outcome.role}:")
        for c in outcome.candidates:
            surplus = f"  surplus: {', '.join(c.surplus)}" if c.surplus else ""
            print(
                f"  {c.entry.name:<{width}}  {c.entry.variant.value:<15} "
                f"score {float(c.score):.3f}{surplus}"
            )
    for r in outcome.rejected:
        reasons = ", ".join((*r.missing, *r.failed_constraints))
        print(f"  rejected {r.entry.name}: {reasons}", file=sys.stderr)
    return OK


# --- plan ------------------------------------------------------------------


def cmd_plan(args: argparse.Namespace) -> int:
    parsed = _parse_files([args.config_file, args.cloud_file])
    if parsed is None:
        return USAGE
    config_result, cloud_result = parsed
    if not config_result.ok or not cloud_result.ok:
        _print_diagnostics((*config_result.diagnostics, *cloud_result.diagnostics))
        return FINDINGS

    configs = [
        doc for doc in config_result.documents if isinstance(doc, Configuration)
    ]
    config = _pick(configs, args.config, "configuration", args.config_file)
    if config is None:
        return USAGE
    level_diags = validate_configuration(config)
    if any(d.is_error for d in level_diags):
        _print_diagnostics(level_diags)
        return FINDINGS
    _print_diagnostics(level_diags)  # warnings only

    clouds = [
        doc for doc in cloud_result.documents if isinstance(doc, CloudDescription)
    ] + [
        cloud
        for doc in cloud_result.documents
        if isinstance(doc, Assembly)
        for cloud in doc.clouds
    ]
    cloud = _pick(clouds, args.cloud, "cloud", args.cloud_file)
    if cloud is None:
        return USAGE

    policy = SchedulerKind(args.policy) if args.policy else cloud.scheduler
    try:
        assembly = plan_deployment(config, cloud, policy)
    except (InsufficientCapacity, FlatNetworkConflict) as exc:
        if args.json:
            detail: dict = {"kind": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, InsufficientCapacity):
                detail["vm"] = exc.vm
                detail["ram_mb"] = exc.ram_mb
            else:
                detail["cloud"] = exc.cloud
                detail["subnets"] = list(exc.subnets)
            _emit_json({"error": detail})
        print(f"error: {exc}", file=sys.stderr)
        return FINDINGS
    except PlanningError as exc:
        return _usage_error(str(exc))

    metrics = evaluate_metrics(assembly, config)
    text = format_document(assembly)
    if args.out and not _write_out(args.out, text):
        return USAGE
    if args.json:
        _emit_json(plan_payload(assembly, policy.value, metrics, args.out))
        return OK
    summary = (
        f"planned {assembly.name}: {len(assembly.placements)} placement(s), "
        f"{len(assembly.instances)} instance(s); "
        f"colocated_vm_pairs={metrics.colocated_vm_pairs} "
        f"max_single_vm_loss={metrics.max_single_vm_loss} "
        f"max_single_pm_loss={metrics.max_single_pm_loss} "
        f"min_ram_headroom_mb={metrics.min_ram_headroom_mb}"
    )
    if args.out:
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return OK


# --- simulate ---------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    parsed = _parse_files(args.files)
    if parsed is None:
        return USAGE
    diagnostics = [d for result in parsed for d in result.diagnostics]
    if any(d.is_error for d in diagnostics):
        _print_diagnostics(diagnostics)
        return FINDINGS
    documents = [
        doc
        for result in parsed
        for doc in result.documents
        if not isinstance(doc, CloudDescription)
    ]
    workspace = build_workspace(documents)
    assemblies = [doc for doc in documents if isinstance(doc, Assembly)]
    assembly = _pick(assemblies, args.assembly, "assembly", ", ".join(args.files))
    if assembly is None:
        return USAGE
    config = workspace.configuration_of(assembly)
    if config is None:
        return _usage_error(
            f"configuration {assembly.deploys!r} of {assembly.name} is not "
            f"among the given files"
        )
    consistency = [
        d
        for d in (
            *validate_assembly(assembly, config),
            *check_assembly_deploys_config(assembly, config).diagnostics,
        )
        if d.is_error
    ]
    if consistency:
        _print_diagnostics(consistency)
        return FINDINGS

    if args.kind:
        kind = (
            FailureTargetKind.VM
            if args.kind == "vm"
            else FailureTargetKind.PHYSICAL_MACHINE
        )
    else:
        is_vm = any(vm.name == args.fail for vm in config.vms)
        is_pm = "." in args.fail or any(
            machine.name == args.fail
            for cloud in assembly.clouds
            for machine in cloud.machines
        )
        if is_vm and is_pm:
            return _usage_error(
                f"{args.fail!r} names both a vm and a machine; pass --kind"
            )
        kind = FailureTargetKind.VM if is_vm else FailureTargetKind.PHYSICAL_MACHINE

    try:
        report = simulate_failure(assembly, config, FailureEvent(args.fail, kind))
    except (UnknownTargetError, AmbiguousTargetError) as exc:
        return _usage_error(str(exc))
    if args.json:
        _emit_json(impact_payload(report))
        return OK
    print(
        f"failing {kind.value} {args.fail} takes down vm(s): "
        f"{', '.join(report.failed_vms) or 'none'}"
    )
    print(f"lost instances: {', '.join(report.lost_instances) or 'none'}")
    print(f"surviving instances: {', '.join(report.surviving_instances) or 'none'}")
    print(f"lost implementations: {', '.join(report.lost_implementations) or 'none'}")
    print(f"uncovered roles: {', '.join(report.uncovered_roles) or 'none'}")
    return OK


# --- entry point --------------------------------------------------------------


def build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crala",
        description="Architecture toolchain for cloud robotic systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="parse, validate and refine documents")
    check.add_argument("files", nargs="+", metavar="FILE")
    check.add_argument("--json", action="store_true")
    check.set_defaults(func=cmd_check)

    graph = sub.add_parser("graph", help="emit the variability graph as DOT")
    graph.add_argument("files", nargs="+", metavar="FILE")
    graph.add_argument("--out", metavar="DOT_PATH")
    graph.add_argument(
        "--micro",
        action="store_true",
        help="include role/implementation/instance chains",
    )
    graph.add_argument("--json", action="store_true")
    graph.set_defaults(func=cmd_graph)

    match = sub.add_parser("match", help="match a role against a repository")
    match.add_argument("spec_file")
    match.add_argument("repo_file")
    match.add_argument("--role", required=True)
    match.add_argument(
        "--constraint", action="append", default=[], metavar="KEY=VALUE"
    )
    match.add_argument("--json", action="store_true")
    match.set_defaults(func=cmd_match)

    plan = sub.add_parser("plan", help="derive an assembly from a configuration")
    plan.add_argument("config_file")
    plan.add_argument("cloud_file")
    plan.add_argument("--policy", choices=["spread", "pack"])
    plan.add_argument("--config", help="configuration name if the file has several")
    plan.add_argument("--cloud", help="cloud name if the file has several")
    plan.add_argument("--out", metavar="CRALA_PATH")
    plan.add_argument("--json", action="store_true")
    plan.set_defaults(func=cmd_plan)

    simulate = sub.add_parser("simulate", help="simulate a vm or machine failure")
    simulate.add_argument("files", nargs="+", metavar="FILE")
    simulate.add_argument("--fail", required=True, metavar="TARGET")
    simulate.add_argument("--kind", choices=["vm", "machine"])
    simulate.add_argument("--assembly", help="assembly name if several are given")
    simulate.add_argument("--json", action="store_true")
    simulate.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_argparser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
