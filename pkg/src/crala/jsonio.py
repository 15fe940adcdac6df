"""JSON payload builders for machine-readable output.

Shapes mirror the schemas under docs/schemas/ one to one; the test suite
validates real outputs against those schemas.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .matchmaker import MatchResult
from .model import Assembly, Diagnostic
from .planner import DeploymentMetrics, ImpactReport
from .refinement import RefinementReport, VariabilityGraph


def diagnostic_payload(diag: Diagnostic) -> dict:
    payload: dict = {
        "severity": diag.severity.value,
        "code": diag.code,
        "message": diag.message,
    }
    if diag.span is not None:
        payload["file"] = diag.span.file
        payload["start"] = diag.span.start
        payload["end"] = diag.span.end
    return payload


def check_payload(files: Iterable[str], diagnostics: Iterable[Diagnostic]) -> dict:
    diags = list(diagnostics)
    return {
        "files": list(files),
        "diagnostics": [diagnostic_payload(d) for d in diags],
        "errors": sum(1 for d in diags if d.is_error),
        "warnings": sum(1 for d in diags if not d.is_error),
    }


def refinement_payload(report: RefinementReport) -> dict:
    return {
        "ok": report.ok,
        "bindings": [
            {"abstract": b.abstract, "concrete": b.concrete, "kind": b.kind}
            for b in report.bindings
        ],
        "diagnostics": [diagnostic_payload(d) for d in report.diagnostics],
    }


def graph_payload(graph: VariabilityGraph) -> dict:
    return {
        "nodes": [{"name": n.name, "level": n.level.value} for n in graph.nodes],
        "edges": [
            {"child": e.child, "parent": e.parent, "kind": e.kind}
            for e in graph.edges
        ],
        "micro_edges": [
            {
                "role": c.role,
                "implementation": c.implementation,
                "instance": c.instance,
            }
            for c in graph.micro_edges
        ],
    }


def match_payload(result: MatchResult) -> dict:
    return {
        "role": result.role,
        "constraints": dict(result.constraints),
        "candidates": [
            {
                "name": c.entry.name,
                "variant": c.entry.variant.value,
                "score": float(c.score),
                "matched": list(c.matched),
                "surplus": list(c.surplus),
            }
            for c in result.candidates
        ],
        "rejected": [
            {
                "name": r.entry.name,
                "missing": list(r.missing),
                "failed_constraints": list(r.failed_constraints),
            }
            for r in result.rejected
        ],
    }


def metrics_payload(metrics: DeploymentMetrics) -> dict:
    return {
        "colocated_vm_pairs": metrics.colocated_vm_pairs,
        "max_single_vm_loss": metrics.max_single_vm_loss,
        "max_single_pm_loss": metrics.max_single_pm_loss,
        "min_ram_headroom_mb": metrics.min_ram_headroom_mb,
    }


def plan_payload(
    assembly: Assembly, policy: str, metrics: DeploymentMetrics, out: Optional[str]
) -> dict:
    return {
        "assembly": assembly.name,
        "deploys": assembly.deploys,
        "policy": policy,
        "output": out,
        "placements": [
            {"vm": p.vm, "machine": p.machine, "cloud": p.cloud}
            for p in assembly.placements
        ],
        "metrics": metrics_payload(metrics),
    }


def impact_payload(report: ImpactReport) -> dict:
    return {
        "target": report.event.target,
        "target_kind": report.event.target_kind.value,
        "failed_vms": list(report.failed_vms),
        "lost_instances": list(report.lost_instances),
        "surviving_instances": list(report.surviving_instances),
        "lost_implementations": list(report.lost_implementations),
        "uncovered_roles": list(report.uncovered_roles),
    }
