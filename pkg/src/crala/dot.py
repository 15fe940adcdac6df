"""Graphviz DOT emission for variability graphs.

Output is deterministic: nodes grouped into one cluster per level, sorted
by name; edges sorted; no timestamps. The macro view shows one node per
document with dashed implements/deploys edges; `micro=True` adds the
role -> implementation -> instance chains as ellipse nodes with solid edges.
"""

from __future__ import annotations

from .model import Level
from .refinement import VariabilityGraph

_LEVELS = (Level.SPECIFICATION, Level.CONFIGURATION, Level.ASSEMBLY)


def _quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def graph_to_dot(graph: VariabilityGraph, micro: bool = False) -> str:
    lines = ["digraph variability {", "  rankdir=BT;", "  node [shape=box];"]

    micro_nodes: dict[Level, list[str]] = {level: [] for level in _LEVELS}
    micro_lines: list[str] = []
    if micro:
        doc_level = {node.name: node.level for node in graph.nodes}

        def owner_level(qualified: str) -> Level:
            return doc_level[qualified.split(".", 1)[0]]

        seen: set[str] = set()
        edges: set[tuple[str, str]] = set()
        for chain in graph.micro_edges:
            for qualified in (chain.role, chain.implementation, chain.instance):
                if qualified is not None and qualified not in seen:
                    seen.add(qualified)
                    micro_nodes[owner_level(qualified)].append(qualified)
            edges.add((chain.implementation, chain.role))
            if chain.instance is not None:
                edges.add((chain.instance, chain.implementation))
        for level in _LEVELS:
            micro_nodes[level].sort()
        micro_lines = [
            f"  {_quote(child)} -> {_quote(parent)};"
            for child, parent in sorted(edges)
        ]

    for level in _LEVELS:
        names = sorted(node.name for node in graph.nodes if node.level is level)
        extras = micro_nodes[level]
        if not names and not extras:
            continue
        lines.append(f"  subgraph cluster_{level.value} {{")
        lines.append(f'    label="{level.value}";')
        for name in names:
            lines.append(f"    {_quote(name)};")
        for name in extras:
            lines.append(f"    {_quote(name)} [shape=ellipse];")
        lines.append("  }")

    for edge in sorted(graph.edges, key=lambda e: (e.child, e.parent)):
        lines.append(
            f"  {_quote(edge.child)} -> {_quote(edge.parent)} "
            f'[style=dashed, label="{edge.kind}"];'
        )
    lines.extend(micro_lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
