"""Static read sets, the array-level dependency graph and its classification."""
from __future__ import annotations

from dataclasses import dataclass

from miso.frontend import ast
from miso.frontend.program import TypedProgram


@dataclass(frozen=True)
class CellReads:
    arrays: frozenset[str]
    self_read: bool


ReadSet = dict  # cell type name -> CellReads


def extract_read_set(program: TypedProgram) -> ReadSet:
    """Arrays named by ArrayRead in each transition, plus a SelfField flag."""
    out = {}
    for name, cell in program.cell_types.items():
        arrays, self_read = set(), False
        for stmt in cell.transition:
            for node in ast.walk_expr(stmt.expr):
                if isinstance(node, ast.ArrayRead):
                    arrays.add(node.array)
                elif isinstance(node, ast.SelfField):
                    self_read = True
        out[name] = CellReads(frozenset(arrays), self_read)
    return out


@dataclass(frozen=True)
class DepGraph:
    """Directed reader -> provider edges over arrays (declaration order ids)."""
    nodes: tuple[str, ...]
    labels: dict
    edges: frozenset[tuple[str, str]]

    def order(self, name: str) -> int:
        return self.nodes.index(name)

    def providers(self, name: str) -> list[str]:
        return sorted((p for r, p in self.edges if r == name), key=self.order)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges, key=lambda e: (self.order(e[0]), self.order(e[1])))

    def neighbors(self, name: str) -> set[str]:
        """Undirected neighbourhood (providers and consumers, self included if looped)."""
        out = set()
        for r, p in self.edges:
            if r == name:
                out.add(p)
            if p == name:
                out.add(r)
        return out


def build_dep_graph(program: TypedProgram, read_set: ReadSet | None = None) -> DepGraph:
    if read_set is None:
        read_set = extract_read_set(program)
    edges = set()
    labels = {}
    for a in program.arrays:
        labels[a.name] = f"{a.name}:{a.cell_type}[{a.size}]"
        reads = read_set[a.cell_type]
        edges.update((a.name, p) for p in reads.arrays)
        if reads.self_read:
            edges.add((a.name, a.name))
    return DepGraph(program.array_names, labels, frozenset(edges))


@dataclass(frozen=True)
class ParallelReport:
    components: tuple[tuple[str, ...], ...]
    simd_groups: tuple[tuple[str, int], ...]  # (cell type, total instances)
    mimd_count: int

    def summary(self) -> str:
        lines = [f"arrays: {sum(len(c) for c in self.components)}",
                 f"weak components: {len(self.components)}"]
        for i, comp in enumerate(self.components):
            lines.append(f"  component {i}: {', '.join(comp)}")
        lines.append("SIMD groups:")
        lines.extend(f"  {cell} x {n}" for cell, n in self.simd_groups)
        lines.append(f"MIMD cell types with transitions: {self.mimd_count}")
        return "\n".join(lines)


def weak_components(graph: DepGraph) -> list[list[str]]:
    parent = {n: n for n in graph.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r, p in graph.edges:
        a, b = find(r), find(p)
        if a != b:
            # keep the earliest-declared array as root for stable output
            if graph.order(a) < graph.order(b):
                parent[b] = a
            else:
                parent[a] = b
    groups: dict[str, list[str]] = {}
    for n in graph.nodes:
        groups.setdefault(find(n), []).append(n)
    return sorted(groups.values(), key=lambda g: graph.order(g[0]))


def classify(graph: DepGraph, program: TypedProgram) -> ParallelReport:
    comps = tuple(tuple(c) for c in weak_components(graph))
    totals: dict[str, int] = {}
    for a in program.arrays:
        totals[a.cell_type] = totals.get(a.cell_type, 0) + a.size
    mimd = sum(1 for name in totals if program.cell_types[name].transition)
    return ParallelReport(comps, tuple(totals.items()), mimd)


def emit_dot(graph: DepGraph) -> str:
    """Deterministic GraphViz text: nodes then edges, both in array order."""
    lines = ["digraph miso {"]
    for n in graph.nodes:
        lines.append(f'  "{n}" [label="{graph.labels[n]}"];')
    for r, p in graph.sorted_edges():
        lines.append(f'  "{r}" -> "{p}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
