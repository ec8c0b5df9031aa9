"""Finite multigraphs: components, contractions, partitions, flows, tree packing."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    Disconnected,
    GroundSetMismatch,
    PartitionMismatch,
    SameVertex,
    TooLarge,
    UnknownEdge,
    UnknownVertex,
)

CUT_CONDITION_LIMIT = 10

_DIGITS = re.compile(r"(\d+)")


def natkey(s: str) -> tuple:
    """Sort key that orders ``u2`` before ``u10``."""
    parts = _DIGITS.split(str(s))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def sort_ids(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=natkey)


def set_key(s: Iterable[str]) -> tuple:
    """Canonical key for a vertex set: sorted natural keys."""
    return tuple(natkey(v) for v in sort_ids(s))


def min_id(ids: Iterable[str]) -> str:
    return min(ids, key=natkey)


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def other(self, x: str) -> str:
        return self.v if x == self.u else self.u


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Immutable multigraph; vertices and edges kept in natural-sorted order."""

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    labels: Mapping[str, frozenset] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str, str] | Edge],
        labels: Mapping[str, Iterable[str]] | None = None,
    ) -> "Multigraph":
        vs = tuple(sort_ids(set(vertices)))
        vset = set(vs)
        es: dict[str, Edge] = {}
        for e in edges:
            if not isinstance(e, Edge):
                e = Edge(str(e[0]), str(e[1]), str(e[2]))
            if e.u not in vset or e.v not in vset:
                raise UnknownVertex(f"edge {e.id} has an endpoint outside the vertex set")
            if e.id in es:
                raise UnknownEdge(f"duplicate edge id {e.id}")
            es[e.id] = e
        lab = {k: frozenset(v) for k, v in (labels or {}).items()}
        return cls(vs, tuple(es[k] for k in sort_ids(es)), lab)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (self.vertices, self.edges, dict(self.labels)) == (
            other.vertices,
            other.edges,
            dict(other.labels),
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def incidence(self) -> dict[str, list[Edge]]:
        inc: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e.u].append(e)
            if not e.is_loop:
                inc[e.v].append(e)
        return inc

    @cached_property
    def adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.vertices}
        for e in self.edges:
            if not e.is_loop:
                adj[e.u].add(e.v)
                adj[e.v].add(e.u)
        return {v: frozenset(s) for v, s in adj.items()}

    def degree(self, v: str) -> int:
        """Degree with loops counted twice."""
        return sum(2 if e.is_loop else 1 for e in self.incidence[v])

    def __contains__(self, v: object) -> bool:
        return v in self.vertex_set

    def subgraph(self, keep: Iterable[str]) -> "Multigraph":
        ks = set(keep)
        return Multigraph.build(
            ks, [e for e in self.edges if e.u in ks and e.v in ks]
        )

    def without_edges(self, drop: Iterable[str]) -> "Multigraph":
        ds = set(drop)
        return Multigraph(
            self.vertices, tuple(e for e in self.edges if e.id not in ds), self.labels
        )

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        return len(components(self, ())) == 1

    def is_subgraph_of(self, other: "Multigraph") -> bool:
        om = other.edge_map
        return self.vertex_set <= other.vertex_set and all(
            om.get(e.id) == e for e in self.edges
        )

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        out: dict = {
            "vertices": list(self.vertices),
            "edges": [[e.id, e.u, e.v] for e in self.edges],
        }
        if self.labels:
            out["labels"] = {k: sort_ids(self.labels[k]) for k in sort_ids(self.labels)}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Multigraph":
        return cls.build(
            [str(v) for v in data["vertices"]],
            [tuple(str(x) for x in e) for e in data["edges"]],
            data.get("labels"),
        )

    def to_dot(self, name: str = "G", edge_colors: Mapping[str, str] | None = None) -> str:
        lines = [f'graph "{name}" {{']
        for v in self.vertices:
            if v in self.labels and self.labels[v] != frozenset({v}):
                body = ",".join(sort_ids(self.labels[v]))
                lines.append(f'  "{v}" [shape=box, label="{{{body}}}"];')
            else:
                lines.append(f'  "{v}";')
        for e in self.edges:
            attrs = f'label="{e.id}"'
            if edge_colors and e.id in edge_colors:
                attrs += f', color="{edge_colors[e.id]}"'
            lines.append(f'  "{e.u}" -- "{e.v}" [{attrs}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class VertexPartition:
    """Blocks sorted by their minimal element."""

    blocks: tuple[frozenset[str], ...]

    @classmethod
    def of(cls, blocks: Iterable[Iterable[str]]) -> "VertexPartition":
        bs = [frozenset(b) for b in blocks]
        if any(not b for b in bs):
            raise PartitionMismatch("empty block")
        seen: set[str] = set()
        for b in bs:
            if seen & b:
                raise PartitionMismatch("blocks overlap")
            seen |= b
        return cls(tuple(sorted(bs, key=lambda b: natkey(min_id(b)))))

    @classmethod
    def singletons(cls, ground: Iterable[str]) -> "VertexPartition":
        return cls.of([v] for v in ground)

    @property
    def ground(self) -> frozenset[str]:
        return frozenset().union(*self.blocks) if self.blocks else frozenset()

    def block_of(self) -> dict[str, int]:
        return {v: i for i, b in enumerate(self.blocks) for v in b}

    def refines(self, other: "VertexPartition") -> bool:
        """True when every block of ``self`` sits inside a block of ``other``."""
        where = other.block_of()
        return self.ground == other.ground and all(
            len({where[v] for v in b}) == 1 for b in self.blocks
        )

    def __len__(self) -> int:
        return len(self.blocks)

    def to_json(self) -> list[list[str]]:
        return [sort_ids(b) for b in self.blocks]


def refine(p: VertexPartition, q: VertexPartition) -> VertexPartition:
    """Coarsest common refinement."""
    if p.ground != q.ground:
        raise GroundSetMismatch("partitions have different ground sets")
    out = [a & b for a in p.blocks for b in q.blocks if a & b]
    return VertexPartition.of(out)


def _check_partition(g: Multigraph, p: VertexPartition) -> dict[str, int]:
    if p.ground != g.vertex_set:
        raise PartitionMismatch("partition does not cover the vertex set exactly")
    return p.block_of()


def set_partitions(items: Sequence[str]) -> Iterator[list[list[str]]]:
    """All set partitions (restricted growth order)."""
    items = list(items)
    if not items:
        yield []
        return

    def rec(i: int, blocks: list[list[str]]) -> Iterator[list[list[str]]]:
        if i == len(items):
            yield [list(b) for b in blocks]
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


# ---------------------------------------------------------------------------
# components and contractions


def components(g: Multigraph, x: Iterable[str]) -> list[tuple[frozenset[str], frozenset[str]]]:
    """Components of ``g - x`` with their neighbourhoods in ``x``."""
    xs = frozenset(x)
    if not xs <= g.vertex_set:
        raise UnknownVertex("separator contains unknown vertices", missing=sort_ids(xs - g.vertex_set))
    adj = g.adjacency
    seen: set[str] = set()
    out = []
    for s in g.vertices:
        if s in xs or s in seen:
            continue
        comp = {s}
        nb: set[str] = set()
        queue = deque([s])
        seen.add(s)
        while queue:
            a = queue.popleft()
            for b in adj[a]:
                if b in xs:
                    nb.add(b)
                elif b not in seen:
                    seen.add(b)
                    comp.add(b)
                    queue.append(b)
        out.append((frozenset(comp), frozenset(nb)))
    return out


def contract_partition(g: Multigraph, p: VertexPartition, names: Mapping[int, str] | None = None) -> Multigraph:
    """One vertex per block, keeping only cross-edges.

    Block vertices are named by their minimal member unless ``names`` maps
    block indices to explicit ids.
    """
    where = _check_partition(g, p)
    name = [names[i] if names and i in names else min_id(b) for i, b in enumerate(p.blocks)]
    edges = [
        Edge(e.id, name[where[e.u]], name[where[e.v]])
        for e in g.edges
        if where[e.u] != where[e.v]
    ]
    labels = {name[i]: b for i, b in enumerate(p.blocks)}
    return Multigraph.build(name, edges, labels)


def contract_by_edges(g: Multigraph, f: Iterable[str]) -> Multigraph:
    """Contract the components of ``g - f``; non-cross edges become loops."""
    fs = set(f)
    unknown = fs - set(g.edge_map)
    if unknown:
        raise UnknownEdge("edges not in graph", edges=sort_ids(unknown))
    rest = g.without_edges(fs)
    blocks = [c for c, _ in components(rest, ())]
    p = VertexPartition.of(blocks)
    where = p.block_of()
    name = [min_id(b) for b in p.blocks]
    edges = [Edge(e.id, name[where[e.u]], name[where[e.v]]) for e in g.edges]
    return Multigraph.build(name, edges, {name[i]: b for i, b in enumerate(p.blocks)})


def cross_edge_count(g: Multigraph, p: VertexPartition) -> int:
    where = _check_partition(g, p)
    return sum(1 for e in g.edges if where[e.u] != where[e.v])


def cut_violation(g: Multigraph, k: int) -> VertexPartition | None:
    """A partition with fewer than k(|P|-1) cross-edges, or None."""
    n = len(g.vertices)
    if n > CUT_CONDITION_LIMIT:
        raise TooLarge(f"cut_condition is limited to {CUT_CONDITION_LIMIT} vertices", vertices=n)
    index = {v: i for i, v in enumerate(g.vertices)}
    ends = [(index[e.u], index[e.v]) for e in g.edges if not e.is_loop]
    for blocks in set_partitions(g.vertices):
        where = [0] * n
        for bi, b in enumerate(blocks):
            for v in b:
                where[index[v]] = bi
        cross = sum(1 for a, b in ends if where[a] != where[b])
        if cross < k * (len(blocks) - 1):
            return VertexPartition.of(blocks)
    return None


def cut_condition(g: Multigraph, k: int) -> bool:
    """Every partition P has at least k(|P|-1) cross-edges (brute force)."""
    return cut_violation(g, k) is None


# ---------------------------------------------------------------------------
# spanning-tree packing by matroid partitioning


class _Forest:
    """Edge set of a forest with path queries by DFS."""

    def __init__(self) -> None:
        self.edges: dict[str, Edge] = {}
        self.adj: dict[str, dict[str, Edge]] = {}

    def add(self, e: Edge) -> None:
        self.edges[e.id] = e
        self.adj.setdefault(e.u, {})[e.id] = e
        self.adj.setdefault(e.v, {})[e.id] = e

    def remove(self, e: Edge) -> None:
        del self.edges[e.id]
        del self.adj[e.u][e.id]
        del self.adj[e.v][e.id]

    def path(self, a: str, b: str) -> list[Edge] | None:
        """Edges of the forest path from a to b, or None if disconnected."""
        if a == b:
            return []
        prev: dict[str, Edge | None] = {a: None}
        queue = deque([a])
        while queue:
            x = queue.popleft()
            for e in self.adj.get(x, {}).values():
                y = e.other(x)
                if y not in prev:
                    prev[y] = e
                    if y == b:
                        out = []
                        while prev[y] is not None:
                            out.append(prev[y])
                            y = prev[y].other(y)
                        return out
                    queue.append(y)
        return None


def _insert(forests: list[_Forest], e: Edge) -> bool:
    """Augment the forest family by e via a shortest exchange path."""
    label: dict[str, tuple[Edge, int] | None] = {e.id: None}
    emap = {e.id: e}
    queue = deque([e])
    while queue:
        f = queue.popleft()
        for i, forest in enumerate(forests):
            if f.id in forest.edges:
                continue
            cycle = forest.path(f.u, f.v)
            if cycle is None:
                forest.add(f)
                g = f
                while label[g.id] is not None:
                    prev, j = label[g.id]
                    forests[j].remove(g)
                    forests[j].add(prev)
                    g = prev
                return True
            for h in cycle:
                if h.id not in label:
                    label[h.id] = (f, i)
                    emap[h.id] = h
                    queue.append(h)
    return False


def forest_partition(g: Multigraph, k: int) -> list[list[Edge]]:
    """k edge-disjoint forests of maximum total size (matroid union)."""
    forests = [_Forest() for _ in range(k)]
    for e in g.edges:
        if not e.is_loop:
            _insert(forests, e)
    return [sorted(f.edges.values(), key=lambda x: natkey(x.id)) for f in forests]


def pack_trees(g: Multigraph, k: int) -> list[list[str]] | None:
    """k edge-disjoint spanning trees as edge-id lists, or None when absent."""
    if k < 1:
        raise ValueError("k must be positive")
    if not g.is_connected():
        raise Disconnected("pack_trees needs a connected multigraph")
    need = len(g.vertices) - 1
    forests = forest_partition(g, k)
    if any(len(f) != need for f in forests):
        return None
    trees = [[e.id for e in f] for f in forests]
    return sorted(trees, key=lambda t: [natkey(x) for x in t])


def is_spanning_tree(g: Multigraph, edge_ids: Iterable[str]) -> bool:
    ids = list(edge_ids)
    if len(ids) != len(g.vertices) - 1 or len(set(ids)) != len(ids):
        return False
    parent = {v: v for v in g.vertices}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in ids:
        e = g.edge_map.get(i)
        if e is None:
            return False
        a, b = find(e.u), find(e.v)
        if a == b:
            return False
        parent[a] = b
    return True


# ---------------------------------------------------------------------------
# flows


class FlowNetwork:
    """Unit-ish capacity network solved by BFS augmentation."""

    def __init__(self) -> None:
        self.cap: dict[tuple, int] = {}
        self.adj: dict[object, set] = {}

    def add(self, a: object, b: object, c: int) -> None:
        self.cap[(a, b)] = self.cap.get((a, b), 0) + c
        self.cap.setdefault((b, a), 0)
        self.adj.setdefault(a, set()).add(b)
        self.adj.setdefault(b, set()).add(a)

    def maxflow(self, s: object, t: object, limit: int | None = None) -> int:
        flow = 0
        order = {n: i for i, n in enumerate(sorted(self.adj, key=repr))}
        while limit is None or flow < limit:
            prev = {s: None}
            queue = deque([s])
            while queue and t not in prev:
                a = queue.popleft()
                for b in sorted(self.adj[a], key=order.__getitem__):
                    if b not in prev and self.cap[(a, b)] > 0:
                        prev[b] = a
                        queue.append(b)
            if t not in prev:
                break
            push = BIG
            b = t
            while prev[b] is not None:
                push = min(push, self.cap[(prev[b], b)])
                b = prev[b]
            if push >= BIG:
                return BIG
            b = t
            while prev[b] is not None:
                a = prev[b]
                self.cap[(a, b)] -= push
                self.cap[(b, a)] += push
                b = a
            flow += push
        return flow

    def reachable(self, s: object) -> set:
        seen = {s}
        queue = deque([s])
        while queue:
            a = queue.popleft()
            for b in self.adj[a]:
                if b not in seen and self.cap[(a, b)] > 0:
                    seen.add(b)
                    queue.append(b)
        return seen


BIG = 10**9


def vertex_flow(
    g: Multigraph,
    sources: Iterable[str],
    sinks: Iterable[str],
    uncuttable: Iterable[str] = (),
    drop_edges: Iterable[str] = (),
    limit: int | None = None,
    unit_sinks: bool = False,
) -> tuple[int, frozenset[str]]:
    """Max number of vertex-disjoint source-sink paths and a minimum cut.

    Sources, sinks and ``uncuttable`` vertices have unbounded capacity; the
    returned cut is the one closest to the sources.  With ``unit_sinks`` each
    sink absorbs at most one path, which counts fans.
    """
    src, snk = frozenset(sources), frozenset(sinks)
    hard = src | frozenset(uncuttable) | (frozenset() if unit_sinks else snk)
    dropped = set(drop_edges)
    net = FlowNetwork()
    for v in g.vertices:
        net.add(("i", v), ("o", v), BIG if v in hard else 1)
    for e in g.edges:
        if e.is_loop or e.id in dropped:
            continue
        net.add(("o", e.u), ("i", e.v), BIG)
        net.add(("o", e.v), ("i", e.u), BIG)
    for v in src:
        net.add("S", ("i", v), BIG)
    for v in snk:
        net.add(("o", v), "T", BIG)
    if src & snk:
        return BIG, frozenset()
    value = net.maxflow("S", "T", limit)
    side = net.reachable("S")
    cut = frozenset(v for v in g.vertices if ("i", v) in side and ("o", v) not in side)
    return value, cut


def edge_flow(
    g: Multigraph,
    sources: Iterable[str],
    sinks: Iterable[str],
    limit: int | None = None,
) -> tuple[int, frozenset[str], frozenset[str]]:
    """Max edge-disjoint paths, a minimum edge cut and its source side."""
    src, snk = frozenset(sources), frozenset(sinks)
    net = FlowNetwork()
    for v in g.vertices:
        net.adj.setdefault(("v", v), set())
    for e in g.edges:
        if e.is_loop:
            continue
        # each undirected edge as a gadget so parallel edges stay distinct
        net.add(("v", e.u), ("e", e.id), 1)
        net.add(("e", e.id), ("v", e.v), 1)
        net.add(("v", e.v), ("f", e.id), 1)
        net.add(("f", e.id), ("v", e.u), 1)
    for v in src:
        net.add("S", ("v", v), BIG)
    for v in snk:
        net.add(("v", v), "T", BIG)
    if src & snk:
        return BIG, frozenset(), frozenset()
    value = net.maxflow("S", "T", limit)
    side = net.reachable("S")
    vside = frozenset(v for v in g.vertices if ("v", v) in side)
    cut = frozenset(
        e.id for e in g.edges if not e.is_loop and ((e.u in vside) != (e.v in vside))
    )
    return value, cut, vside


def local_connectivity(g: Multigraph, a: str, b: str) -> tuple[int, int]:
    """(max internally disjoint a-b paths, min a-b edge cut)."""
    if a == b:
        raise SameVertex("endpoints coincide")
    for v in (a, b):
        if v not in g:
            raise UnknownVertex(f"unknown vertex {v}")
    direct = sum(1 for e in g.edges if {e.u, e.v} == {a, b})
    rest = g.without_edges(e.id for e in g.edges if {e.u, e.v} == {a, b})
    kappa, _ = vertex_flow(rest, [a], [b])
    lam, _, _ = edge_flow(g, [a], [b])
    return kappa + direct, lam


def edge_disjoint_paths(g: Multigraph, a: str, b: str, limit: int | None = None) -> list[list[str]]:
    """Greedy shortest-path extraction of edge-disjoint a-b paths (vertex lists)."""
    used: set[str] = set()
    out: list[list[str]] = []
    while limit is None or len(out) < limit:
        prev: dict[str, tuple[str, str] | None] = {a: None}
        queue = deque([a])
        while queue and b not in prev:
            x = queue.popleft()
            for e in g.incidence[x]:
                if e.is_loop or e.id in used:
                    continue
                y = e.other(x)
                if y not in prev:
                    prev[y] = (x, e.id)
                    queue.append(y)
        if b not in prev:
            break
        path = [b]
        y = b
        while prev[y] is not None:
            x, eid = prev[y]
            used.add(eid)
            path.append(x)
            y = x
        out.append(path[::-1])
    return out


def all_pairs(items: Sequence[str]) -> Iterator[tuple[str, str]]:
    return combinations(items, 2)
