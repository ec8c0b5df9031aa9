"""Auxiliary edges, V* extraction, star-expansion trees and the limit tree-packing pipeline."""

from __future__ import annotations

import inspect
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from math import isqrt
from typing import Iterable, Sequence

from .errors import (
    CutConditionFailed,
    EnumerationIncomplete,
    NotEquivalent,
    ThreadEmpty,
    UnknownVertex,
)
from .invsys import InverseSystem, gf_level, thread_search
from .multigraph import (
    CUT_CONDITION_LIMIT,
    Edge,
    Multigraph,
    components,
    cut_violation,
    is_spanning_tree,
    natkey,
    pack_trees,
    sort_ids,
)
from .presentation import Presentation
from .structure import enumerate_crit

PACKING_CAP = 200
TREE_COLORS = ("red", "blue", "darkgreen", "orange", "purple", "brown")


def end_node(end_id: str) -> str:
    return f"ω:{end_id}"


@dataclass(frozen=True)
class AuxEdge:
    id: str
    u: str
    v: str
    kind: str  # "end" or "crit"
    label: tuple[str, ...]

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, "ends": [self.u, self.v], "label": list(self.label)}


@dataclass(frozen=True)
class AuxGraph:
    base: Multigraph
    level: int
    end_edges: tuple[AuxEdge, ...]
    crit_edges: tuple[AuxEdge, ...]
    certified: bool

    @property
    def aux_edges(self) -> tuple[AuxEdge, ...]:
        return self.end_edges + self.crit_edges

    def combined(self) -> Multigraph:
        """Level graph plus end nodes and auxiliary edges."""
        ends = sort_ids({e.v for e in self.end_edges})
        edges = list(self.base.edges) + [Edge(a.id, a.u, a.v) for a in self.aux_edges]
        return Multigraph.build(list(self.base.vertices) + ends, edges)

    def aux_components(self) -> list[frozenset[str]]:
        """Vertex sets joined by auxiliary edges (two or more members)."""
        touched = sort_ids({a.u for a in self.aux_edges} | {a.v for a in self.aux_edges})
        g = Multigraph.build(touched, [Edge(a.id, a.u, a.v) for a in self.aux_edges])
        comps = [c for c, _ in components(g, ()) if len(c) > 1]
        return sorted(comps, key=lambda c: natkey(min(c, key=natkey)))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "certified": self.certified,
            "end_edges": [a.to_json() for a in self.end_edges],
            "crit_edges": [a.to_json() for a in self.crit_edges],
            "components": [sort_ids(c) for c in self.aux_components()],
        }


def _label(y: Iterable[str]) -> str:
    return "{" + ",".join(sort_ids(y)) + "}"


def aux_graph(p: Presentation, n: int, k: int = 2) -> AuxGraph:
    lg = p.truncate(n)
    g = lg.graph
    cert = p.certificate()
    end_edges: list[AuxEdge] = []
    if cert is not None:
        crit = cert.crit.within(g.vertex_set)
        for end in cert.ends_at(n):
            for u in g.vertices:
                if (end.dominators is not None and u in end.dominators) or end.dominated_by(u):
                    end_edges.append(AuxEdge(f"end:{u}~{end.id}", u, end_node(end.id), "end", (end.id,)))
    else:
        crit = [w.y for w in enumerate_crit(p, 3, n, k)]
    crit_edges = [
        AuxEdge(f"crit:{a}~{b}@{_label(y)}", a, b, "crit", tuple(sort_ids(y)))
        for y in crit
        for a, b in combinations(sort_ids(y), 2)
    ]
    return AuxGraph(g, n, tuple(end_edges), tuple(crit_edges), cert is not None)


# ---------------------------------------------------------------------------
# V*


@dataclass(frozen=True)
class VStar:
    order: tuple[str, ...]
    x: str
    y: str
    depth: int
    sampled: int
    threshold: int
    chain: tuple[tuple[str, ...], ...]
    thread: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict:
        return {
            "order": list(self.order),
            "x": self.x,
            "y": self.y,
            "depth": self.depth,
            "paths_sampled": self.sampled,
            "threshold": self.threshold,
            "thread": [list(t) for t in self.thread],
        }


def vstar_sample_size(d: int) -> int:
    return 4 * (d + 2)


def vstar(p: Presentation, x: str, y: str, d: int) -> VStar:
    """Extract the linear order on V* from order types of sampled x-y paths."""
    cert = p.certificate()
    if cert is None:
        raise NotEquivalent("vstar needs a certified path family", x=x, y=y)
    if not cert.sim(x, y):
        raise NotEquivalent(f"{x} and {y} are finitely separable", x=x, y=y)
    gen = cert.path_family(x, y)
    if gen is None:
        raise ThreadEmpty("no certified path family for this pair", x=x, y=y)
    m = vstar_sample_size(d)
    threshold = isqrt(m - 1) + 1
    chain = [p.truncate(i).graph.vertex_set for i in range(d + 1)]
    # generators that accept ``within`` return only the trace on that set
    takes_within = "within" in inspect.signature(gen).parameters
    paths = [gen(i, within=chain[-1]) if takes_within else gen(i) for i in range(m)]

    def types(i: int) -> list[tuple[str, ...]]:
        xs = chain[i]
        counts = Counter(tuple(v for v in path if v in xs) for path in paths)
        return [t for t, c in counts.items() if c >= threshold]

    sys = InverseSystem(
        range(d + 1),
        lambda a, b: a <= b,
        types,
        lambda j, i, t: tuple(v for v in t if v in chain[i]),
        key=lambda t: (len(t), [natkey(v) for v in t]),
        name="L",
    )
    thread = thread_search(sys, list(range(d + 1)))
    if thread is None:
        raise ThreadEmpty("no compatible order types over the sampled chain", depth=d, threshold=threshold)
    top = thread.points[-1][1]
    return VStar(
        tuple(top), x, y, d, m, threshold,
        tuple(tuple(sort_ids(c)) for c in chain),
        tuple(pt for _, pt in thread.points),
    )


@dataclass(frozen=True)
class Gap:
    u: str
    t: str
    kind: str  # "EndGap", "CritGap" or "Unknown"
    witness: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"pair": [self.u, self.t], "kind": self.kind, "witness": list(self.witness)}


def classify_gaps(p: Presentation, vs: VStar, n: int) -> list[Gap]:
    """Explain each consecutive pair of V* by a common critical set or dominated end."""
    cert = p.certificate()
    lg = p.truncate(n)
    g = lg.graph
    out = []
    for u, t in zip(vs.order, vs.order[1:]):
        for v in (u, t):
            if v not in g:
                raise UnknownVertex(f"{v} absent at level {n}", vertex=v)
        gap: Gap | None = None
        if cert is not None:
            crit = [y for y in cert.crit.within(g.vertex_set) if u in y and t in y]
            if crit:
                gap = Gap(u, t, "CritGap", tuple(sort_ids(crit[0])))
            else:
                for end in cert.ends_at(n):
                    if all((end.dominators is not None and v in end.dominators) or end.dominated_by(v) for v in (u, t)):
                        gap = Gap(u, t, "EndGap", (end.id,))
                        break
        if gap is None and t not in g.adjacency[u]:
            gap = Gap(u, t, "Unknown")
        if gap is not None:
            out.append(gap)
    return out


# ---------------------------------------------------------------------------
# star-expansion trees


@dataclass(frozen=True)
class ATSTLevel:
    step: int
    nodes: tuple[frozenset[str], ...]
    edges: tuple[tuple[str, frozenset[str], frozenset[str]], ...]

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "nodes": [sort_ids(b) for b in self.nodes],
            "edges": [{"id": e, "ends": [sort_ids(a), sort_ids(b)]} for e, a, b in self.edges],
        }


def _aux_blocks(aux: Sequence[AuxEdge], vertices: frozenset[str]) -> list[frozenset[str]]:
    g = Multigraph.build(
        sort_ids(vertices),
        [Edge(a.id, a.u, a.v) for a in aux if a.u in vertices and a.v in vertices],
    )
    return [c for c, _ in components(g, ())]


def atst_levels(aux: AuxGraph, component: Iterable[str], enumeration: Sequence[str], m: int) -> list[ATSTLevel]:
    """Trees T_0..T_m: each step splits the block of u_{n-1} into a star centred at {u_{n-1}}."""
    comp = frozenset(component)
    enum = list(enumeration)
    if len(enum) < m or len(set(enum[:m])) != m:
        raise EnumerationIncomplete("enumeration shorter than the number of steps", needed=m, given=len(enum))
    outside = [u for u in enum[:m] if u not in comp]
    if outside:
        raise EnumerationIncomplete("enumeration leaves the component", vertices=outside)
    edges_in = [a for a in aux.aux_edges if a.u in comp and a.v in comp]
    edges_in.sort(key=lambda a: natkey(a.id))
    nodes: list[frozenset[str]] = [comp]
    tree: list[tuple[str, frozenset[str], frozenset[str]]] = []
    out = [ATSTLevel(0, tuple(nodes), ())]
    for step in range(1, m + 1):
        u = enum[step - 1]
        host = next(b for b in nodes if u in b)
        if host == frozenset({u}):
            out.append(ATSTLevel(step, tuple(nodes), tuple(tree)))
            continue
        pieces = _aux_blocks(edges_in, host - {u})
        centre = frozenset({u})
        new_nodes = [b for b in nodes if b != host] + [centre] + pieces
        where = {v: b for b in [centre] + pieces for v in b}
        lookup = {a.id: a for a in edges_in}

        def relocate(node: frozenset[str], eid: str) -> frozenset[str]:
            if node != host:
                return node
            e = lookup[eid]
            return where[e.u if e.u in host else e.v]

        moved = [(eid, relocate(a, eid), relocate(b, eid)) for eid, a, b in tree]
        for piece in sorted(pieces, key=lambda c: natkey(min(c, key=natkey))):
            link = next(
                (a for a in edges_in if (a.u == u and a.v in piece) or (a.v == u and a.u in piece)),
                None,
            )
            if link is None:
                raise EnumerationIncomplete("a block has no auxiliary edge to the new centre", vertex=u)
            moved.append((link.id, centre, piece))
        nodes, tree = new_nodes, moved
        out.append(ATSTLevel(step, tuple(sorted(nodes, key=lambda c: natkey(min(c, key=natkey)))), tuple(tree)))
    return out


def atst_is_tree(level: ATSTLevel) -> bool:
    names = {b: f"n{i}" for i, b in enumerate(level.nodes)}
    h = Multigraph.build(list(names.values()), [Edge(e, names[a], names[b]) for e, a, b in level.edges])
    return is_spanning_tree(h, [e for e, _, _ in level.edges])


def default_enumeration(p: Presentation, component: Iterable[str], n: int) -> list[str]:
    """Graph vertices of the component in natural order (end nodes excluded)."""
    g = p.truncate(n).graph
    return sort_ids(v for v in component if v in g)


# ---------------------------------------------------------------------------
# the limit packing pipeline


def f_chain(p: Presentation, m: int) -> list[frozenset[str]]:
    """F_i = edges at a closed vertex of level i, i = 1..m."""
    out = []
    for i in range(1, m + 1):
        lg = p.truncate(i)
        if not lg.frontier:
            out.append(frozenset(e.id for e in lg.graph.edges))
            continue
        closed = lg.closed_vertices
        out.append(frozenset(e.id for e in lg.graph.edges if e.u in closed or e.v in closed))
    return out


Packing = tuple[tuple[str, ...], ...]


def _canonical(trees: Iterable[Iterable[str]]) -> Packing:
    ts = [tuple(sorted(t, key=natkey)) for t in trees]
    return tuple(sorted(ts, key=lambda t: [natkey(e) for e in t]))


def enumerate_packings(g: Multigraph, k: int, cap: int = PACKING_CAP) -> list[Packing]:
    """Up to ``cap`` packings of k edge-disjoint spanning trees, in deterministic order."""
    need = len(g.vertices) - 1
    edges = [e for e in sorted(g.edges, key=lambda e: natkey(e.id)) if not e.is_loop]
    if len(edges) < k * need:
        return []
    out: list[Packing] = []
    parents = [{v: v for v in g.vertices} for _ in range(k)]
    trees: list[list[str]] = [[] for _ in range(k)]

    def find(par: dict[str, str], v: str) -> str:
        while par[v] != v:
            v = par[v]
        return v

    def rec(i: int) -> None:
        if len(out) >= cap:
            return
        missing = sum(need - len(t) for t in trees)
        if missing == 0:
            out.append(_canonical(trees))
            return
        if len(edges) - i < missing:
            return
        e = edges[i]
        for t in range(k):
            if len(trees[t]) == need:
                continue
            if not trees[t] and t > 0 and not trees[t - 1]:
                break  # first edges arrive in order: trees stay sorted by minimum edge
            par = parents[t]
            ru, rv = find(par, e.u), find(par, e.v)
            if ru == rv:
                continue
            par[ru] = rv
            trees[t].append(e.id)
            rec(i + 1)
            trees[t].pop()
            par[ru] = ru
            if len(out) >= cap:
                return
        rec(i + 1)

    rec(0)
    return out


@dataclass
class PackingThread:
    k: int
    level: int
    chain: list[frozenset[str]]
    packings: list[Packing]
    limit_assignment: dict[str, int | None]
    aux_completion: list[dict]
    cap: int = PACKING_CAP
    counts: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "level": self.level,
            "cap": self.cap,
            "levels": [
                {"F": sort_ids(f), "trees": [list(t) for t in pk], "candidates": c}
                for f, pk, c in zip(self.chain, self.packings, self.counts)
            ],
            "limit_assignment": {e: self.limit_assignment[e] for e in sort_ids(self.limit_assignment)},
            "aux_completion": self.aux_completion,
            "skeleton": True,
        }

    def to_dot(self, g: Multigraph) -> str:
        colors = {
            e: TREE_COLORS[(t - 1) % len(TREE_COLORS)]
            for e, t in self.limit_assignment.items()
            if t is not None
        }
        return g.to_dot("packing", colors)


def _restrict(pk: Packing, cross: frozenset[str]) -> Packing:
    return _canonical([e for e in t if e in cross] for t in pk)


def pack_pipeline(
    p: Presentation,
    k: int,
    m: int,
    n: int | None = None,
    chain: Sequence[Iterable[str]] | None = None,
    cap: int = PACKING_CAP,
) -> PackingThread:
    """Packings of G.F_i lifted along the F-chain, then completed by shared auxiliary trees."""
    n = m + 3 if n is None else n
    fs = [frozenset(f) for f in chain] if chain is not None else f_chain(p, m)
    levels = [gf_level(p, f, n) for f in fs]
    cross = [frozenset(e.id for e in g.edges if not e.is_loop) for g in levels]
    found: list[list[Packing]] = []
    for i, g in enumerate(levels):
        if pack_trees(g, k) is None:
            part = cut_violation(g, k) if len(g.vertices) <= CUT_CONDITION_LIMIT else None
            raise CutConditionFailed(
                f"level {i + 1} of the F-chain has no {k} edge-disjoint spanning trees",
                step=i + 1,
                partition=part.to_json() if part is not None else None,
            )
        found.append(enumerate_packings(g, k, cap))
    idx = list(range(len(levels)))
    sys = InverseSystem(
        idx,
        lambda a, b: a <= b,
        lambda i: found[i],
        lambda j, i, pk: pk if i == j else _restrict(pk, cross[i]),
        key=lambda pk: [[natkey(e) for e in t] for t in pk],
        name="packings",
    )
    thread = thread_search(sys, idx)
    if thread is None:
        raise ThreadEmpty(f"no compatible packing sequence within {cap} candidates per level", cap=cap)
    picked = [pk for _, pk in thread.points]
    assignment: dict[str, int | None] = {e.id: None for e in levels[-1].edges} if levels else {}
    if picked:
        for t, tree in enumerate(picked[-1], start=1):
            for e in tree:
                assignment[e] = t
    aux = aux_graph(p, n)
    completion = []
    for comp in aux.aux_components():
        enum = default_enumeration(p, comp, n)
        trees = atst_levels(aux, comp, enum, len(enum))
        top = trees[-1]
        completion.append({
            "component": sort_ids(comp),
            "edges": sorted((e for e, _, _ in top.edges), key=natkey),
            "shared_by": list(range(1, k + 1)),
        })
    return PackingThread(k, n, fs, picked, assignment, completion, cap, [len(f) for f in found])
