"""Depth-bounded and certified structure: components, crit sets, ends, relations."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable

from .errors import (
    Disconnected,
    DominatorsUnbounded,
    InsufficientDepth,
    NotCritical,
    UnknownEnd,
    UnknownVertex,
)
from .multigraph import (
    Multigraph,
    components,
    edge_flow,
    min_id,
    natkey,
    sort_ids,
    vertex_flow,
)
from .presentation import EndCert, LeveledGraph, Presentation

GROWTH_WINDOW = 3


def _sk(s: Iterable[str]) -> list:
    return [natkey(v) for v in sort_ids(s)]


@dataclass(frozen=True)
class Comp:
    """A component of G - X at a level; ``key`` is its minimal vertex."""

    key: str
    vertices: frozenset[str]
    nbhd: frozenset[str]
    closed: bool

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "vertices": sort_ids(self.vertices),
            "neighbourhood": sort_ids(self.nbhd),
            "closed": self.closed,
        }


@dataclass(frozen=True)
class ComponentReport:
    level: int
    separator: frozenset[str]
    closed: tuple[Comp, ...]
    open: tuple[Comp, ...]

    @property
    def all(self) -> tuple[Comp, ...]:
        return tuple(sorted(self.closed + self.open, key=lambda c: natkey(c.key)))

    @property
    def by_key(self) -> dict[str, Comp]:
        return {c.key: c for c in self.closed + self.open}

    def containing(self, v: str) -> Comp:
        for c in self.closed + self.open:
            if v in c.vertices:
                return c
        raise UnknownVertex(f"{v} lies in no component", vertex=v)

    def with_nbhd(self, y: frozenset[str], closed_only: bool = True) -> list[Comp]:
        pool = self.closed if closed_only else self.all
        return [c for c in pool if c.nbhd == y]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "separator": sort_ids(self.separator),
            "closed": [c.to_json() for c in self.closed],
            "open": [c.to_json() for c in self.open],
        }


@lru_cache(maxsize=8192)
def _report(p: Presentation, x: frozenset[str], n: int) -> ComponentReport:
    lg = p.truncate(n)
    missing = x - lg.graph.vertex_set
    if missing:
        raise UnknownVertex("separator has vertices absent at this level", missing=sort_ids(missing), level=n)
    closed, opened = [], []
    for c, nb in components(lg.graph, x):
        comp = Comp(min_id(c), c, nb, not (c & lg.frontier))
        (closed if comp.closed else opened).append(comp)
    return ComponentReport(n, x, tuple(closed), tuple(opened))


def component_report(p: Presentation, x: Iterable[str], n: int) -> ComponentReport:
    return _report(p, frozenset(x), n)


@dataclass(frozen=True)
class CritWitness:
    x: frozenset[str]
    y: frozenset[str]
    count: int
    level: int
    certified: bool

    def to_json(self) -> dict:
        return {
            "X": sort_ids(self.x),
            "Y": sort_ids(self.y),
            "witness_count": self.count,
            "level": self.level,
            "certified": self.certified,
        }


def _certified_crit(p: Presentation, y: frozenset[str]) -> bool:
    cert = p.certificate()
    return bool(cert and cert.crit.contains(y))


def crit_of(p: Presentation, x: Iterable[str], n: int, k: int = 2) -> list[CritWitness]:
    """Every Y ⊆ X with at least k closed components of neighbourhood exactly Y."""
    if k < 2:
        raise ValueError("witness threshold k must be at least 2")
    rep = component_report(p, x, n)
    counts: dict[frozenset[str], int] = {}
    for c in rep.closed:
        counts[c.nbhd] = counts.get(c.nbhd, 0) + 1
    out = [
        CritWitness(rep.separator, y, cnt, n, _certified_crit(p, y))
        for y, cnt in counts.items()
        if cnt >= k
    ]
    return sorted(out, key=lambda w: (len(w.y), _sk(w.y)))


def closed_count(p: Presentation, x: Iterable[str], y: Iterable[str], n: int) -> int:
    return len(component_report(p, x, n).with_nbhd(frozenset(y)))


def growth_candidates(p: Presentation, n: int) -> list[str]:
    """Vertices present GROWTH_WINDOW levels ago whose degree has grown since."""
    then = p.truncate(max(0, n - GROWTH_WINDOW)).graph
    now = p.truncate(n).graph
    if n < GROWTH_WINDOW:
        return []
    return [v for v in then.vertices if now.degree(v) > then.degree(v)]


EXHAUSTIVE_BUDGET = 2000


def enumerate_crit(p: Presentation, s: int, n: int, k: int = 2) -> list[CritWitness]:
    """k-witnessed critical sets of size ≤ s among high-degree candidates."""
    if s > 6:
        raise ValueError("size bound s must be at most 6")
    cand = growth_candidates(p, n)
    cset = frozenset(cand)
    lg = p.truncate(n)
    trial: set[frozenset[str]] = set()
    for c, nb in components(lg.graph, cset):
        if nb and len(nb) <= s and not (c & lg.frontier):
            trial.add(nb)
    if sum(comb(len(cand), r) for r in range(1, s + 1)) <= EXHAUSTIVE_BUDGET:
        for r in range(1, min(s, len(cand)) + 1):
            trial.update(frozenset(t) for t in combinations(cand, r))
    out = []
    for y in trial:
        cnt = closed_count(p, y, y, n)
        if cnt >= k:
            out.append(CritWitness(y, y, cnt, n, _certified_crit(p, y)))
    return sorted(out, key=lambda w: (len(w.y), _sk(w.y)))


# ---------------------------------------------------------------------------
# directions


@dataclass(frozen=True)
class EndSurrogate:
    end: str | None
    thread: tuple[tuple[tuple[str, ...], str], ...]
    dominators: tuple[str, ...] | None

    def to_json(self) -> dict:
        return {
            "end": self.end,
            "thread": [{"X": list(x), "component": c} for x, c in self.thread],
            "dominators": list(self.dominators) if self.dominators is not None else None,
        }


def canonical_chain(p: Presentation, d: int) -> list[frozenset[str]]:
    return [p.truncate(i).closed_vertices for i in range(d + 1)]


def ray_tail(end: EndCert, lg: LeveledGraph) -> list[str]:
    """Second half of the defining ray's prefix present at the level."""
    pre = end.ray_at(lg.graph)
    if not pre:
        return []
    return pre[len(pre) // 2 :]


def directions(p: Presentation, d: int) -> list[EndSurrogate]:
    """Threads of unbounded components over the canonical chain at level d."""
    if d < 1:
        raise ValueError("depth must be at least 1")
    chain = canonical_chain(p, d)
    lg = p.truncate(d)
    reports = [component_report(p, x, d) for x in chain]
    cert = p.certificate()
    ends = cert.ends_at(d) if cert else []
    out = []
    for top in reports[-1].open:
        thread = tuple(
            (tuple(sort_ids(x)), rep.containing(top.key).key) for x, rep in zip(chain, reports)
        )
        match = None
        for e in ends:
            pre = e.ray_at(lg.graph)
            if pre and pre[-1] in top.vertices:
                match = e
                break
        if match is None and cert is not None and cert.ends_enumerable:
            continue
        doms = None
        if match is not None and match.dominators is not None:
            doms = tuple(sort_ids(match.dominators))
        out.append(EndSurrogate(match.id if match else None, thread, doms))
    return out


# ---------------------------------------------------------------------------
# tri-state verdicts


@dataclass(frozen=True)
class Verdict:
    status: str
    value: object = None
    certified: bool = False
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        v = self.value
        if isinstance(v, (set, frozenset)):
            v = sort_ids(v)
        elif isinstance(v, Cut):
            v = v.to_json()
        return {"status": self.status, "value": v, "certified": self.certified, **self.detail}


@dataclass(frozen=True)
class Cut:
    edges: frozenset[str]
    side1: frozenset[str]
    side2: frozenset[str]

    def to_json(self) -> dict:
        return {"edges": sort_ids(self.edges), "side1": sort_ids(self.side1), "side2": sort_ids(self.side2)}


def _end_or_raise(p: Presentation, e: str, n: int) -> EndCert:
    cert = p.certificate()
    if cert is None:
        raise UnknownEnd(f"end {e} cannot be resolved without a certificate", end=e)
    return cert.end(e, n)


def dominates(p: Presentation, u: str, e: str, n: int) -> Verdict:
    end = _end_or_raise(p, e, n)
    lg = p.truncate(n)
    if u not in lg.graph:
        raise UnknownVertex(f"{u} absent at level {n}", vertex=u)
    ray = [v for v in end.ray_at(lg.graph) if v != u]
    fans, _ = vertex_flow(lg.graph, [u], ray, unit_sinks=True)
    certified = end.dominators is not None and u in end.dominators or end.dominated_by(u)
    if certified:
        return Verdict("Witnessed", fans, True, {"fans": fans, "level": n})
    tail = ray_tail(end, lg)
    tail = [v for v in tail if v != u]
    if not tail:
        return Verdict("Unknown", None, False, {"reason": "ray too short at this level"})
    _, cut = vertex_flow(lg.graph, [u], tail)
    return Verdict("Refuted", frozenset(cut), True, {"fans": fans, "level": n})


def _point_set(p: Presentation, a: str, n: int) -> list[str]:
    lg = p.truncate(n)
    if a in lg.graph:
        return [a]
    end = _end_or_raise(p, a, n)
    tail = ray_tail(end, lg)
    if not tail:
        raise InsufficientDepth(f"no ray of {a} visible at level {n}")
    return tail


def not_finitely_separable(p: Presentation, a: str, b: str, n: int, k: int | None = None) -> Verdict:
    """Are a and b (vertices or certified ends) joined by infinitely many edge-disjoint paths?"""
    lg = p.truncate(n)
    sa, sb = _point_set(p, a, n), _point_set(p, b, n)
    value, cut, side = edge_flow(lg.graph, sa, sb)
    detail = {"edge_disjoint_paths": value, "level": n}
    cert = p.certificate()
    if cert is not None:
        if cert.sim(a, b):
            return Verdict("Witnessed", value, True, detail)
        return Verdict("Separated", Cut(cut, side, lg.graph.vertex_set - side), True, detail)
    need = k if k is not None else max(2, n // 2)
    if value >= need:
        return Verdict("Witnessed", value, False, detail)
    if not (side & lg.frontier):
        return Verdict("Separated", Cut(cut, side, lg.graph.vertex_set - side), False, detail)
    return Verdict("Unknown", None, False, detail)


def diamond_graph(p: Presentation, n: int, s: int = 3, k: int = 2) -> dict[str, set[str]]:
    """Vertices joined when they share a critical set or a dominated end."""
    lg = p.truncate(n)
    vs = lg.graph.vertex_set
    cert = p.certificate()
    if cert is not None:
        groups = [set(y) for y in cert.crit.within(vs)]
        for e in cert.ends_at(n):
            doms = e.dominators if e.dominators is not None else {v for v in vs if e.dominated_by(v)}
            groups.append(set(doms) & vs)
    else:
        groups = [set(w.y) for w in enumerate_crit(p, s, n, k)]
    adj: dict[str, set[str]] = {v: set() for v in vs}
    for grp in groups:
        for a in grp:
            adj[a] |= grp - {a}
    return adj


def strongly_linked(p: Presentation, a: str, b: str, n: int, bound: int = 2) -> Verdict:
    """Search for X ∋ a,b such that no small Y outside X separates a,b in G - E(X)."""
    lg = p.truncate(n)
    for v in (a, b):
        if v not in lg.graph:
            return Verdict("Unknown", None, False, {"reason": f"{v} absent at level {n}"})
    adj = diamond_graph(p, n)
    prev: dict[str, str | None] = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for y in sort_ids(adj[x]):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    candidates: list[frozenset[str]] = []
    if b in prev:
        path = []
        y: str | None = b
        while y is not None:
            path.append(y)
            y = prev[y]
        candidates.append(frozenset(path))
    if frozenset({a, b}) not in candidates:
        candidates.append(frozenset({a, b}))
    refutations = []
    for x in candidates:
        inner = [e.id for e in lg.graph.edges if e.u in x and e.v in x]
        value, cut = vertex_flow(lg.graph, [a], [b], uncuttable=x, drop_edges=inner)
        if value > bound:
            return Verdict("Witnessed", x, cert_flag(p), {"min_separator": value, "level": n})
        refutations.append({"X": sort_ids(x), "Y": sort_ids(cut)})
    return Verdict("Refuted", None, cert_flag(p), {"separators": refutations, "level": n, "bound": bound})


def cert_flag(p: Presentation) -> bool:
    return p.certificate() is not None


def compactness_predicates(p: Presentation, n: int) -> dict[str, Verdict]:
    cert = p.certificate()
    if cert is not None:
        return {
            "ends_locally_compact": Verdict(str(cert.flags["ends_locally_compact"]).lower(), None, True),
            "one_point_omega": Verdict(str(cert.flags["one_point_omega"]).lower(), None, True),
        }
    crit = enumerate_crit(p, 2, n)
    evidence = {"witnessed_crit": len(crit), "level": n}
    return {
        "ends_locally_compact": Verdict("unknown", None, False, evidence),
        "one_point_omega": Verdict("unknown", None, False, evidence),
    }


def defining_sequence(p: Presentation, e: str, m: int, n: int | None = None) -> list[frozenset[str]]:
    """Replay the nested-neighbourhood construction of an end at a truncation."""
    level = n if n is not None else max(12, 6 * (m + 1))
    end = _end_or_raise(p, e, level)
    if end.dominators is None:
        raise DominatorsUnbounded(f"end {e} has infinitely many dominators", end=e)
    lg = p.truncate(level)
    g = lg.graph
    doms = end.dominators & g.vertex_set
    ray = end.ray_at(g)
    if len(ray) < 3:
        raise InsufficientDepth("ray prefix too short", level=level)
    tail = ray[-1]
    hcomp = next(c for c, _ in components(g, doms) if tail in c)
    h = g.subgraph(hcomp)
    inside = [v for v in ray if v in hcomp]
    seq = [frozenset({inside[1] if len(inside) > 1 else inside[0]})]
    for _ in range(m):
        cur = seq[-1]
        sep: set[str] = set()
        for x in sort_ids(cur):
            closed = {x} | set(h.adjacency[x])
            if tail in closed:
                raise InsufficientDepth("ray tail reached; raise the level", level=level)
            _, cut = vertex_flow(h, closed, [tail])
            sep |= cut
        comp = next(c for c, _ in components(h, sep) if tail in c)
        nxt = frozenset(v for v in sep if h.adjacency[v] & comp)
        if not nxt or tail in nxt:
            raise InsufficientDepth("ray tail reached; raise the level", level=level)
        seq.append(nxt)
    return seq


def bipartite_minor_witness(p: Presentation, x: Iterable[str], k: int, n: int) -> dict:
    xs = frozenset(x)
    if len(xs) < 3:
        raise NotCritical("the minor witness needs |X| >= 3", X=sort_ids(xs))
    if not _certified_crit(p, xs):
        raise NotCritical("X is not certified critical", X=sort_ids(xs))
    comps = component_report(p, xs, n).with_nbhd(xs)
    if len(comps) < k:
        raise InsufficientDepth(f"only {len(comps)} closed components at level {n}", available=len(comps))
    chosen = comps[:k]
    g = p.truncate(n).graph
    for c in chosen:
        for v in xs:
            if not (g.adjacency[v] & c.vertices):
                raise NotCritical("component misses a vertex of X")
    return {
        "minor": f"K_{{{len(xs)},{k}}}",
        "left": [[v] for v in sort_ids(xs)],
        "right": [sort_ids(c.vertices) for c in chosen],
        "level": n,
    }


def quotient_points(p: Presentation, n: int) -> list[dict]:
    """Vertex classes of ∼ and singleton classes of undominated ends."""
    cert = p.certificate()
    if cert is None or not cert.flags.get("connected", False):
        raise Disconnected("quotient_points needs a certified connected graph")
    lg = p.truncate(n)
    classes: dict[str, list[str]] = {}
    for v in lg.graph.vertices:
        classes.setdefault(cert.sim_key(v), []).append(v)
    ends = cert.ends_at(n)
    out = []
    absorbed: dict[str, list[str]] = {}
    for e in ends:
        key = cert.sim_key(e.id)
        if key in classes:
            absorbed.setdefault(key, []).append(e.id)
        else:
            out.append({"kind": "end", "members": [e.id]})
    for key in sort_ids(classes):
        members = sort_ids(classes[key]) + sorted(absorbed.get(key, []))
        out.append({"kind": "vertex_class", "members": members})
    out.sort(key=lambda c: (c["kind"] != "vertex_class", [natkey(m) for m in c["members"]]))
    return out
