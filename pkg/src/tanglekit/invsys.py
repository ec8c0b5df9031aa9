"""Inverse systems of finite levels: 𝔉, Γ, Δ and G.F, with thread search."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    FrontierEdge,
    InsufficientDepth,
    NotCofinal,
    NotDeltaMember,
    PendingComponent,
)
from .multigraph import (
    Multigraph,
    VertexPartition,
    components,
    contract_by_edges,
    contract_partition,
    min_id,
    natkey,
    refine,
    sort_ids,
)
from .presentation import Presentation
from .structure import GROWTH_WINDOW, Comp, component_report, crit_of, enumerate_crit


def _default_key(pt: Hashable) -> tuple:
    return natkey(repr(pt))


class InverseSystem:
    """Finite levels over a sampled index set with bonding maps bond(j, i, pt)."""

    def __init__(
        self,
        indices: Iterable[Hashable],
        leq: Callable[[Hashable, Hashable], bool],
        level: Callable[[Hashable], Sequence[Hashable]],
        bond: Callable[[Hashable, Hashable, Hashable], Hashable],
        join: Callable[[Hashable, Hashable], Hashable] | None = None,
        key: Callable[[Hashable], tuple] = _default_key,
        name: str = "system",
    ) -> None:
        self.indices = list(indices)
        self.leq = leq
        self._level = level
        self.bond = bond
        self.join = join
        self.key = key
        self.name = name
        self._cache: dict[Hashable, list[Hashable]] = {}

    def level(self, i: Hashable) -> list[Hashable]:
        if i not in self._cache:
            self._cache[i] = sorted(self._level(i), key=self.key)
        return self._cache[i]


@dataclass(frozen=True)
class CounterExample:
    chain: tuple
    lower: Hashable
    middle: Hashable
    upper: Hashable
    point: Hashable
    direct: Hashable
    composite: Hashable

    def to_json(self) -> dict:
        return {k: repr(v) for k, v in self.__dict__.items()}


def check_compatibility(sys: InverseSystem, chains: Iterable[Sequence[Hashable]]) -> CounterExample | None:
    """Composition law along every sampled chain; None means pass."""
    for chain in chains:
        chain = list(chain)
        for a in range(len(chain)):
            i = chain[a]
            for pt in sys.level(i):
                if sys.bond(i, i, pt) != pt:
                    return CounterExample(tuple(chain), i, i, i, pt, sys.bond(i, i, pt), pt)
            for b in range(a, len(chain)):
                for c in range(b, len(chain)):
                    j, k = chain[b], chain[c]
                    for pt in sys.level(k):
                        direct = sys.bond(k, i, pt)
                        composite = sys.bond(j, i, sys.bond(k, j, pt))
                        if direct != composite:
                            return CounterExample(tuple(chain), i, j, k, pt, direct, composite)
    return None


@dataclass(frozen=True)
class Thread:
    points: tuple[tuple[Hashable, Hashable], ...]

    def at(self, i: Hashable) -> Hashable:
        for j, p in self.points:
            if j == i:
                return p
        raise KeyError(i)

    def to_json(self) -> list:
        return [{"index": _jsonable(i), "point": _jsonable(p)} for i, p in self.points]


def _jsonable(x: object) -> object:
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, (frozenset, set)):
        return sort_ids(x)
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def _pruned(sys: InverseSystem, chain: Sequence[Hashable]) -> list[list[Hashable]]:
    """Backward pruning: keep level points that are images from the level above."""
    alive = [list(sys.level(i)) for i in chain]
    for a in range(len(chain) - 2, -1, -1):
        images = {sys.bond(chain[a + 1], chain[a], q) for q in alive[a + 1]}
        alive[a] = [pt for pt in alive[a] if pt in images]
    return alive


def thread_search(sys: InverseSystem, chain: Sequence[Hashable]) -> Thread | None:
    """Lexicographically least compatible thread, or None when empty."""
    chain = list(chain)
    if not chain:
        return Thread(())
    alive = _pruned(sys, chain)
    if any(not lvl for lvl in alive):
        return None
    picked = [alive[0][0]]
    for a in range(1, len(chain)):
        options = [q for q in alive[a] if sys.bond(chain[a], chain[a - 1], q) == picked[-1]]
        picked.append(options[0])
    return Thread(tuple(zip(chain, picked)))


def all_threads(sys: InverseSystem, chain: Sequence[Hashable]) -> list[Thread]:
    """Every thread over a chain; each is determined by its top point."""
    chain = list(chain)
    if not chain:
        return [Thread(())]
    out = []
    for top in sys.level(chain[-1]):
        pts = [top]
        for a in range(len(chain) - 1, 0, -1):
            pts.append(sys.bond(chain[a], chain[a - 1], pts[-1]))
        out.append(Thread(tuple(zip(chain, reversed(pts)))))
    return sorted(out, key=lambda t: [sys.key(p) for _, p in t.points])


def poset_threads(sys: InverseSystem, indices: Sequence[Hashable], keep: Callable[[Hashable], bool] = lambda p: True) -> list[Thread]:
    """All compatible choices over a finite sub-poset (backtracking)."""
    idx = list(indices)
    # process from maximal elements down so bonds prune early
    order = sorted(idx, key=lambda i: -sum(1 for j in idx if sys.leq(j, i)))
    out: list[Thread] = []
    choice: dict[Hashable, Hashable] = {}

    def ok(i: Hashable, pt: Hashable) -> bool:
        for j, q in choice.items():
            if j != i and sys.leq(i, j) and sys.bond(j, i, q) != pt:
                return False
            if j != i and sys.leq(j, i) and sys.bond(i, j, pt) != q:
                return False
        return True

    def rec(a: int) -> None:
        if a == len(order):
            out.append(Thread(tuple((i, choice[i]) for i in idx)))
            return
        i = order[a]
        for pt in sys.level(i):
            if keep(pt) and ok(i, pt):
                choice[i] = pt
                rec(a + 1)
                del choice[i]

    rec(0)
    return out


def restrict_cofinal(sys: InverseSystem, j: Iterable[Hashable], sample: Iterable[Hashable] | None = None) -> InverseSystem:
    js = list(j)
    for i in sample if sample is not None else sys.indices:
        if not any(sys.leq(i, x) for x in js):
            raise NotCofinal("index has no upper bound in the restriction", index=repr(i))
    return InverseSystem(js, sys.leq, sys._level, sys.bond, sys.join, sys.key, sys.name + "|restricted")


# ---------------------------------------------------------------------------
# the 𝔉 system


@dataclass(frozen=True)
class FPoint:
    """Principal at a component (``key``) or the filter at a critical set ``y``."""

    kind: str
    key: str = ""
    y: frozenset[str] = frozenset()
    pending: bool = False

    @classmethod
    def principal(cls, key: str, pending: bool = False) -> "FPoint":
        return cls("principal", key, frozenset(), pending)

    @classmethod
    def filter(cls, y: Iterable[str]) -> "FPoint":
        return cls("filter", "", frozenset(y))

    def sort_key(self) -> tuple:
        if self.kind == "principal":
            return (0, natkey(self.key))
        return (1, len(self.y), [natkey(v) for v in sort_ids(self.y)])

    def to_json(self) -> dict:
        if self.kind == "principal":
            return {"principal": self.key, "pending": self.pending}
        return {"filter": sort_ids(self.y)}

    def __repr__(self) -> str:
        if self.kind == "principal":
            return f"P({self.key}{'?' if self.pending else ''})"
        return "F{" + ",".join(sort_ids(self.y)) + "}"


@dataclass(frozen=True)
class FLevel:
    x: frozenset[str]
    level: int
    points: tuple[FPoint, ...]
    pending: tuple[FPoint, ...]

    def to_json(self) -> dict:
        return {
            "X": sort_ids(self.x),
            "level": self.level,
            "points": [p.to_json() for p in self.points],
            "pending": [p.to_json() for p in self.pending],
        }


def crit_at(p: Presentation, x: Iterable[str], n: int, k: int = 2) -> list[frozenset[str]]:
    """crit(X): certified sets inside X, else k-witnessed ones."""
    xs = frozenset(x)
    cert = p.certificate()
    if cert is not None:
        return cert.crit.within(xs)
    return [w.y for w in crit_of(p, xs, n, k)]


def f_level(p: Presentation, x: Iterable[str], n: int, k: int = 2) -> FLevel:
    rep = component_report(p, x, n)
    pts = [FPoint.principal(c.key) for c in rep.closed]
    pts += [FPoint.filter(y) for y in crit_at(p, rep.separator, n, k)]
    pending = [FPoint.principal(c.key, True) for c in rep.open]
    return FLevel(rep.separator, n, tuple(sorted(pts, key=FPoint.sort_key)), tuple(pending))


def _as_point(c: Comp, strict: bool) -> FPoint:
    if not c.closed and strict:
        raise PendingComponent(f"component {c.key} is still open", component=c.key)
    return FPoint.principal(c.key, not c.closed)


def f_bond(p: Presentation, x: Iterable[str], x2: Iterable[str], pt: FPoint, n: int, strict: bool = False) -> FPoint:
    """Bond 𝔉_{X'} → 𝔉_X for X ⊆ X'."""
    xs, xs2 = frozenset(x), frozenset(x2)
    if not xs <= xs2:
        raise ValueError("f_bond needs X ⊆ X'")
    rep = component_report(p, xs, n)
    if pt.kind == "principal":
        if pt.key in xs:
            raise ValueError("principal key lies in the smaller separator")
        return _as_point(rep.containing(pt.key), strict)
    if pt.y <= xs:
        return FPoint.filter(pt.y)
    hosts = {rep.containing(v).key for v in pt.y - xs}
    if len(hosts) != 1:
        raise InsufficientDepth("critical set meets several components; raise the level", Y=sort_ids(pt.y))
    return _as_point(rep.by_key[hosts.pop()], strict)


def f_system(p: Presentation, chain: Sequence[Iterable[str]], n: int, include_pending: bool = True, k: int = 2) -> InverseSystem:
    xs = [frozenset(x) for x in chain]

    def level(x: frozenset[str]) -> list[FPoint]:
        lv = f_level(p, x, n, k)
        return list(lv.points) + (list(lv.pending) if include_pending else [])

    return InverseSystem(
        xs,
        lambda a, b: a <= b,
        level,
        lambda j, i, pt: f_bond(p, i, j, pt, n, strict=not include_pending),
        lambda a, b: a | b,
        key=lambda pt: pt.sort_key(),
        name="F",
    )


def census_chain(p: Presentation, d: int) -> list[frozenset[str]]:
    """X_i = closed vertices of level i plus critical sets already present one level earlier."""
    cert = p.certificate()
    chain = []
    for i in range(d + 1):
        base = set(p.truncate(i).closed_vertices)
        earlier = p.truncate(max(i - 1, 0)).graph.vertex_set
        if cert is not None:
            sets = cert.crit.within(earlier)
        else:
            sets = [w.y for w in enumerate_crit(p, 3, i)] if i >= GROWTH_WINDOW else []
        for y in sets:
            base |= y
        chain.append(frozenset(base))
    for a in range(1, len(chain)):
        chain[a] = chain[a] | chain[a - 1]
    return chain


@dataclass(frozen=True)
class Census:
    depth: int
    threads: int
    filters: int
    end_threads: int
    matched_ends: tuple[str, ...]
    chain: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "threads": self.threads,
            "filter_threads": self.filters,
            "end_threads": self.end_threads,
            "matched_ends": list(self.matched_ends),
            "chain": [list(x) for x in self.chain],
        }


def f_census(p: Presentation, d: int) -> Census:
    """Count 𝔉 threads over the census chain that end in a filter or an unbounded component."""
    chain = census_chain(p, d)
    sys = f_system(p, chain, d)
    threads = all_threads(sys, chain)
    lg = p.truncate(d)
    cert = p.certificate()
    ends = cert.ends_at(d) if cert else []
    top = component_report(p, chain[-1], d)
    filters = 0
    matched: list[str] = []
    end_threads = 0
    for t in threads:
        pt = t.points[-1][1]
        if pt.kind == "filter":
            filters += 1
        elif pt.pending:
            comp = top.by_key[pt.key]
            hit = [e.id for e in ends if (pre := e.ray_at(lg.graph)) and pre[-1] in comp.vertices]
            if hit or (cert is not None and not cert.ends_enumerable) or cert is None:
                end_threads += 1
                matched += hit
    return Census(d, filters + end_threads, filters, end_threads, tuple(matched), tuple(tuple(sort_ids(x)) for x in chain))


# ---------------------------------------------------------------------------
# Γ


@dataclass(frozen=True)
class GammaIndex:
    """(X, P): P partitions the component keys of G - X at a fixed level."""

    x: frozenset[str]
    classes: tuple[frozenset[str], ...]

    @classmethod
    def of(cls, x: Iterable[str], classes: Iterable[Iterable[str]]) -> "GammaIndex":
        cs = [frozenset(c) for c in classes if c]
        cs.sort(key=lambda c: natkey(min_id(c)))
        return cls(frozenset(x), tuple(cs))

    def to_json(self) -> dict:
        return {"X": sort_ids(self.x), "P": [sort_ids(c) for c in self.classes]}

    def __repr__(self) -> str:
        return f"Γ({sort_ids(self.x)}, {[sort_ids(c) for c in self.classes]})"


def _check_gamma(p: Presentation, g: GammaIndex, n: int) -> dict[str, Comp]:
    comps = component_report(p, g.x, n).by_key
    seen = [k for c in g.classes for k in c]
    if sorted(seen, key=natkey) != sort_ids(comps) or len(seen) != len(set(seen)):
        raise NotDeltaMember("classes do not partition the components", index=g.to_json())
    return comps


def gamma_partition(p: Presentation, g: GammaIndex, n: int) -> VertexPartition:
    """p(X,P): singletons of X plus one block per class."""
    comps = _check_gamma(p, g, n)
    blocks = [{v} for v in g.x]
    blocks += [set().union(*(comps[k].vertices for k in c)) for c in g.classes]
    return VertexPartition.of(blocks)


def gamma_leq(p: Presentation, a: GammaIndex, b: GammaIndex, n: int) -> bool:
    return a.x <= b.x and gamma_partition(p, b, n).refines(gamma_partition(p, a, n))


def gamma_join(p: Presentation, a: GammaIndex, b: GammaIndex, n: int) -> GammaIndex:
    """Upper bound: pull both partitions back to X ∪ Y and refine."""
    z = a.x | b.x
    rep = component_report(p, z, n)
    ra, rb = component_report(p, a.x, n), component_report(p, b.x, n)
    cls_a = {k: i for i, c in enumerate(a.classes) for k in c}
    cls_b = {k: i for i, c in enumerate(b.classes) for k in c}
    keys = [c.key for c in rep.all]
    if not keys:
        return GammaIndex.of(z, [])
    pa = VertexPartition.of(_group(keys, lambda k: cls_a[ra.containing(k).key]))
    pb = VertexPartition.of(_group(keys, lambda k: cls_b[rb.containing(k).key]))
    return GammaIndex.of(z, refine(pa, pb).blocks)


def _group(items: Iterable[str], label: Callable[[str], Hashable]) -> list[list[str]]:
    out: dict[Hashable, list[str]] = {}
    for it in items:
        out.setdefault(label(it), []).append(it)
    return list(out.values())


def dummy_name(block: Iterable[str]) -> str:
    return f"D[{min_id(block)}]"


def gamma_space(p: Presentation, g: GammaIndex, n: int) -> Multigraph:
    """G/p(X,P): X-vertices plus one dummy per class, cross-edges only."""
    part = gamma_partition(p, g, n)
    names = {i: dummy_name(b) for i, b in enumerate(part.blocks) if not (len(b) == 1 and next(iter(b)) in g.x)}
    return contract_partition(p.truncate(n).graph, part, names)


def gamma_bond(p: Presentation, upper: GammaIndex, lower: GammaIndex, elem: tuple[str, str], n: int) -> tuple[str, str]:
    """Map a vertex ('v', id) or edge ('e', id) of the upper space to the lower one."""
    hi, lo = gamma_space(p, upper, n), gamma_space(p, lower, n)
    where = {v: name for name in lo.vertices for v in lo.labels[name]}
    kind, ident = elem
    if kind == "v":
        return ("v", where[next(iter(hi.labels[ident]))])
    e = hi.edge_map[ident]
    if ident in lo.edge_map:
        return ("e", ident)
    return ("v", where[next(iter(hi.labels[e.u]))])


def gamma_system(p: Presentation, indices: Sequence[GammaIndex], n: int) -> InverseSystem:
    def level(g: GammaIndex) -> list[tuple[str, str]]:
        sp = gamma_space(p, g, n)
        return [("v", v) for v in sp.vertices] + [("e", e.id) for e in sp.edges]

    return InverseSystem(
        indices,
        lambda a, b: gamma_leq(p, a, b, n),
        level,
        lambda j, i, pt: gamma_bond(p, j, i, pt, n),
        lambda a, b: gamma_join(p, a, b, n),
        key=lambda pt: (pt[0], natkey(pt[1])),
        name="Gamma",
    )


def is_dummy(pt: tuple[str, str]) -> bool:
    return pt[0] == "v" and pt[1].startswith("D[")


# ---------------------------------------------------------------------------
# Δ and Δ′


def settled_vertices(p: Presentation, n: int) -> frozenset[str]:
    """Vertices already closed GROWTH_WINDOW levels before n."""
    if n < GROWTH_WINDOW:
        return frozenset()
    return p.truncate(n - GROWTH_WINDOW).closed_vertices


def is_infinite_class(p: Presentation, x: frozenset[str], members: Iterable[Comp], n: int) -> bool:
    """A class grows when it holds a closed component that was not yet settled GROWTH_WINDOW levels ago."""
    old = settled_vertices(p, n)
    return any(c.closed and not c.vertices <= old for c in members)


def delta_violations(p: Presentation, g: GammaIndex, n: int, k: int = 2) -> list[str]:
    comps = _check_gamma(p, g, n)
    crit = set(crit_at(p, g.x, n, k))
    problems = []
    infinite: dict[frozenset[str], int] = {}
    for cls in g.classes:
        members = [comps[key] for key in cls]
        nbhds = {c.nbhd for c in members}
        if len(nbhds) == 1 and next(iter(nbhds)) in crit:
            y = next(iter(nbhds))
            if is_infinite_class(p, g.x, members, n):
                infinite[y] = infinite.get(y, 0) + 1
            continue
        if len(members) == 1:
            continue
        problems.append(f"class {sort_ids(cls)} mixes neighbourhoods or has a non-critical neighbourhood")
    for y, cnt in infinite.items():
        if cnt > 1:
            problems.append(f"critical set {sort_ids(y)} has {cnt} growing classes")
    return problems


def delta_member(p: Presentation, g: GammaIndex, n: int, k: int = 2) -> bool:
    return not delta_violations(p, g, n, k)


def delta_canonical(p: Presentation, x: Iterable[str], n: int, k: int = 2) -> GammaIndex:
    """(X, 𝔓_X): singletons off the critical sets, one class per critical neighbourhood."""
    xs = frozenset(x)
    rep = component_report(p, xs, n)
    crit = set(crit_at(p, xs, n, k))
    groups: dict[Hashable, list[str]] = {}
    for c in rep.all:
        label: Hashable = ("crit", c.nbhd) if c.nbhd in crit else ("single", c.key)
        groups.setdefault(label, []).append(c.key)
    return GammaIndex.of(xs, groups.values())


def delta_join(p: Presentation, a: GammaIndex, b: GammaIndex, n: int, k: int = 2) -> GammaIndex:
    """Upper bound inside Δ: refine the per-critical-set partitions."""
    z = a.x | b.x
    rep = component_report(p, z, n)
    crit_z = set(crit_at(p, z, n, k))
    ra, rb = component_report(p, a.x, n), component_report(p, b.x, n)
    cls_a = {key: i for i, c in enumerate(a.classes) for key in c}
    cls_b = {key: i for i, c in enumerate(b.classes) for key in c}
    crit_a, crit_b = set(crit_at(p, a.x, n, k)), set(crit_at(p, b.x, n, k))

    def side(r, cls, crit, c: Comp) -> Hashable:
        if c.nbhd not in crit:
            return None
        host = r.containing(c.key)
        return cls[host.key] if host.vertices == c.vertices else ("piece", host.key)

    groups: dict[Hashable, list[str]] = {}
    for c in rep.all:
        if c.nbhd not in crit_z:
            label: Hashable = ("single", c.key)
        else:
            label = (c.nbhd, side(ra, cls_a, crit_a, c), side(rb, cls_b, crit_b, c))
        groups.setdefault(label, []).append(c.key)
    return GammaIndex.of(z, groups.values())


def delta_dominate(p: Presentation, g: GammaIndex, n: int, k: int = 2) -> GammaIndex:
    """Add one vertex from every component in a finite class and canonicalize."""
    problems = delta_violations(p, g, n, k)
    if problems:
        raise NotDeltaMember("index is not in Δ", problems=problems)
    comps = _check_gamma(p, g, n)
    crit = set(crit_at(p, g.x, n, k))
    extra: set[str] = set()
    for cls in g.classes:
        members = [comps[key] for key in cls]
        if members[0].nbhd not in crit or len({c.nbhd for c in members}) != 1:
            continue
        if not is_infinite_class(p, g.x, members, n):
            extra |= {c.key for c in members}
    return delta_canonical(p, g.x | extra, n, k)


# ---------------------------------------------------------------------------
# G.F


def gf_level(p: Presentation, f: Iterable[str], n: int) -> Multigraph:
    fs = set(f)
    g = p.truncate(n).graph
    missing = fs - set(g.edge_map)
    if missing:
        raise FrontierEdge("edges not yet present at this level", edges=sort_ids(missing), level=n)
    return contract_by_edges(g, fs)


def gf_bond(p: Presentation, f: Iterable[str], f2: Iterable[str], elem: tuple[str, str], n: int) -> tuple[str, str]:
    """Map a vertex or edge of G.F' to G.F for F ⊆ F'."""
    lo, hi = gf_level(p, f, n), gf_level(p, f2, n)
    if not set(f) <= set(f2):
        raise ValueError("gf_bond needs F ⊆ F'")
    kind, ident = elem
    if kind == "e":
        return ("e", ident)
    where = {v: name for name in lo.vertices for v in lo.labels[name]}
    return ("v", where[next(iter(hi.labels[ident]))])


# ---------------------------------------------------------------------------
# ultrafilter shadow


@dataclass(frozen=True)
class Violation:
    reason: str
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"violation": self.reason, **self.detail}


def thread_ultrafilter_check(p: Presentation, thread: Thread, x: Iterable[str], n: int) -> Violation | None:
    """Finite-stage check that a dummy-thread picks an ultrafilter on the components of G - X."""
    xs = frozenset(x)
    chosen: list[frozenset[str]] = []
    bipartitions: list[tuple[frozenset[str], frozenset[str]]] = []
    for g, pt in thread.points:
        if g.x != xs:
            continue
        if not is_dummy(pt):
            return Violation("thread leaves the dummy vertices", {"index": g.to_json(), "point": list(pt)})
        sp = gamma_space(p, g, n)
        block = sp.labels[pt[1]]
        cls = next(c for c in g.classes if gamma_class_vertices(p, g, c, n) == block)
        chosen.append(cls)
        if len(g.classes) == 2:
            bipartitions.append((g.classes[0], g.classes[1]))
    if not chosen:
        return Violation("no index with this separator")
    common = frozenset.intersection(*chosen)
    if not common:
        return Violation("chosen families have empty intersection", {"families": [sort_ids(c) for c in chosen]})
    for a, b in bipartitions:
        hits = (a in chosen) + (b in chosen)
        if hits != 1:
            return Violation("bipartition not decided exactly once", {"sides": [sort_ids(a), sort_ids(b)]})
    for a in chosen:
        for b in bipartitions:
            for side in b:
                if a <= side and side not in chosen:
                    return Violation("not upward closed", {"family": sort_ids(a), "superset": sort_ids(side)})
    return None


def gamma_class_vertices(p: Presentation, g: GammaIndex, cls: frozenset[str], n: int) -> frozenset[str]:
    comps = component_report(p, g.x, n).by_key
    return frozenset().union(*(comps[k].vertices for k in cls))
