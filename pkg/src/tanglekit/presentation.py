"""Finitely presented infinite graphs: leveled truncations plus certificates."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import NonMonotone, UnknownEnd, UnknownFamily
from .multigraph import Multigraph, components, natkey, sort_ids

Builder = Callable[[int], tuple[Iterable[str], Iterable[tuple[str, str, str]], Iterable[str]]]


@dataclass(frozen=True)
class LeveledGraph:
    level: int
    graph: Multigraph
    frontier: frozenset[str]

    @property
    def closed_vertices(self) -> frozenset[str]:
        return self.graph.vertex_set - self.frontier

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "graph": self.graph.to_json(),
            "frontier": sort_ids(self.frontier),
        }


@dataclass(frozen=True)
class EndCert:
    """A certified end: a defining ray and its dominating vertices.

    ``dominators`` is None when infinitely many vertices dominate; then
    ``dominated_by`` answers membership.
    """

    id: str
    ray: Callable[[int], list[str]]
    description: str
    dominators: frozenset[str] | None
    dominated_by: Callable[[str], bool]
    first_level: int = 0

    def ray_at(self, g: Multigraph, length: int = 10**6) -> list[str]:
        """Longest prefix of the defining ray present in ``g``."""
        out = []
        for v in self.ray(min(length, len(g.vertices) + 1)):
            if v not in g:
                break
            out.append(v)
        return out

    def to_json(self, g: Multigraph | None = None) -> dict:
        doms = sort_ids(self.dominators) if self.dominators is not None else "unbounded"
        return {"id": self.id, "ray": self.description, "dominators": doms}


@dataclass(frozen=True)
class CritFamily:
    """crit(𝒳): finite list or a parametric family with membership test."""

    members: Callable[[frozenset[str]], list[frozenset[str]]]
    contains: Callable[[frozenset[str]], bool]
    description: str
    finite: bool = True

    def within(self, vertices: Iterable[str]) -> list[frozenset[str]]:
        vs = frozenset(vertices)
        return sorted(
            (y for y in self.members(vs) if y <= vs),
            key=lambda y: (len(y), [natkey(v) for v in sort_ids(y)]),
        )


def finite_crit(sets: Iterable[Iterable[str]]) -> CritFamily:
    fixed = [frozenset(s) for s in sets]
    return CritFamily(
        members=lambda vs: list(fixed),
        contains=lambda y: frozenset(y) in fixed,
        description="; ".join("{" + ",".join(sort_ids(s)) + "}" for s in fixed) or "none",
    )


def parametric_crit(
    rule: Callable[[frozenset[str]], bool],
    gen: Callable[[frozenset[str]], list[frozenset[str]]],
    description: str,
) -> CritFamily:
    return CritFamily(members=gen, contains=lambda y: rule(frozenset(y)), description=description, finite=False)


FLAG_NAMES = ("locally_finite", "connected", "one_point_omega", "ends_locally_compact", "simply_branching")


@dataclass(frozen=True)
class Certificate:
    """Exact structural answers for a catalog family."""

    ends_at: Callable[[int], list[EndCert]]
    ends_enumerable: bool
    crit: CritFamily
    sim_key: Callable[[str], str]
    flags: Mapping[str, bool]
    path_family: Callable[[str, str], Callable[[int], list[str]] | None] = lambda a, b: None
    end_count: int | None = 0
    provenance: str = "DERIVED"
    notes: str = ""

    def end(self, end_id: str, n: int) -> EndCert:
        for e in self.ends_at(n):
            if e.id == end_id:
                return e
        raise UnknownEnd(f"end {end_id} is not certified at level {n}", end=end_id, level=n)

    def sim(self, a: str, b: str) -> bool:
        return self.sim_key(a) == self.sim_key(b)

    def to_json(self, n: int) -> dict:
        ends = self.ends_at(n)
        return {
            "ends": [e.to_json() for e in ends],
            "ends_enumerable": self.ends_enumerable,
            "end_count": "infinite" if self.end_count is None else self.end_count,
            "crit": self.crit.description,
            "flags": {k: self.flags[k] for k in FLAG_NAMES},
            "provenance": self.provenance,
            "notes": self.notes,
        }


class Presentation:
    """A monotone sequence of finite truncations with frontier marks."""

    def __init__(
        self,
        family: str,
        params: Mapping[str, object],
        builder: Builder,
        cert: Certificate | None = None,
        description: str = "",
    ) -> None:
        self.family = family
        self.params = dict(params)
        self._builder = builder
        self._cert = cert
        self.description = description
        self._cache: dict[int, LeveledGraph] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"Presentation({self.family!r}, {self.params!r})"

    def truncate(self, n: int) -> LeveledGraph:
        if n < 0:
            raise ValueError("level must be non-negative")
        with self._lock:
            hit = self._cache.get(n)
        if hit is not None:
            return hit
        vs, es, fr = self._builder(n)
        g = Multigraph.build(vs, es)
        lg = LeveledGraph(n, g, frozenset(fr))
        with self._lock:
            self._cache.setdefault(n, lg)
        return lg

    def certificate(self) -> Certificate | None:
        return self._cert

    def spec(self) -> dict:
        return {"family": self.family, "params": self.params}


def truncate(p: Presentation, n: int) -> LeveledGraph:
    return p.truncate(n)


def certificate(p: Presentation) -> Certificate | None:
    return p.certificate()


def check_monotone(p: Presentation, upto: int) -> None:
    """Raise NonMonotone when truncations or frontier marks misbehave."""
    prev = p.truncate(0)
    left_frontier: dict[str, int] = {}
    for n in range(1, upto + 1):
        cur = p.truncate(n)
        if not prev.graph.is_subgraph_of(cur.graph):
            raise NonMonotone(f"level {n - 1} is not a subgraph of level {n}", level=n)
        if not prev.frontier <= prev.graph.vertex_set:
            raise NonMonotone("frontier outside vertex set", level=n - 1)
        for v in prev.closed_vertices:
            if v in cur.frontier:
                raise NonMonotone(f"vertex {v} re-entered the frontier", level=n, vertex=v)
            before = {e.id for e in prev.graph.incidence[v]}
            after = {e.id for e in cur.graph.incidence[v]}
            if before != after:
                raise NonMonotone(f"closed vertex {v} gained edges", level=n, vertex=v)
        prev = cur
    del left_frontier


# ---------------------------------------------------------------------------
# catalog helpers


def _e(a: str, b: str) -> tuple[str, str, str]:
    return (f"{a}-{b}", a, b)


def _tree_depth(n: int) -> int:
    """Depth of tree-like families at level n; grows slowly to keep levels small."""
    return 1 + n // 3


def _no_ends(n: int) -> list[EndCert]:
    return []


def _flags(lf: bool, one_point: bool, elc: bool, sb: bool, connected: bool = True) -> dict[str, bool]:
    return {
        "locally_finite": lf,
        "connected": connected,
        "one_point_omega": one_point,
        "ends_locally_compact": elc,
        "simply_branching": sb,
    }


def _singleton_key(v: str) -> str:
    return v


def _index(v: str, prefix: str) -> int | None:
    if v.startswith(prefix) and v[len(prefix):].isdigit():
        return int(v[len(prefix):])
    return None


# ---------------------------------------------------------------------------
# catalog families


def _consecutive_pairs(vs: Iterable[str], prefix: str) -> list[frozenset[str]]:
    """{prefix i, prefix i+1} for every i with both vertices in vs."""
    idx = {i for v in vs if (i := _index(v, prefix)) is not None}
    return [frozenset({f"{prefix}{i}", f"{prefix}{i + 1}"}) for i in sorted(idx) if i + 1 in idx]


def k2inf() -> Presentation:
    def build(n: int):
        us = [f"u{i}" for i in range(n)]
        edges = [_e(h, u) for u in us for h in ("x", "y")]
        return ["x", "y", *us], edges, {"x", "y"}

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=True,
        crit=finite_crit([{"x", "y"}]),
        sim_key=lambda v: "x" if v in ("x", "y") else v,
        flags=_flags(lf=False, one_point=True, elc=True, sb=True),
        path_family=lambda a, b: (lambda i: [a, f"u{i}", b]) if {a, b} == {"x", "y"} else None,
        end_count=0,
        provenance="PAPER",
    )
    return Presentation("k2inf", {}, build, cert, "K_{2,aleph0}: x, y joined through infinitely many u_i")


def kminf(m: int = 3) -> Presentation:
    if m < 2:
        raise ValueError("kminf needs m >= 2")
    hubs = [f"h{j}" for j in range(m)]
    hubset = frozenset(hubs)

    def build(n: int):
        us = [f"u{i}" for i in range(n)]
        return [*hubs, *us], [_e(h, u) for u in us for h in hubs], set(hubs)

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=True,
        crit=finite_crit([hubset]),
        sim_key=lambda v: "h0" if v in hubset else v,
        flags=_flags(lf=False, one_point=True, elc=True, sb=True),
        path_family=lambda a, b: (lambda i: [a, f"u{i}", b]) if {a, b} <= hubset and a != b else None,
        end_count=0,
        provenance="DERIVED",
    )
    return Presentation("kminf", {"m": m}, build, cert, f"K_{{{m},aleph0}}")


def ray() -> Presentation:
    def build(n: int):
        vs = [f"v{i}" for i in range(n + 1)]
        return vs, [_e(vs[i], vs[i + 1]) for i in range(n)], {vs[-1]}

    end = EndCert("w", lambda k: [f"v{i}" for i in range(k)], "v0 v1 v2 ...", frozenset(), lambda v: False)
    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=finite_crit([]),
        sim_key=_singleton_key,
        flags=_flags(lf=True, one_point=False, elc=True, sb=True),
        end_count=1,
        provenance="DERIVED",
    )
    return Presentation("ray", {}, build, cert, "one-way infinite path")


def double_ray() -> Presentation:
    def name(i: int) -> str:
        return f"v{i}" if i >= 0 else f"n{-i}"

    def build(n: int):
        vs = [name(i) for i in range(-n, n + 1)]
        edges = [_e(name(i), name(i + 1)) for i in range(-n, n)]
        return vs, edges, {name(-n), name(n)}

    ends = [
        EndCert("w_minus", lambda k: [name(-i) for i in range(k)], "v0 n1 n2 ...", frozenset(), lambda v: False),
        EndCert("w_plus", lambda k: [name(i) for i in range(k)], "v0 v1 v2 ...", frozenset(), lambda v: False),
    ]
    cert = Certificate(
        ends_at=lambda n: list(ends),
        ends_enumerable=True,
        crit=finite_crit([]),
        sim_key=_singleton_key,
        flags=_flags(lf=True, one_point=False, elc=True, sb=True),
        end_count=2,
        provenance="DERIVED",
    )
    return Presentation("double_ray", {}, build, cert, "two-way infinite path")


def grid() -> Presentation:
    def build(n: int):
        vs = [f"g{i}_{j}" for i in range(n + 1) for j in range(n + 1)]
        edges = []
        for i in range(n + 1):
            for j in range(n + 1):
                if i < n:
                    edges.append((f"h{i}_{j}", f"g{i}_{j}", f"g{i + 1}_{j}"))
                if j < n:
                    edges.append((f"v{i}_{j}", f"g{i}_{j}", f"g{i}_{j + 1}"))
        fr = {f"g{i}_{j}" for i in range(n + 1) for j in range(n + 1) if i == n or j == n}
        return vs, edges, fr

    end = EndCert("w", lambda k: [f"g{i}_0" for i in range(k)], "g0_0 g1_0 g2_0 ...", frozenset(), lambda v: False)
    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=finite_crit([]),
        sim_key=_singleton_key,
        flags=_flags(lf=True, one_point=False, elc=True, sb=True),
        end_count=1,
        provenance="DERIVED",
    )
    return Presentation("grid", {}, build, cert, "the quarter-plane grid N x N")


def dominated_ray() -> Presentation:
    def build(n: int):
        rs = [f"r{i}" for i in range(n + 1)]
        edges = [_e(rs[i], rs[i + 1]) for i in range(n)] + [_e("h", r) for r in rs]
        return ["h", *rs], edges, {"h", rs[-1]}

    end = EndCert("w", lambda k: [f"r{i}" for i in range(k)], "r0 r1 r2 ...", frozenset({"h"}), lambda v: v == "h")
    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=finite_crit([]),
        sim_key=lambda v: "h" if v in ("h", "w") else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=True),
        end_count=1,
        provenance="PAPER",
    )
    return Presentation("dominated_ray", {}, build, cert, "a ray with a hub adjacent to every ray vertex")


def ray_star() -> Presentation:
    def build(n: int):
        vs = ["c"]
        edges = []
        fr = {"c"}
        for k in range(1, n + 1):
            rk = [f"r{k}_{j}" for j in range(n)]
            vs += rk
            edges.append(_e("c", rk[0]))
            edges += [_e(rk[j], rk[j + 1]) for j in range(n - 1)]
            fr.add(rk[-1])
        return vs, edges, fr

    def ends_at(n: int) -> list[EndCert]:
        return [
            EndCert(
                f"w{k}",
                (lambda k: lambda m: [f"r{k}_{j}" for j in range(m)])(k),
                f"r{k}_0 r{k}_1 ...",
                frozenset(),
                lambda v: False,
                first_level=k,
            )
            for k in range(1, n + 1)
        ]

    cert = Certificate(
        ends_at=ends_at,
        ends_enumerable=True,
        crit=finite_crit([{"c"}]),
        sim_key=_singleton_key,
        flags=_flags(lf=False, one_point=True, elc=True, sb=True),
        end_count=None,
        provenance="PAPER",
    )
    return Presentation("ray_star", {}, build, cert, "infinitely many rays glued at a centre c")


def fig4() -> Presentation:
    def build(n: int):
        vs = ["u", "t"]
        edges = []
        for i in range(n):
            vs += [f"l{i}", f"m{i}", f"r{i}"]
            edges += [_e("u", f"l{i}"), _e("u", f"m{i}"), _e("t", f"m{i}"), _e("t", f"r{i}")]
        return vs, edges, {"u", "t"}

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=True,
        crit=finite_crit([{"u"}, {"t"}, {"u", "t"}]),
        sim_key=lambda v: "t" if v in ("u", "t") else v,
        flags=_flags(lf=False, one_point=True, elc=True, sb=True),
        path_family=lambda a, b: (lambda i: [a, f"m{i}", b]) if {a, b} == {"u", "t"} else None,
        end_count=0,
        provenance="PAPER",
        notes="edge structure reconstructed from the caption and surrounding prose",
    )
    return Presentation("fig4", {}, build, cert, "pendant leaves at u and t plus infinitely many u-t middles")


def fig5() -> Presentation:
    def build(n: int):
        vs = [f"v{i}" for i in range(n + 1)]
        edges = [_e(vs[i], vs[i + 1]) for i in range(n)]
        for i in range(n + 1):
            for j in range(n):
                vs.append(f"l{i}_{j}")
                edges.append(_e(f"v{i}", f"l{i}_{j}"))
        return vs, edges, {f"v{i}" for i in range(n + 1)}

    end = EndCert("w", lambda k: [f"v{i}" for i in range(k)], "v0 v1 v2 ...", frozenset(), lambda v: False)

    def rule(y: frozenset[str]) -> bool:
        return len(y) == 1 and _index(next(iter(y)), "v") is not None

    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=parametric_crit(
            rule,
            lambda vs: [frozenset({v}) for v in vs if _index(v, "v") is not None],
            "{v_i} for every i",
        ),
        sim_key=_singleton_key,
        flags=_flags(lf=False, one_point=False, elc=True, sb=True),
        end_count=1,
        provenance="PAPER",
        notes="a ray whose vertices each carry infinitely many pendant leaves",
    )
    return Presentation("fig5", {}, build, cert, "ray with infinitely many leaves at every vertex")


def crit_chain() -> Presentation:
    def build(n: int):
        a = [f"a{i}" for i in range(n + 1)]
        vs = list(a)
        edges = []
        for k in range(n + 1):
            for j in range(n):
                b = f"b{k}_{j}"
                vs.append(b)
                edges += [_e(a[i], b) for i in range(k + 1)]
        return vs, edges, set(a)

    def ray_k(m: int) -> list[str]:
        out = []
        i = 0
        while len(out) < m:
            out.append(f"a{i}")
            out.append(f"b{i + 1}_0")
            i += 1
        return out[:m]

    def is_a(v: str) -> bool:
        return _index(v, "a") is not None

    end = EndCert("w", ray_k, "a0 b1_0 a1 b2_0 a2 ...", None, is_a)

    def rule(y: frozenset[str]) -> bool:
        idx = [_index(v, "a") for v in y]
        return bool(idx) and None not in idx and set(idx) == set(range(len(y)))

    def gen(vs: frozenset[str]) -> list[frozenset[str]]:
        out = []
        k = 0
        while f"a{k}" in vs:
            out.append(frozenset(f"a{i}" for i in range(k + 1)))
            k += 1
        return out

    def paths(a: str, b: str):
        ia, ib = _index(a, "a"), _index(b, "a")
        if ia is None or ib is None or ia == ib:
            return None
        top = max(ia, ib)
        return lambda i: [a, f"b{top}_{i}", b]

    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=parametric_crit(rule, gen, "X_k = {a0..ak} for every k"),
        sim_key=lambda v: "a0" if is_a(v) or v == "w" else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=True),
        path_family=paths,
        end_count=1,
        provenance="PAPER",
    )
    return Presentation("crit_chain", {}, build, cert, "b in B_k joined to exactly a0..ak")


def tree_inf() -> Presentation:
    """T_aleph0; vertex t_s for each finite sequence s, level n keeps len+sum <= 2 + n//3."""

    def name(seq: tuple[int, ...]) -> str:
        return "t" + "".join(f"_{x}" for x in seq)

    def build(n: int):
        budget = 2 + n // 3
        vs, edges = [], []
        stack: list[tuple[int, ...]] = [()]
        while stack:
            s = stack.pop()
            vs.append(name(s))
            if s:
                edges.append(_e(name(s[:-1]), name(s)))
            cost = len(s) + sum(s)
            for x in range(budget - cost):
                stack.append(s + (x,))
        return vs, edges, set(vs)

    def rule(y: frozenset[str]) -> bool:
        return len(y) == 1 and next(iter(y)).startswith("t")

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=False,
        crit=parametric_crit(rule, lambda vs: [frozenset({v}) for v in vs], "{v} for every vertex v"),
        sim_key=_singleton_key,
        flags=_flags(lf=False, one_point=False, elc=False, sb=True),
        end_count=None,
        provenance="PAPER",
        notes="ends are the infinite integer sequences; not enumerated",
    )
    return Presentation("tree_inf", {}, build, cert, "the tree in which every vertex has infinite degree")


def _bits(depth: int) -> list[str]:
    out = [""]
    frontier = [""]
    for _ in range(depth):
        frontier = [s + c for s in frontier for c in "01"]
        out += frontier
    return out


def binary_fan() -> Presentation:
    """Binary tree; u also sees u01^k and u10^k, and x sees the root, 0^k and 1^k."""

    def build(n: int):
        d = _tree_depth(n)
        strs = _bits(d)
        vs = ["x"] + ["b" + s for s in strs]
        edges = [("x-b", "x", "b")]
        for k in range(1, d + 1):
            for c in "01":
                w = "b" + c * k
                edges.append((f"x-{w}", "x", w))
        for s in strs:
            u = "b" + s
            if len(s) < d:
                for c in "01":
                    edges.append((f"t-{u}{c}", u, u + c))
            for k in range(1, d - len(s)):
                for head, tail in (("0", "1"), ("1", "0")):
                    w = u + head + tail * k
                    edges.append((f"f-{u}-{w}", u, w))
        return vs, edges, set(vs)

    def paths(a: str, b: str):
        if {a, b} != {"x", "b"}:
            return None

        def inorder(k: int, within: frozenset[str] | None) -> list[str]:
            seq: list[str] = []

            def walk(s: str) -> None:
                # ``within`` is closed under tree ancestors, so pruning keeps the order
                if len(s) > k or (within is not None and "b" + s not in within):
                    return
                walk(s + "0")
                seq.append("b" + s)
                walk(s + "1")

            walk("0")
            return seq

        def path(i: int, within: frozenset[str] | None = None) -> list[str]:
            """The i-th path; with ``within`` only its trace on that vertex set."""
            body = inorder(i + 1, within)
            seq = [v for v in ("x", *body, "b") if within is None or v in within]
            return seq if a == "x" else seq[::-1]

        return path

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=False,
        crit=finite_crit([]),
        sim_key=lambda v: "x",
        flags=_flags(lf=False, one_point=False, elc=True, sb=False),
        path_family=paths,
        end_count=None,
        provenance="DERIVED",
        notes="stand-in for the drawn graph: u dominates u01^w and u10^w; x dominates 0^w and 1^w",
    )
    return Presentation("binary_fan", {}, build, cert, "binary tree with fan edges; every vertex of infinite degree")


def binary_flower() -> Presentation:
    def build(n: int):
        d = _tree_depth(n)
        strs = _bits(d)
        vs = ["b" + s for s in strs]
        edges = []
        for s in strs:
            u = "b" + s
            if len(s) < d:
                for c in "01":
                    edges.append((f"t-{u}{c}", u, u + c))
            if len(s) >= 2:
                edges.append((f"r-{u}", "b", u))
        fr = {"b"} | {"b" + s for s in strs if len(s) == d}
        return vs, edges, fr

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=False,
        crit=finite_crit([]),
        sim_key=lambda v: "b" if v == "b" or not v.startswith("b") else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=True),
        end_count=None,
        provenance="PAPER",
        notes="every end is dominated by the root b; end ids are not enumerated",
    )
    return Presentation("binary_flower", {}, build, cert, "binary tree whose root sees every vertex")


def fig16() -> Presentation:
    """Spine u0,u1,... with infinitely many u_i-u_{i+1} middles (stand-in)."""

    def build(n: int):
        us = [f"u{i}" for i in range(n + 1)]
        vs = list(us)
        edges = []
        for i in range(n):
            for j in range(n):
                m = f"m{i}_{j}"
                vs.append(m)
                edges += [_e(us[i], m), _e(m, us[i + 1])]
        return vs, edges, set(us)

    def ray_k(k: int) -> list[str]:
        out = []
        i = 0
        while len(out) < k:
            out += [f"u{i}", f"m{i}_0"]
            i += 1
        return out[:k]

    end = EndCert("w", ray_k, "u0 m0_0 u1 m1_0 ...", frozenset(), lambda v: False)

    def rule(y: frozenset[str]) -> bool:
        idx = sorted(_index(v, "u") if _index(v, "u") is not None else -10 for v in y)
        return len(idx) == 2 and idx[0] >= 0 and idx[1] == idx[0] + 1

    def gen(vs: frozenset[str]) -> list[frozenset[str]]:
        return _consecutive_pairs(vs, "u")

    def paths(a: str, b: str):
        ia, ib = _index(a, "u"), _index(b, "u")
        if ia is None or ib is None or ia == ib:
            return None
        lo, hi = min(ia, ib), max(ia, ib)

        def path(k: int) -> list[str]:
            seq = [f"u{lo}"]
            for i in range(lo, hi):
                seq += [f"m{i}_{k}", f"u{i + 1}"]
            return seq if ia < ib else seq[::-1]

        return path

    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=parametric_crit(rule, gen, "{u_i, u_i+1} for every i"),
        sim_key=lambda v: "u0" if _index(v, "u") is not None or v == "w" else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=True),
        path_family=paths,
        end_count=1,
        provenance="DERIVED",
        notes="stand-in: the undominated end lies in the class of the spine vertices",
    )
    return Presentation("fig16", {}, build, cert, "spine with K_{2,aleph0} between consecutive spine vertices")


def fig17() -> Presentation:
    """Two fig16 spines joined by rungs u_i t_i (stand-in, not simply branching)."""

    def build(n: int):
        vs, edges = [], []
        for s in ("u", "t"):
            vs += [f"{s}{i}" for i in range(n + 1)]
            for i in range(n):
                for j in range(n):
                    m = f"m{s}{i}_{j}"
                    vs.append(m)
                    edges += [_e(f"{s}{i}", m), _e(m, f"{s}{i + 1}")]
        edges += [_e(f"u{i}", f"t{i}") for i in range(n + 1)]
        fr = {f"{s}{i}" for s in "ut" for i in range(n + 1)}
        return vs, edges, fr

    def ray_k(k: int) -> list[str]:
        out = []
        i = 0
        while len(out) < k:
            out += [f"u{i}", f"mu{i}_0"]
            i += 1
        return out[:k]

    end = EndCert("w", ray_k, "u0 mu0_0 u1 mu1_0 ...", frozenset(), lambda v: False)

    def spine(v: str) -> tuple[str, int] | None:
        for s in "ut":
            i = _index(v, s)
            if i is not None:
                return s, i
        return None

    def rule(y: frozenset[str]) -> bool:
        pos = [spine(v) for v in y]
        if len(pos) != 2 or None in pos:
            return False
        (s1, i1), (s2, i2) = sorted(pos)
        return s1 == s2 and abs(i1 - i2) == 1

    def gen(vs: frozenset[str]) -> list[frozenset[str]]:
        return _consecutive_pairs(vs, "u") + _consecutive_pairs(vs, "t")

    def paths(a: str, b: str):
        pa, pb = spine(a), spine(b)
        if pa is None or pb is None or a == b:
            return None

        def walk(s: str, i: int, j: int, k: int) -> list[str]:
            seq = [f"{s}{i}"]
            step = 1 if j >= i else -1
            for x in range(i, j, step):
                lo = min(x, x + step)
                seq += [f"m{s}{lo}_{k}", f"{s}{x + step}"]
            return seq

        def path(k: int) -> list[str]:
            (sa, ia), (sb, ib) = pa, pb
            if sa == sb:
                return walk(sa, ia, ib, k)
            top = max(ia, ib) + 1 + k
            return walk(sa, ia, top, k) + walk(sb, top, ib, k)

        return path

    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=parametric_crit(rule, gen, "{u_i,u_i+1} and {t_i,t_i+1} for every i"),
        sim_key=lambda v: "u0" if spine(v) is not None or v == "w" else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=False),
        path_family=paths,
        end_count=1,
        provenance="DERIVED",
        notes="stand-in: spines are inseparable by finite cuts but not strongly linked",
    )
    return Presentation("fig17", {}, build, cert, "two spines of K_{2,aleph0} links joined by rungs")


def grid_k2() -> Presentation:
    """4 x N grid; column edges and (1,0)(2,0) replaced by K_{2,aleph0}."""

    def build(n: int):
        vs = [f"g{k}_{i}" for k in range(4) for i in range(n + 1)]
        edges = []
        for k in range(4):
            for i in range(n):
                for j in range(n):
                    m = f"m{k}_{i}_{j}"
                    vs.append(m)
                    edges += [_e(f"g{k}_{i}", m), _e(m, f"g{k}_{i + 1}")]
        for i in range(n + 1):
            for k in range(3):
                if (k, i) == (1, 0):
                    continue
                edges.append((f"h{k}_{i}", f"g{k}_{i}", f"g{k + 1}_{i}"))
        for j in range(n):
            m = f"mh_{j}"
            vs.append(m)
            edges += [_e("g1_0", m), _e(m, "g2_0")]
        return vs, edges, {f"g{k}_{i}" for k in range(4) for i in range(n + 1)}

    def ray_k(m: int) -> list[str]:
        out = []
        i = 0
        while len(out) < m:
            out += [f"g0_{i}", f"m0_{i}_0"]
            i += 1
        return out[:m]

    end = EndCert("w", ray_k, "g0_0 m0_0_0 g0_1 ...", frozenset(), lambda v: False)

    def pos(v: str) -> tuple[int, int] | None:
        if v.startswith("g") and "_" in v:
            k, i = v[1:].split("_", 1)
            if k.isdigit() and i.isdigit():
                return int(k), int(i)
        return None

    def rule(y: frozenset[str]) -> bool:
        ps = sorted(pos(v) or (-1, -1) for v in y)
        if len(ps) != 2 or ps[0][0] < 0:
            return False
        (k1, i1), (k2, i2) = ps
        return (k1 == k2 and i2 == i1 + 1) or ps == [(1, 0), (2, 0)]

    def gen(vs: frozenset[str]) -> list[frozenset[str]]:
        out = [frozenset({"g1_0", "g2_0"})]
        for k in range(4):
            out += _consecutive_pairs(vs, f"g{k}_")
        return out

    cert = Certificate(
        ends_at=lambda n: [end],
        ends_enumerable=True,
        crit=parametric_crit(rule, gen, "column pairs {(k,i),(k,i+1)} and {(1,0),(2,0)}"),
        sim_key=lambda v: "g0_0" if pos(v) is not None or v == "w" else v,
        flags=_flags(lf=False, one_point=False, elc=True, sb=False),
        end_count=1,
        provenance="DERIVED",
    )
    return Presentation("grid_k2", {}, build, cert, "4 x N grid with K_{2,aleph0} column links")


def constant(g: Multigraph, name: str = "constant") -> Presentation:
    """A finite graph presented as a constant sequence."""

    def build(n: int):
        return g.vertices, [(e.id, e.u, e.v) for e in g.edges], set()

    cert = Certificate(
        ends_at=_no_ends,
        ends_enumerable=True,
        crit=finite_crit([]),
        sim_key=_singleton_key,
        flags=_flags(lf=True, one_point=False, elc=True, sb=True, connected=g.is_connected()),
        end_count=0,
        provenance="TRIVIAL",
    )
    return Presentation(name, {"graph": g.to_json()}, build, cert, "finite graph")


def custom(levels: Sequence[Mapping]) -> Presentation:
    """User presentation from level diffs; the last level repeats forever."""
    if not levels:
        raise NonMonotone("custom presentation needs at least one level")
    states = []
    vs: list[str] = []
    es: list[tuple[str, str, str]] = []
    for i, diff in enumerate(levels):
        vs = vs + [str(v) for v in diff.get("add_vertices", [])]
        es = es + [tuple(str(x) for x in e) for e in diff.get("add_edges", [])]
        fr = {str(v) for v in diff.get("frontier", [])}
        states.append((list(vs), list(es), fr))
    last = states[-1]
    states[-1] = (last[0], last[1], set())  # the final level is closed

    def build(n: int):
        return states[min(n, len(states) - 1)]

    p = Presentation("custom", {"levels": len(levels)}, build, None, "user level diffs")
    check_monotone(p, len(levels))
    return p


CATALOG: dict[str, Callable[..., Presentation]] = {
    "k2inf": k2inf,
    "kminf": kminf,
    "dominated_ray": dominated_ray,
    "ray_star": ray_star,
    "fig4": fig4,
    "fig5": fig5,
    "crit_chain": crit_chain,
    "tree_inf": tree_inf,
    "binary_fan": binary_fan,
    "binary_flower": binary_flower,
    "fig16": fig16,
    "fig17": fig17,
    "grid_k2": grid_k2,
    "ray": ray,
    "double_ray": double_ray,
    "grid": grid,
}


def family(name: str, **params: object) -> Presentation:
    try:
        ctor = CATALOG[name]
    except KeyError:
        raise UnknownFamily(f"unknown family {name!r}", known=sorted(CATALOG)) from None
    return ctor(**params)


def load(spec: Mapping) -> Presentation:
    """Build a presentation from its JSON description."""
    if "family" in spec:
        return family(spec["family"], **dict(spec.get("params") or {}))
    if "custom" in spec:
        return custom(spec["custom"]["levels"])
    if "graph" in spec:
        return constant(Multigraph.from_json(spec["graph"]))
    raise UnknownFamily("presentation JSON needs 'family', 'custom' or 'graph'")


def closed_component_keys(lg: LeveledGraph, x: Iterable[str]) -> set[frozenset[str]]:
    """Vertex sets of the closed components of ``lg - x``."""
    return {c for c, _ in components(lg.graph, x) if not (c & lg.frontier)}
