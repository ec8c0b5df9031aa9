"""Separations in component form, finite tangle enumeration and the restricted system S′."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Iterable, Sequence

from .errors import (
    AmbientMismatch,
    ChainGap,
    IncompleteSample,
    InvalidSeparation,
    NotInSPrime,
    TooLarge,
)
from .invsys import FPoint, Thread, crit_at, is_infinite_class
from .multigraph import Multigraph, components, min_id, natkey, sort_ids
from .presentation import Presentation
from .structure import Verdict, component_report

MAX_TANGLE_VERTICES = 6


@dataclass(frozen=True)
class Separation:
    """Oriented separation (A, B) stored as a separator X and a set of component keys.

    A = V minus the chosen components, B = X plus the chosen components.
    Equality only looks at the two vertex sides.
    """

    a: frozenset[str]
    b: frozenset[str]
    x: frozenset[str] = field(compare=False)
    side: frozenset[str] = field(compare=False)
    comps: tuple[tuple[str, frozenset[str]], ...] = field(compare=False, repr=False)

    @property
    def order(self) -> int:
        return len(self.x)

    @property
    def ground(self) -> frozenset[str]:
        return self.a | self.b

    def inverse(self) -> "Separation":
        rest = frozenset(k for k, _ in self.comps) - self.side
        return Separation(self.b, self.a, self.x, rest, self.comps)

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def sort_key(self) -> tuple:
        return (len(self.x), [natkey(v) for v in sort_ids(self.x)], [natkey(k) for k in sort_ids(self.side)])

    def to_json(self) -> dict:
        return {
            "X": sort_ids(self.x),
            "side": sort_ids(self.side),
            "A": sort_ids(self.a),
            "B": sort_ids(self.b),
        }

    def __repr__(self) -> str:
        return f"Sep(X={sort_ids(self.x)}, side={sort_ids(self.side)})"


def _comp_table(g: Multigraph, x: frozenset[str]) -> tuple[tuple[str, frozenset[str]], ...]:
    return tuple(sorted(((min_id(c), c) for c, _ in components(g, x)), key=lambda kc: natkey(kc[0])))


def _from_table(g: Multigraph, x: frozenset[str], side: frozenset[str], table) -> Separation:
    chosen = frozenset().union(*(c for k, c in table if k in side))
    return Separation(g.vertex_set - chosen, x | chosen, x, side, table)


def separation(g: Multigraph, x: Iterable[str], side: Iterable[str]) -> Separation:
    """(X, 𝒞) with 𝒞 given by component keys (minimal vertex ids)."""
    xs, sd = frozenset(x), frozenset(side)
    table = _comp_table(g, xs)
    unknown = sd - {k for k, _ in table}
    if unknown:
        raise InvalidSeparation("side names no component of G - X", keys=sort_ids(unknown), X=sort_ids(xs))
    return _from_table(g, xs, sd, table)


def sigma(g: Multigraph, x: Iterable[str]) -> list[Separation]:
    """σ_X: one s_{C→X} = (X ∪ C, V ∖ C) per component C."""
    xs = frozenset(x)
    table = _comp_table(g, xs)
    keys = frozenset(k for k, _ in table)
    return [_from_table(g, xs, keys - {k}, table) for k, _ in table]


def separations_at(g: Multigraph, x: Iterable[str]) -> list[Separation]:
    """Every oriented separation with separator X (both orientations)."""
    xs = frozenset(x)
    table = _comp_table(g, xs)
    keys = [k for k, _ in table]
    out = []
    for r in range(len(keys) + 1):
        for side in combinations(keys, r):
            out.append(_from_table(g, xs, frozenset(side), table))
    return out


def all_separations(g: Multigraph, k: int) -> list[Separation]:
    """One representative per unoriented separation of order < k."""
    seen: set[Separation] = set()
    out = []
    for r in range(min(k, len(g.vertices) + 1)):
        for x in combinations(g.vertices, r):
            for s in separations_at(g, x):
                if s not in seen:
                    seen.add(s)
                    seen.add(s.inverse())
                    out.append(s)
    return out


def sep_leq(s: Separation, t: Separation) -> bool:
    return s.a <= t.a and s.b >= t.b


def sep_compare(s: Separation, t: Separation) -> str:
    if s.ground != t.ground:
        raise AmbientMismatch("separations live on different vertex sets")
    le, ge = sep_leq(s, t), sep_leq(t, s)
    if le and ge:
        return "equal"
    return "leq" if le else "geq" if ge else "incomparable"


@dataclass(frozen=True)
class Orientation:
    seps: frozenset[Separation]

    @classmethod
    def of(cls, seps: Iterable[Separation]) -> "Orientation":
        return cls(frozenset(seps))

    def __iter__(self):
        return iter(sorted(self.seps, key=Separation.sort_key))

    def __contains__(self, s: object) -> bool:
        return s in self.seps

    def __len__(self) -> int:
        return len(self.seps)

    def to_json(self) -> list:
        return [s.to_json() for s in self]


@dataclass(frozen=True)
class OrientationViolation:
    r: Separation
    s: Separation

    def to_json(self) -> dict:
        return {"violation": "inconsistent", "r": self.r.to_json(), "s": self.s.to_json()}


def _clash(r: Separation, s: Separation) -> bool:
    """r⃖ < s⃗."""
    ri = r.inverse()
    return sep_leq(ri, s) and ri != s


def check_orientation(o: Iterable[Separation]) -> OrientationViolation | None:
    items = sorted(set(o), key=Separation.sort_key)
    for r in items:
        for s in items:
            if r != s and _clash(r, s):
                return OrientationViolation(r, s)
    return None


@dataclass(frozen=True)
class StarReport:
    is_star: bool
    interior: frozenset[str]

    def to_json(self) -> dict:
        return {"is_star": self.is_star, "interior": sort_ids(self.interior)}


def _star_pair(r: Separation, s: Separation) -> bool:
    return sep_leq(r, s.inverse())


def check_star(sigma_: Iterable[Separation]) -> StarReport:
    items = list(set(sigma_))
    ok = all(_star_pair(r, s) for r in items for s in items if r != s)
    if not items:
        return StarReport(True, frozenset())
    interior = frozenset.intersection(*(s.b for s in items))
    return StarReport(ok, interior)


StarSelector = Callable[[Sequence[Separation], frozenset], bool]


def interior_below(k: int) -> StarSelector:
    """Forbid every nonempty star whose interior has fewer than k vertices."""
    return lambda star, interior: len(interior) < k


def find_forbidden_star(o: Iterable[Separation], k: int) -> tuple[Separation, ...] | None:
    """A nonempty star inside o with interior smaller than k, found by depth-first search."""
    items = sorted(set(o), key=Separation.sort_key)

    def rec(start: int, chosen: list[Separation], interior: frozenset[str]) -> tuple | None:
        for i in range(start, len(items)):
            s = items[i]
            if chosen and (s.b >= interior):
                continue  # cannot shrink the interior
            if all(_star_pair(s, c) and _star_pair(c, s) for c in chosen):
                inner = s.b if not chosen else interior & s.b
                chosen.append(s)
                if len(inner) < k:
                    return tuple(chosen)
                hit = rec(i + 1, chosen, inner)
                chosen.pop()
                if hit:
                    return hit
        return None

    return rec(0, [], frozenset())


def _find_star_by(o: Iterable[Separation], forbidden: StarSelector) -> tuple[Separation, ...] | None:
    items = sorted(set(o), key=Separation.sort_key)
    for r in range(1, len(items) + 1):
        for star in combinations(items, r):
            rep = check_star(star)
            if rep.is_star and forbidden(star, rep.interior):
                return star
    return None


def enumerate_tangles_finite(g: Multigraph, k: int, forbidden: StarSelector | None = None) -> list[Orientation]:
    """All consistent orientations of the order-<k separations avoiding forbidden stars.

    With the default selector every σ_X is forbidden, so a tangle picks one
    component f(X) per separator and is determined by that choice; the search
    runs over such choices. A custom selector falls back to all 2^m orientations.
    """
    if len(g.vertices) > MAX_TANGLE_VERTICES:
        raise TooLarge(f"tangle enumeration is capped at {MAX_TANGLE_VERTICES} vertices", vertices=len(g.vertices))
    if forbidden is not None:
        return _tangles_generic(g, k, forbidden)
    seps = []
    for r in range(min(k, len(g.vertices) + 1)):
        for x in combinations(g.vertices, r):
            seps.append(frozenset(x))
    per_x: list[list[list[Separation]]] = []
    for x in seps:
        options = []
        table = _comp_table(g, x)
        if not table:
            # X = V: the degenerate (V, V) is a singleton star with interior V
            options.append([_from_table(g, x, frozenset(), table)])
        for key, _ in table:
            picks = [s for s in separations_at(g, x) if key in s.side]
            options.append(picks)
        per_x.append(options)
    out: list[Orientation] = []
    chosen: list[Separation] = []

    def conflict(r: Separation, s: Separation) -> bool:
        # inconsistency, or a two-element star whose interior is already too small
        if _clash(r, s) or _clash(s, r):
            return True
        return r != s and len(r.b & s.b) < k and _star_pair(r, s) and _star_pair(s, r)

    def rec(i: int) -> None:
        if i == len(per_x):
            if find_forbidden_star(chosen, k) is None:
                out.append(Orientation.of(chosen))
            return
        for picks in per_x[i]:
            if any(conflict(r, s) for r in picks for s in chosen):
                continue
            chosen.extend(picks)
            rec(i + 1)
            del chosen[len(chosen) - len(picks):]

    rec(0)
    return sorted(out, key=lambda o: [s.sort_key() for s in o])


def _tangles_generic(g: Multigraph, k: int, forbidden: StarSelector) -> list[Orientation]:
    reps = all_separations(g, k)
    if len(reps) > 16:
        raise TooLarge("custom star selectors enumerate all orientations; too many separations", separations=len(reps))
    out = []
    for bits in product((0, 1), repeat=len(reps)):
        o = [s if b == 0 else s.inverse() for s, b in zip(reps, bits)]
        if check_orientation(o) is None and _find_star_by(o, forbidden) is None:
            out.append(Orientation.of(o))
    return sorted(out, key=lambda o: [s.sort_key() for s in o])


def u_of(tau: Iterable[Separation], x: Iterable[str]) -> list[frozenset[str]]:
    """U(τ, X): the component families 𝒞 with (X, 𝒞) ∈ τ."""
    xs = frozenset(x)
    here = [s for s in tau if s.x == xs]
    if not here:
        raise IncompleteSample("orientation has no separation with this separator", X=sort_ids(xs))
    table = here[0].comps
    keys = [k for k, _ in table]
    have = set(here)
    fam = []
    for r in range(len(keys) + 1):
        for side in combinations(keys, r):
            chosen = next((t for t in here if t.side == frozenset(side)), None)
            if chosen is not None:
                fam.append(frozenset(side))
            elif not any(t.side == frozenset(keys) - frozenset(side) for t in have):
                raise IncompleteSample("bipartition not oriented", X=sort_ids(xs), side=list(side))
    return sorted(fam, key=lambda f: (len(f), [natkey(v) for v in sort_ids(f)]))


def x_tau(thread: Thread) -> frozenset[str] | None:
    """The critical set of the first filter point along an 𝔉-thread, if any."""
    for _, pt in thread.points:
        if isinstance(pt, FPoint) and pt.kind == "filter":
            return pt.y
    return None


def _growing_split(p: Presentation, s: Separation, y: frozenset[str], n: int) -> tuple[bool, bool]:
    rep = component_report(p, s.x, n)
    members = rep.with_nbhd(y, closed_only=False)
    inside = [c for c in members if c.key in s.side]
    outside = [c for c in members if c.key not in s.side]
    return is_infinite_class(p, s.x, inside, n), is_infinite_class(p, s.x, outside, n)


def in_S_prime(p: Presentation, s: Separation, n: int) -> Verdict:
    """Witnessed when no critical set has growing parts on both sides; Refuted otherwise."""
    for y in crit_at(p, s.x, n):
        a, b = _growing_split(p, s, y, n)
        if a and b:
            return Verdict("Refuted", sort_ids(y), p.certificate() is not None, {"split": sort_ids(y)})
    if p.certificate() is not None:
        return Verdict("Witnessed", True, True)
    return Verdict("Unknown", None, False, {"reason": "critical sets are only witnessed at this depth"})


def level_separation(p: Presentation, x: Iterable[str], side: Iterable[str], n: int) -> Separation:
    return separation(p.truncate(n).graph, x, side)


def fpoint_orientation(p: Presentation, thread: Thread, seps: Iterable[Separation], n: int) -> Orientation:
    """Orient each sampled S′ separation toward the side that holds the thread's point."""
    chain = {i: pt for i, pt in thread.points}
    out = []
    for s in seps:
        if s.x not in chain:
            raise ChainGap("separator is not an index of the thread", X=sort_ids(s.x))
        if in_S_prime(p, s, n).status == "Refuted":
            raise NotInSPrime("a critical set has growing parts on both sides", separation=s.to_json())
        pt: FPoint = chain[s.x]
        if pt.kind == "principal":
            big = pt.key in s.side
        else:
            inside, outside = _growing_split(p, s, pt.y, n)
            if inside != outside:
                big = inside
            else:
                members = component_report(p, s.x, n).with_nbhd(pt.y, closed_only=False)
                hits = sum(c.key in s.side for c in members)
                big = 2 * hits > len(members)
        out.append(s if big else s.inverse())
    return Orientation.of(out)
