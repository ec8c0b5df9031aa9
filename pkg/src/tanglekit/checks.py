"""Seeded invariant sweeps over the catalog, shared by the CLI and the test-suite."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import InsufficientDepth, NotDeltaMember, TanglekitError
from .invsys import (
    FPoint,
    GammaIndex,
    delta_canonical,
    delta_dominate,
    delta_join,
    delta_member,
    f_bond,
    f_level,
    gamma_join,
    gamma_leq,
    is_infinite_class,
)
from .multigraph import sort_ids
from .presentation import CATALOG, Presentation, check_monotone, family
from .structure import component_report
from .tangles import check_star, sigma

# families small enough for dense random sampling
SWEEP_FAMILIES = ("k2inf", "kminf", "ray", "double_ray", "dominated_ray", "ray_star", "fig4", "fig5",
                  "crit_chain", "fig16", "fig17", "grid")
CRIT_FAMILIES = ("k2inf", "kminf", "ray_star", "fig4", "fig5", "crit_chain", "fig16")


@dataclass
class SweepReport:
    name: str
    seed: int
    trials: int = 0
    skipped: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, **detail: object) -> None:
        self.failures.append(detail)

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "skipped": self.skipped,
            "failures": self.failures[:20],
            "failure_count": len(self.failures),
            "ok": self.ok,
        }


def _random_chain(rng: random.Random, p: Presentation, n: int, steps: int = 3) -> list[frozenset[str]]:
    """Nested separators, seeded with a critical set when one is available."""
    g = p.truncate(n).graph
    verts = list(g.vertices)
    cert = p.certificate()
    crit = cert.crit.within(g.vertex_set) if cert is not None else []
    x: set[str] = set()
    if crit and rng.random() < 0.6:
        x |= rng.choice(crit)
    x |= set(rng.sample(verts, min(len(verts), rng.randint(0, 1))))
    chain = [frozenset(x)]
    for _ in range(steps - 1):
        if crit and rng.random() < 0.4:
            x |= rng.choice(crit)
        x |= set(rng.sample(verts, min(len(verts), rng.randint(0, 2))))
        chain.append(frozenset(x))
    return chain


def sweep_monotone(upto: int = 15, names: tuple[str, ...] | None = None) -> SweepReport:
    rep = SweepReport("monotone", 0)
    for name in names or tuple(CATALOG):
        rep.trials += 1
        try:
            check_monotone(family(name), upto)
        except TanglekitError as err:
            rep.fail(family=name, error=err.to_json())
    return rep


def sweep_bonding(seed: int = 0, count: int = 1000, max_depth: int = 15) -> SweepReport:
    """Composition of 𝔉 bonds, principal commutation with φ, and unique lifting of filters."""
    rng = random.Random(seed)
    rep = SweepReport("bonding", seed)
    pres = {name: family(name) for name in SWEEP_FAMILIES}
    for _ in range(count):
        name = rng.choice(SWEEP_FAMILIES)
        p = pres[name]
        n = rng.randint(4, max_depth)
        x, x1, x2 = _random_chain(rng, p, n)
        rep.trials += 1
        lv2 = f_level(p, x2, n)
        for pt in lv2.points + lv2.pending:
            try:
                mid = f_bond(p, x1, x2, pt, n)
                via = f_bond(p, x, x1, mid, n)
                direct = f_bond(p, x, x2, pt, n)
            except InsufficientDepth:
                rep.skipped += 1
                continue
            if via != direct:
                rep.fail(law="composition", family=name, level=n, X=sort_ids(x), X1=sort_ids(x1),
                         X2=sort_ids(x2), point=repr(pt), direct=repr(direct), composite=repr(via))
            if pt.kind == "principal":
                phi = component_report(p, x, n).containing(pt.key).key
                if direct.kind != "principal" or direct.key != phi:
                    rep.fail(law="principal commutation", family=name, level=n, point=repr(pt), image=repr(direct))
        lv1 = f_level(p, x1, n)
        for pt in f_level(p, x, n).points:
            if pt.kind != "filter":
                continue
            lifts = []
            for q in lv1.points + lv1.pending:
                try:
                    if f_bond(p, x, x1, q, n) == pt:
                        lifts.append(q)
                except InsufficientDepth:
                    rep.skipped += 1
            if lifts != [FPoint.filter(pt.y)]:
                rep.fail(law="unique lifting", family=name, level=n, X=sort_ids(x), X1=sort_ids(x1),
                         point=repr(pt), lifts=[repr(q) for q in lifts])
    return rep


def random_gamma(rng: random.Random, p: Presentation, n: int, x: frozenset[str], classes: int = 3) -> GammaIndex:
    keys = [c.key for c in component_report(p, x, n).all]
    labels = {k: rng.randrange(classes) for k in keys}
    return GammaIndex.of(x, [[k for k in keys if labels[k] == c] for c in range(classes)])


def random_delta(rng: random.Random, p: Presentation, n: int, x: frozenset[str]) -> GammaIndex:
    """Refine 𝔓_X by peeling off components that stopped growing."""
    base = delta_canonical(p, x, n)
    comps = component_report(p, x, n).by_key
    out: list[list[str]] = []
    for cls in base.classes:
        members = [comps[k] for k in sorted(cls)]
        settled = [c for c in members if not is_infinite_class(p, x, [c], n)]
        peel = [c.key for c in settled if rng.random() < 0.5]
        rest = [k for k in cls if k not in peel]
        # peeled components form small finite classes of their own
        while peel:
            size = rng.randint(1, 2)
            out.append(peel[:size])
            peel = peel[size:]
        if rest:
            out.append(rest)
    return GammaIndex.of(x, out)


def sweep_poset(seed: int = 0, gamma_pairs: int = 500, delta_pairs: int = 200,
                delta_members: int = 200, max_depth: int = 10) -> SweepReport:
    rng = random.Random(seed)
    rep = SweepReport("poset", seed)
    pres = {name: family(name) for name in SWEEP_FAMILIES}

    def pick(names: tuple[str, ...]) -> tuple[str, Presentation, int]:
        name = rng.choice(names)
        return name, pres[name], rng.randint(4, max_depth)

    for _ in range(gamma_pairs):
        name, p, n = pick(SWEEP_FAMILIES)
        xa, xb = _random_chain(rng, p, n, 1)[0], _random_chain(rng, p, n, 1)[0]
        a, b = random_gamma(rng, p, n, xa), random_gamma(rng, p, n, xb)
        j = gamma_join(p, a, b, n)
        rep.trials += 1
        if not (gamma_leq(p, a, j, n) and gamma_leq(p, b, j, n)):
            rep.fail(law="gamma join is an upper bound", family=name, level=n, a=a.to_json(), b=b.to_json(), join=j.to_json())
    for _ in range(delta_pairs):
        name, p, n = pick(CRIT_FAMILIES)
        xa, xb = _random_chain(rng, p, n, 1)[0], _random_chain(rng, p, n, 1)[0]
        a, b = random_delta(rng, p, n, xa), random_delta(rng, p, n, xb)
        rep.trials += 1
        if not (delta_member(p, a, n) and delta_member(p, b, n)):
            rep.fail(law="sampler leaves Δ", family=name, level=n, a=a.to_json(), b=b.to_json())
            continue
        j = delta_join(p, a, b, n)
        if not (delta_member(p, j, n) and gamma_leq(p, a, j, n) and gamma_leq(p, b, j, n)):
            rep.fail(law="delta join", family=name, level=n, a=a.to_json(), b=b.to_json(), join=j.to_json())
    for _ in range(delta_members):
        name, p, n = pick(CRIT_FAMILIES)
        x = _random_chain(rng, p, n, 1)[0]
        a = random_delta(rng, p, n, x)
        rep.trials += 1
        try:
            d = delta_dominate(p, a, n)
        except NotDeltaMember as err:
            rep.fail(law="delta dominate rejected a member", family=name, level=n, index=a.to_json(), error=err.to_json())
            continue
        canonical = delta_canonical(p, d.x, n)
        if d != canonical or not delta_member(p, d, n) or not gamma_leq(p, a, d, n):
            rep.fail(law="delta dominate", family=name, level=n, index=a.to_json(), result=d.to_json())
    return rep


def sweep_stars(max_level: int = 10, names: tuple[str, ...] = SWEEP_FAMILIES) -> SweepReport:
    """σ_X is a star with interior X whenever G - X has a component."""
    rep = SweepReport("stars", 0)
    rng = random.Random(0)
    for name in names:
        p = family(name)
        for n in range(1, max_level + 1):
            for x in _random_chain(rng, p, n):
                sig = sigma(p.truncate(n).graph, x)
                if not sig:
                    continue
                rep.trials += 1
                st = check_star(sig)
                if not st.is_star or st.interior != x:
                    rep.fail(family=name, level=n, X=sort_ids(x), interior=sort_ids(st.interior))
    return rep


SWEEPS: dict[str, Callable[..., SweepReport]] = {
    "monotone": sweep_monotone,
    "bonding": sweep_bonding,
    "poset": sweep_poset,
    "stars": sweep_stars,
}
