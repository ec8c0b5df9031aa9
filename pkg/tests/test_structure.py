import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import _components
from tanglekit.errors import Disconnected, DominatorsUnbounded, NotCritical, UnknownEnd, UnknownVertex
from tanglekit.multigraph import sort_ids
from tanglekit.presentation import custom, family
from tanglekit.structure import (
    bipartite_minor_witness,
    compactness_predicates,
    component_report,
    crit_of,
    defining_sequence,
    directions,
    dominates,
    enumerate_crit,
    growth_candidates,
    not_finitely_separable,
    quotient_points,
    strongly_linked,
)


def crit_sets(p, s, n, k=2):
    return sorted(sort_ids(w.y) for w in enumerate_crit(p, s, n, k))


def test_fig4_critical_sets():
    assert crit_sets(family("fig4"), 3, 40, 10) == [["t"], ["t", "u"], ["u"]]


def test_k2inf_and_crit_chain():
    assert crit_sets(family("k2inf"), 3, 20) == [["x", "y"]]
    ws = enumerate_crit(family("crit_chain"), 6, 20)
    assert [sort_ids(w.y) for w in ws] == [[f"a{j}" for j in range(i + 1)] for i in range(6)]
    assert all(w.certified for w in ws)


@pytest.mark.parametrize("name", ["ray", "grid", "double_ray"])
def test_no_critical_sets(name):
    assert enumerate_crit(family(name), 3, 14) == []


def test_growth_needs_a_window():
    assert growth_candidates(family("k2inf"), 2) == []
    assert sorted(growth_candidates(family("k2inf"), 8)) == ["x", "y"]


def test_size_bound_is_capped():
    with pytest.raises(ValueError):
        enumerate_crit(family("k2inf"), 7, 5)


def _brute_crit(lg, x, k):
    """Y ⊆ X with at least k closed components of G - X whose neighbourhood is exactly Y."""
    g = lg.graph
    adj = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    counts = {}
    for comp in _components(g.vertex_set, adj, x):
        if comp & lg.frontier:
            continue
        nb = frozenset(w for v in comp for w in adj[v] if w in x)
        counts[nb] = counts.get(nb, 0) + 1
    return sorted((sort_ids(y) for y, c in counts.items() if c >= k))


@given(st.sampled_from(["k2inf", "fig4", "fig5", "crit_chain", "fig16", "ray_star", "grid"]),
       st.integers(3, 10), st.integers(0, 2**16))
@settings(max_examples=80, deadline=None)
def test_crit_of_matches_brute_force(name, n, seed):
    p = family(name)
    lg = p.truncate(n)
    rng = random.Random(seed)
    x = frozenset(rng.sample(lg.graph.vertices, rng.randint(0, min(4, len(lg.graph.vertices)))))
    got = sorted(sort_ids(w.y) for w in crit_of(p, x, n))
    assert got == _brute_crit(lg, x, 2)


def test_component_report_splits_open_and_closed():
    rep = component_report(family("ray"), ["v2"], 6)
    assert [c.key for c in rep.closed] == ["v0"]
    assert [c.key for c in rep.open] == ["v3"]
    assert rep.containing("v5").key == "v3"


def test_directions_match_certified_ends():
    [d] = directions(family("ray"), 6)
    assert d.end == "w"
    assert [c for _, c in d.thread] == [f"v{i}" for i in range(7)]
    assert sorted(e.end for e in directions(family("double_ray"), 6)) == ["w_minus", "w_plus"]
    assert len(directions(family("ray_star"), 6)) == 6


def test_dominance():
    assert dominates(family("dominated_ray"), "h", "w", 10).status == "Witnessed"
    refuted = dominates(family("ray_star"), "c", "w1", 10)
    assert refuted.status == "Refuted" and refuted.certified
    with pytest.raises(UnknownEnd):
        dominates(family("ray"), "v0", "nope", 10)
    with pytest.raises(UnknownVertex):
        dominates(family("ray"), "v99", "w", 10)


def test_finite_separability():
    assert not_finitely_separable(family("k2inf"), "x", "y", 10).status == "Witnessed"
    sep = not_finitely_separable(family("ray"), "v0", "w", 10)
    assert sep.status == "Separated"
    assert sep.value.edges == frozenset({"v0-v1"})


def test_uncertified_separability_stays_tentative():
    p = custom([
        {"add_vertices": ["a", "b", "c"], "add_edges": [["e0", "a", "b"], ["e1", "b", "c"]], "frontier": ["c"]},
        {"add_vertices": ["d"], "add_edges": [["e2", "c", "d"]], "frontier": ["d"]},
    ])
    v = not_finitely_separable(p, "a", "c", 0)
    assert not v.certified
    assert v.status in {"Separated", "Unknown"}


def test_strong_links():
    assert strongly_linked(family("k2inf"), "x", "y", 10).status == "Witnessed"
    assert strongly_linked(family("ray"), "v0", "v3", 10).status == "Refuted"


def test_defining_sequence_moves_along_the_ray():
    seq = defining_sequence(family("ray"), "w", 3)
    assert seq == [frozenset({"v1"}), frozenset({"v3"}), frozenset({"v5"}), frozenset({"v7"})]
    with pytest.raises(DominatorsUnbounded):
        defining_sequence(family("crit_chain"), "w", 2)


def test_bipartite_minor():
    wit = bipartite_minor_witness(family("kminf"), ["h0", "h1", "h2"], 4, 8)
    assert wit["minor"] == "K_{3,4}"
    assert wit["right"] == [["u0"], ["u1"], ["u2"], ["u3"]]
    with pytest.raises(NotCritical):
        bipartite_minor_witness(family("k2inf"), ["x", "y"], 2, 8)


def test_quotient_points():
    k2 = quotient_points(family("k2inf"), 6)
    assert {"kind": "vertex_class", "members": ["x", "y"]} in k2
    ray = quotient_points(family("ray"), 6)
    assert all(len(q["members"]) == 1 for q in ray)
    merged = [q for q in quotient_points(family("fig16"), 6) if len(q["members"]) > 1]
    assert len(merged) == 1 and "w" in merged[0]["members"]
    assert all(m == "w" or m.startswith("u") for m in merged[0]["members"])


def test_quotient_needs_certified_connectivity():
    p = custom([{"add_vertices": ["a", "b"]}])
    with pytest.raises(Disconnected):
        quotient_points(p, 2)


@pytest.mark.parametrize(
    "name, elc, one_point",
    [("ray_star", "true", "true"), ("tree_inf", "false", "false"), ("fig5", "true", "false")],
)
def test_compactness_flags(name, elc, one_point):
    v = compactness_predicates(family(name), 10)
    assert (v["ends_locally_compact"].status, v["one_point_omega"].status) == (elc, one_point)
