import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import make_graph
from tanglekit.errors import NonMonotone, UnknownFamily
from tanglekit.multigraph import Multigraph
from tanglekit.presentation import (
    CATALOG,
    FLAG_NAMES,
    check_monotone,
    closed_component_keys,
    constant,
    custom,
    family,
    load,
)
from tanglekit.structure import component_report


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_is_monotone(name):
    check_monotone(family(name), 12)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_certificates_are_complete(name):
    cert = family(name).certificate()
    assert cert is not None
    assert set(cert.flags) == set(FLAG_NAMES)
    assert cert.provenance in {"PAPER", "DERIVED", "TRIVIAL"}


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_certified_rays_are_paths_in_the_level(name):
    p = family(name)
    n = 10
    g = p.truncate(n).graph
    adj = g.adjacency
    for end in p.certificate().ends_at(n):
        ray = end.ray_at(g)
        assert len(set(ray)) == len(ray)
        assert all(b in adj[a] for a, b in zip(ray, ray[1:]))


@pytest.mark.parametrize("name", ["k2inf", "kminf", "fig4", "fig5", "crit_chain", "fig16", "ray_star"])
def test_certified_crit_sets_are_witnessed_deep_enough(name):
    p = family(name)
    n = 14
    for y in p.certificate().crit.within(p.truncate(n - 4).graph.vertex_set):
        # rays hanging off a critical set never close, so open parts count too
        assert len(component_report(p, y, n).with_nbhd(y, closed_only=False)) >= 2, sorted(y)


def test_k2inf_levels_are_complete_bipartite():
    lg = family("k2inf").truncate(5)
    assert lg.graph.vertex_set == {"x", "y", "u0", "u1", "u2", "u3", "u4"}
    assert len(lg.graph.edges) == 10
    assert all(lg.graph.degree(f"u{i}") == 2 for i in range(5))


def test_kminf_parameter():
    g = family("kminf", m=4).truncate(3).graph
    assert len(g.vertices) == 7
    assert len(g.edges) == 12


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        family("nope")
    with pytest.raises(UnknownFamily):
        load({"what": 1})


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        family("ray").truncate(-1)


def test_custom_levels_and_frontier():
    p = custom([
        {"add_vertices": ["a", "b"], "add_edges": [["e0", "a", "b"]], "frontier": ["b"]},
        {"add_vertices": ["c"], "add_edges": [["e1", "b", "c"]], "frontier": ["c"]},
    ])
    assert p.truncate(0).frontier == {"b"}
    last = p.truncate(7)
    assert last.frontier == frozenset()
    assert last.graph.vertex_set == {"a", "b", "c"}
    assert closed_component_keys(last, ["b"]) == {frozenset({"a"}), frozenset({"c"})}


def test_custom_rejects_edges_added_at_closed_vertices():
    with pytest.raises(NonMonotone):
        custom([
            {"add_vertices": ["a", "b"], "add_edges": [["e0", "a", "b"]], "frontier": ["b"]},
            {"add_vertices": ["c"], "add_edges": [["e1", "a", "c"]]},
        ])


def test_load_dispatches_on_shape():
    g2 = load({"family": "kminf", "params": {"m": 2}}).truncate(3).graph
    assert (len(g2.vertices), len(g2.edges)) == (5, 6)
    g = make_graph(["a", "b"], [("a", "b")])
    q = load({"graph": g.to_json()})
    assert q.truncate(0).graph == g == q.truncate(9).graph


@given(st.integers(0, 20), st.integers(0, 20))
@settings(max_examples=40)
def test_truncations_nest(a, b):
    lo, hi = sorted((a, b))
    p = family("ray_star")
    assert p.truncate(lo).graph.is_subgraph_of(p.truncate(hi).graph)


def test_constant_presentation_has_no_frontier():
    g = Multigraph.build(["a"], [])
    p = constant(g)
    assert p.truncate(3).frontier == frozenset()
    assert p.certificate().ends_at(3) == []
