import random

import networkx as nx
from networkx.algorithms.connectivity import local_node_connectivity
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_cut_condition, brute_packable, disjoint_spanning_trees, make_graph, partitions
from tanglekit.errors import Disconnected, GroundSetMismatch, SameVertex, TooLarge, UnknownEdge, UnknownVertex
from tanglekit.multigraph import (
    Multigraph,
    VertexPartition,
    components,
    contract_by_edges,
    contract_partition,
    cross_edge_count,
    cut_condition,
    cut_violation,
    edge_disjoint_paths,
    local_connectivity,
    natkey,
    pack_trees,
    refine,
    set_partitions,
    sort_ids,
)


@st.composite
def multigraphs(draw, min_n: int = 1, max_n: int = 5, max_edges: int = 9, loops: bool = True):
    n = draw(st.integers(min_n, max_n))
    vs = [f"v{i}" for i in range(n)]
    pairs = draw(st.lists(st.tuples(st.sampled_from(vs), st.sampled_from(vs)), max_size=max_edges))
    if not loops:
        pairs = [(a, b) for a, b in pairs if a != b]
    return make_graph(vs, pairs)


def k_mn(m: int, n: int) -> Multigraph:
    left = [f"a{i}" for i in range(m)]
    right = [f"b{j}" for j in range(n)]
    return make_graph(left + right, [(a, b) for a in left for b in right])


def test_natural_sort_orders_digit_runs_numerically():
    assert sort_ids(["u10", "u2", "u1", "x"]) == ["u1", "u2", "u10", "x"]
    assert natkey("r1_10") > natkey("r1_9")


def test_build_rejects_bad_edges():
    with pytest.raises(UnknownVertex):
        Multigraph.build(["a"], [("e", "a", "b")])
    with pytest.raises(UnknownEdge):
        Multigraph.build(["a", "b"], [("e", "a", "b"), ("e", "b", "a")])


def test_loops_count_twice_toward_degree():
    g = make_graph(["a", "b"], [("a", "a"), ("a", "b"), ("a", "b")])
    assert g.degree("a") == 4
    assert g.degree("b") == 2


@given(multigraphs())
def test_json_round_trip(g):
    assert Multigraph.from_json(g.to_json()) == g


@pytest.mark.parametrize("n, bell", [(0, 1), (1, 1), (3, 5), (5, 52), (6, 203)])
def test_set_partitions_counts_are_bell_numbers(n, bell):
    items = [str(i) for i in range(n)]
    parts = list(set_partitions(items))
    assert len(parts) == bell
    assert len({tuple(sorted(tuple(sorted(b)) for b in p)) for p in parts}) == bell


def test_refine_is_the_meet():
    p = VertexPartition.of([["a", "b", "c"], ["d"]])
    q = VertexPartition.of([["a", "b"], ["c", "d"]])
    r = refine(p, q)
    assert sorted(map(sorted, r.blocks)) == [["a", "b"], ["c"], ["d"]]
    assert r.refines(p) and r.refines(q)
    with pytest.raises(GroundSetMismatch):
        refine(p, VertexPartition.of([["a"]]))


def test_contract_partition_keeps_cross_edges_only():
    g = make_graph(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d"), ("a", "a")])
    q = contract_partition(g, VertexPartition.of([["a", "b"], ["c", "d"]]))
    assert q.vertices == ("a", "c")
    assert sorted(e.id for e in q.edges) == ["e1", "e3"]
    assert q.labels["c"] == frozenset({"c", "d"})


def test_contract_by_edges_turns_inner_edges_into_loops():
    g = make_graph(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
    q = contract_by_edges(g, ["e1", "e2"])
    assert q.vertices == ("a", "c")
    loops = [e.id for e in q.edges if e.is_loop]
    assert loops == ["e0"]
    with pytest.raises(UnknownEdge):
        contract_by_edges(g, ["nope"])


@given(multigraphs(max_n=5))
@settings(max_examples=60)
def test_cross_edges_of_quotient_match_count(g):
    rng = random.Random(len(g.edges))
    blocks: dict[int, list[str]] = {}
    for v in g.vertices:
        blocks.setdefault(rng.randrange(3), []).append(v)
    p = VertexPartition.of(blocks.values())
    q = contract_partition(g, p)
    assert len(q.edges) == cross_edge_count(g, p)
    assert len(q.vertices) == len(p)


def test_components_report_neighbourhoods():
    g = make_graph(["x", "a", "b", "c"], [("x", "a"), ("a", "b"), ("c", "c")])
    comps = sorted(components(g, ["x"]), key=lambda t: sorted(t[0]))
    assert comps == [(frozenset({"a", "b"}), frozenset({"x"})), (frozenset({"c"}), frozenset())]


def test_complete_bipartite_k25_has_no_two_trees():
    g = k_mn(2, 5)
    assert pack_trees(g, 2) is None
    bad = cut_violation(g, 2)
    assert bad is not None
    assert cross_edge_count(g, bad) < 2 * (len(bad) - 1)


def test_k4_splits_into_two_trees():
    g = make_graph("abcd", [(a, b) for i, a in enumerate("abcd") for b in "abcd"[i + 1:]])
    trees = pack_trees(g, 2)
    assert trees is not None and disjoint_spanning_trees(g, trees)
    assert pack_trees(g, 3) is None


def test_pack_trees_edge_cases():
    single = make_graph(["a"], [("a", "a")])
    assert pack_trees(single, 3) == [[], [], []]
    with pytest.raises(Disconnected):
        pack_trees(make_graph(["a", "b"], []), 1)


def test_cut_condition_is_capped():
    g = make_graph([f"v{i}" for i in range(11)], [(f"v{i}", f"v{i + 1}") for i in range(10)])
    with pytest.raises(TooLarge):
        cut_condition(g, 1)


@given(multigraphs(min_n=2, max_n=4, max_edges=8, loops=False), st.integers(1, 3))
@settings(max_examples=120, deadline=None)
def test_packing_matches_brute_force(g, k):
    if not g.is_connected():
        return
    trees = pack_trees(g, k)
    assert (trees is not None) == brute_packable(g, k)
    assert cut_condition(g, k) == brute_cut_condition(g, k)
    if trees is not None:
        assert disjoint_spanning_trees(g, trees)


def test_oracle_partitions_agree_with_library():
    items = ["a", "b", "c", "d"]
    ours = {tuple(sorted(tuple(sorted(b)) for b in p)) for p in set_partitions(items)}
    theirs = {tuple(sorted(tuple(sorted(b)) for b in p)) for p in partitions(items)}
    assert ours == theirs


def _nx_lambda(g: Multigraph, a: str, b: str) -> int:
    d = nx.DiGraph()
    d.add_nodes_from(g.vertices)
    for e in g.edges:
        if e.is_loop:
            continue
        for s, t in ((e.u, e.v), (e.v, e.u)):
            cap = d.edges[s, t]["capacity"] + 1 if d.has_edge(s, t) else 1
            d.add_edge(s, t, capacity=cap)
    return int(nx.maximum_flow_value(d, a, b))


def _nx_kappa(g: Multigraph, a: str, b: str) -> int:
    h = nx.Graph()
    h.add_nodes_from(g.vertices)
    direct = 0
    for e in g.edges:
        if {e.u, e.v} == {a, b}:
            direct += 1
        elif not e.is_loop:
            h.add_edge(e.u, e.v)
    return direct + local_node_connectivity(h, a, b)


@given(multigraphs(min_n=2, max_n=6, max_edges=12), st.data())
@settings(max_examples=150, deadline=None)
def test_connectivity_matches_networkx(g, data):
    a, b = data.draw(st.lists(st.sampled_from(g.vertices), min_size=2, max_size=2, unique=True))
    kappa, lam = local_connectivity(g, a, b)
    assert lam == _nx_lambda(g, a, b)
    assert kappa == _nx_kappa(g, a, b)
    assert kappa <= lam
    paths = edge_disjoint_paths(g, a, b)
    assert len(paths) <= lam
    assert all(p[0] == a and p[-1] == b for p in paths)


def test_local_connectivity_rejects_equal_endpoints():
    g = make_graph(["a", "b"], [("a", "b")])
    with pytest.raises(SameVertex):
        local_connectivity(g, "a", "a")
