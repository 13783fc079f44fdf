import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsegraph.core import (Graph, GraphError, PatternGraph,
                              all_pairs_distances, are_m_disjoint,
                              bfs_distances, connected_subset_masks,
                              is_connected_subset, m_connected_components,
                              mask_of, max_edge_disjoint_paths, neighborhood,
                              set_of)
from coarsegraph.generators import (CounterRNG, cycle_graph, gnp_connected,
                                    grid_graph, path_graph, random_tree)

from oracles import (floyd_warshall, max_edge_disjoint_paths_brute,
                     min_edge_cut_brute)

K4 = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], root=0)


def small_graphs():
    return [path_graph(10), cycle_graph(8), grid_graph(3, 3), random_tree(9, 4),
            K4, gnp_connected(9, 0.35, 11)]


# ---------------------------------------------------------------------------
# construction and serialization


def test_rejects_self_loop():
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(0, 1), (1, 1), (1, 2)])


def test_rejects_duplicate_edge():
    with pytest.raises(GraphError):
        Graph.from_edges(3, [(0, 1), (1, 0), (1, 2)])


def test_rejects_disconnected():
    with pytest.raises(GraphError):
        Graph.from_edges(4, [(0, 1), (2, 3)])


def test_json_roundtrip():
    g = grid_graph(3, 4)
    assert Graph.from_json(g.to_json()) == g


def test_edge_list_text_roundtrip():
    g = cycle_graph(6).with_root(2)
    g2 = Graph.from_edge_list_text(g.to_edge_list_text())
    assert g2 == g and g2.root == 2


def test_text_parser_rejects_bad_line():
    with pytest.raises(GraphError):
        Graph.from_edge_list_text("0 1 2\n")


def test_pattern_rejects_loop():
    with pytest.raises(GraphError):
        PatternGraph.make(2, [(0, 0)])


def test_pattern_allows_parallel_edges():
    th = PatternGraph.theta(3)
    assert th.multiplicity(0, 1) == 3
    assert th.degree(0) == 3


# ---------------------------------------------------------------------------
# bfs_distances


def test_bfs_path_metric():
    d = bfs_distances(path_graph(10), 0)
    assert all(d[i] == i for i in range(10))


def test_bfs_cycle_metric():
    d = bfs_distances(cycle_graph(8), 0)
    assert d[4] == 4 and d[7] == 1


def test_bfs_truncation():
    assert set(bfs_distances(path_graph(10), 0, cap=3)) == {0, 1, 2, 3}


def test_bfs_matches_floyd_warshall():
    for g in small_graphs():
        fw = floyd_warshall(g.vertex_count, list(g.edges()))
        for s in range(g.vertex_count):
            d = bfs_distances(g, s)
            assert all(d[v] == fw[s][v] for v in range(g.vertex_count))


def test_all_pairs_matches_bfs():
    for g in small_graphs():
        dm = all_pairs_distances(g)
        for s in range(g.vertex_count):
            d = bfs_distances(g, s)
            assert all(dm[s, v] == d[v] for v in range(g.vertex_count))


@given(st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_metric_axioms_on_random_graphs(seed):
    rng = CounterRNG(seed)
    g = gnp_connected(4 + rng.randrange(8), 0.4, seed)
    dm = all_pairs_distances(g)
    n = g.vertex_count
    for u in range(n):
        assert dm[u, u] == 0
        for v in range(n):
            assert dm[u, v] == dm[v, u]
            assert (dm[u, v] == 0) == (u == v)
            for w in range(n):
                assert dm[u, v] <= dm[u, w] + dm[w, v]


# ---------------------------------------------------------------------------
# m-connectivity


def test_m_connected_spec_values():
    p10 = path_graph(10)
    assert m_connected_components(p10, {0, 3, 6}, 3) == [frozenset({0, 3, 6})]
    assert m_connected_components(p10, {0, 3, 6}, 2) == [
        frozenset({0}), frozenset({3}), frozenset({6})]
    # d(1,7)=2 through vertex 0 joins the two cycle arms
    assert m_connected_components(cycle_graph(8), {1, 2, 6, 7}, 2) == [
        frozenset({1, 2, 6, 7})]


def test_m1_on_all_vertices_is_connectivity():
    for g in small_graphs():
        comps = m_connected_components(g, range(g.vertex_count), 1)
        assert comps == [frozenset(range(g.vertex_count))]


def test_empty_set_partition():
    assert m_connected_components(path_graph(5), set(), 2) == []


@given(st.integers(0, 2**32), st.integers(1, 4), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_partition_refines_under_smaller_m(seed, m1, m2):
    lo, hi = min(m1, m2), max(m1, m2)
    rng = CounterRNG(seed)
    g = gnp_connected(5 + rng.randrange(7), 0.35, seed)
    members = frozenset(v for v in range(g.vertex_count) if rng.random() < 0.6)
    fine = m_connected_components(g, members, lo)
    coarse = m_connected_components(g, members, hi)
    for part in fine:
        assert any(part <= whole for whole in coarse)


def test_partition_is_partition():
    g = gnp_connected(10, 0.3, 5)
    comps = m_connected_components(g, range(10), 2)
    seen = set()
    for c in comps:
        assert not (c & seen)
        seen |= c
    assert seen == set(range(10))


# ---------------------------------------------------------------------------
# disjointness and neighborhoods


def test_m_disjoint_spec_values():
    p10 = path_graph(10)
    assert are_m_disjoint(p10, {0}, {5}, 4)
    assert not are_m_disjoint(p10, {0}, {5}, 5)  # strictness boundary
    assert are_m_disjoint(cycle_graph(8), {0, 1}, {4, 5}, 2)


def test_empty_set_is_disjoint_from_anything():
    assert are_m_disjoint(path_graph(4), set(), {1, 2}, 10)


def test_neighborhood_spec_values():
    p10 = path_graph(10)
    assert neighborhood(p10, {5}, 2) == frozenset({4, 5, 6})
    assert neighborhood(p10, {5}, 1) == frozenset({5})
    assert neighborhood(p10, {5}, 0) == frozenset()
    assert neighborhood(cycle_graph(8), {0}, 3) == frozenset({6, 7, 0, 1, 2})


@given(st.integers(0, 2**32), st.integers(0, 5))
@settings(max_examples=30, deadline=None)
def test_disjoint_iff_neighborhood_misses(seed, m):
    rng = CounterRNG(seed)
    g = gnp_connected(5 + rng.randrange(6), 0.4, seed)
    n = g.vertex_count
    xs = frozenset(v for v in range(n) if rng.random() < 0.4)
    ys = frozenset(v for v in range(n) if rng.random() < 0.4) - xs
    assert are_m_disjoint(g, xs, ys, m) == (not (neighborhood(g, xs, m + 1) & ys))


# ---------------------------------------------------------------------------
# connected subsets


def test_is_connected_subset():
    p10 = path_graph(10)
    assert is_connected_subset(p10, {2, 3, 4})
    assert not is_connected_subset(p10, {2, 4})
    assert is_connected_subset(cycle_graph(8), range(8))
    assert is_connected_subset(p10, set())


def test_connected_subset_masks_enumeration():
    # a path's connected subsets are exactly its intervals
    p5 = path_graph(5)
    masks = connected_subset_masks(p5.adj_masks)
    assert len(masks) == 15
    for mask in masks:
        assert is_connected_subset(p5, set_of(mask))
    assert len(set(masks)) == len(masks)


def test_connected_subset_masks_complete():
    g = gnp_connected(7, 0.4, 3)
    masks = set(connected_subset_masks(g.adj_masks))
    for cand in range(1, 1 << 7):
        if is_connected_subset(g, set_of(cand)):
            assert cand in masks
        else:
            assert cand not in masks


# ---------------------------------------------------------------------------
# max edge-disjoint paths


def test_tree_pairs_have_one_path():
    t = random_tree(12, 9)
    count, paths = max_edge_disjoint_paths(t, {2}, {7})
    assert count == 1 and len(paths) == 1


def test_cycle_has_two_arcs():
    count, paths = max_edge_disjoint_paths(cycle_graph(8), {0}, {4})
    assert count == 2 and len(paths) == 2


def test_k4_adjacent_pair():
    count, paths = max_edge_disjoint_paths(K4, {0}, {1})
    assert count == 3
    assert count == max_edge_disjoint_paths_brute(4, list(K4.edges()), {0}, {1})


def test_preconditions():
    g = path_graph(6)
    with pytest.raises(GraphError):
        max_edge_disjoint_paths(g, {0, 1}, {1, 2})  # overlap
    with pytest.raises(GraphError):
        max_edge_disjoint_paths(g, {0, 2}, {4})  # disconnected x


def test_paths_are_edge_disjoint_and_valid():
    g = gnp_connected(9, 0.4, 8)
    count, paths = max_edge_disjoint_paths(g, {0}, {g.vertex_count - 1})
    assert len(paths) == count
    used = set()
    for p in paths:
        assert p[0] == 0 and p[-1] == g.vertex_count - 1
        for a, b in zip(p, p[1:]):
            assert b in g.adjacency[a]
            e = (min(a, b), max(a, b))
            assert e not in used
            used.add(e)


@given(st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_menger_duality_against_brute_cut(seed):
    rng = CounterRNG(seed)
    g = gnp_connected(5 + rng.randrange(4), 0.45, seed)
    n = g.vertex_count
    u = rng.randrange(n)
    v = (u + 1 + rng.randrange(n - 1)) % n
    count, _ = max_edge_disjoint_paths(g, {u}, {v})
    assert count == min_edge_cut_brute(n, list(g.edges()), {u}, {v})


def test_flow_against_brute_path_packing():
    for seed in range(6):
        g = gnp_connected(7, 0.45, seed + 40)
        count, _ = max_edge_disjoint_paths(g, {0}, {6})
        assert count == max_edge_disjoint_paths_brute(7, list(g.edges()), {0}, {6})


def test_mask_helpers_roundtrip():
    s = frozenset({0, 3, 5})
    assert set_of(mask_of(s)) == s
