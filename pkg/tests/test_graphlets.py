import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genjudge.errors import DimensionMismatch, NoValidSample, UnsupportedSize
from genjudge.generators import gen_barabasi_albert
from genjudge.graph import Graph, RngSeed, relabel
from genjudge.graphlets import (
    DISCONNECTED,
    CountingMode,
    build_catalog,
    canonical_class,
    count_exact,
    count_sampled,
    feature_labels,
    feature_matrix,
    feature_vector,
    features_from_csv,
    features_to_csv,
)

from conftest import complete, graphs, path, random_graph, star, triangle


def brute_force_classes(k):
    """Group all labeled connected k-node graphs by networkx isomorphism."""
    reps = []
    for mask in range(1 << math.comb(k, 2)):
        g = nx.Graph()
        g.add_nodes_from(range(k))
        g.add_edges_from(e for b, e in enumerate(itertools.combinations(range(k), 2)) if mask >> b & 1)
        if nx.is_connected(g) and not any(nx.is_isomorphic(g, r) for r in reps):
            reps.append(g)
    return reps


def brute_force_counts(g, k):
    """Count connected induced k-subsets over all C(n, k) subsets."""
    cat = build_catalog(k)
    reps = [nx.from_numpy_array(cat.adjacency(i)) for i in range(cat.class_count)]
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    h.add_edges_from(g.edges)
    counts = np.zeros(cat.class_count, dtype=np.int64)
    for sub in itertools.combinations(range(g.node_count), k):
        s = h.subgraph(sub)
        if nx.is_connected(s):
            (idx,) = [i for i, r in enumerate(reps) if nx.is_isomorphic(s, r)]
            counts[idx] += 1
    return counts


def adj(g):
    a = np.zeros((g.node_count, g.node_count), dtype=np.uint8)
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1
    return a


@pytest.mark.parametrize("k, expected", [(3, 2), (4, 6), (5, 21)])
def test_catalog_sizes_match_brute_force(k, expected):
    cat = build_catalog(k)
    assert cat.class_count == expected == len(brute_force_classes(k))
    reps = [nx.from_numpy_array(cat.adjacency(i)) for i in range(cat.class_count)]
    assert all(nx.is_connected(r) for r in reps)
    for a, b in itertools.combinations(reps, 2):
        assert not nx.is_isomorphic(a, b)


def test_catalog_order_is_stable():
    cat = build_catalog(3)
    assert cat.classes == (3, 7)  # path, then triangle
    assert list(build_catalog(4).classes) == sorted(build_catalog(4).classes)
    assert feature_labels((4, 3)) == ["g3_0", "g3_1", "g4_0", "g4_1", "g4_2", "g4_3", "g4_4", "g4_5"]


def test_catalog_unsupported():
    with pytest.raises(UnsupportedSize):
        build_catalog(6)
    with pytest.raises(UnsupportedSize):
        count_exact(triangle(), 2)


def test_canonical_class_examples():
    cat = build_catalog(3)
    assert canonical_class(adj(triangle()), cat) == 1
    assert canonical_class(adj(Graph.from_edges(3, [(0, 2)])), cat) == DISCONNECTED
    with pytest.raises(DimensionMismatch):
        canonical_class(np.zeros((4, 4), dtype=int), cat)


@pytest.mark.parametrize("index", range(6))
def test_canonical_class_permutation_invariant(index):
    cat = build_catalog(4)
    a = cat.adjacency(index)
    for perm in itertools.permutations(range(4)):
        p = np.array(perm)
        assert canonical_class(a[np.ix_(p, p)], cat) == index


def test_count_exact_examples():
    assert count_exact(triangle(), 3).counts.tolist() == [0, 1]
    assert count_exact(path(4), 3).counts.tolist() == [2, 0]
    assert count_exact(star(3), 3).counts.tolist() == [3, 0]
    assert count_exact(path(2), 3).counts.tolist() == [0, 0]


@pytest.mark.parametrize("n", [5, 7, 9])
@pytest.mark.parametrize("k", [3, 4, 5])
def test_complete_graph_closure(n, k):
    counts = count_exact(complete(n), k).counts
    assert counts[-1] == math.comb(n, k)
    assert counts[:-1].sum() == 0


@settings(max_examples=30, deadline=None)
@given(graphs(max_nodes=10), st.sampled_from([3, 4, 5]))
def test_count_exact_matches_brute_force(g, k):
    assert count_exact(g, k).counts.tolist() == brute_force_counts(g, k).tolist()


def test_count_sampled_complete_graph():
    s = count_sampled(complete(10), 3, 500, RngSeed(1))
    assert s.counts.tolist() == [0, 500]
    assert s.mode == "sampled"


def test_count_sampled_triangle_free():
    g = gen_barabasi_albert(40, 1, RngSeed(2))  # a tree
    assert count_sampled(g, 3, 300, RngSeed(3)).counts[1] == 0


def test_count_sampled_no_valid_subset():
    with pytest.raises(NoValidSample):
        count_sampled(Graph.from_edges(6, [(0, 1), (2, 3)]), 3, 10, RngSeed(0))


def test_count_sampled_deterministic():
    g = gen_barabasi_albert(30, 2, RngSeed(0))
    a = count_sampled(g, 4, 200, RngSeed(5)).counts
    b = count_sampled(g, 4, 200, RngSeed(5)).counts
    assert (a == b).all()
    assert a.sum() == 200


def test_count_sampled_close_to_exact():
    g = gen_barabasi_albert(30, 2, RngSeed(77))
    exact = count_exact(g, 3).normalized()
    ok = sum(
        np.abs(count_sampled(g, 3, 5000, RngSeed(s)).normalized() - exact).sum() <= 0.1
        for s in range(100)
    )
    assert ok >= 95


def test_feature_vector_examples():
    assert feature_vector(triangle(), (3,)).values.tolist() == [0.0, 1.0]
    assert feature_vector(path(4), (3,)).values.tolist() == [1.0, 0.0]
    fv = feature_vector(Graph.from_edges(5, []), (3, 4))
    assert fv.values.tolist() == [0.0] * 8
    assert fv.size_config == (3, 4)


@settings(max_examples=50, deadline=None)
@given(graphs(max_nodes=12), st.randoms(use_true_random=False))
def test_feature_vector_isomorphism_invariant(g, rnd):
    perm = list(range(g.node_count))
    rnd.shuffle(perm)
    a = feature_vector(g, (3, 4, 5)).values
    b = feature_vector(relabel(g, perm), (3, 4, 5)).values
    assert np.abs(a - b).max() <= 1e-12


def test_feature_blocks_sum_to_one(rng):
    g = random_graph(12, 0.4, rng)
    v = feature_vector(g, (3, 4, 5)).values
    assert v[:2].sum() == pytest.approx(1.0)
    assert v[2:8].sum() == pytest.approx(1.0)
    assert v[8:].sum() == pytest.approx(1.0)


def test_feature_vector_sampled_mode():
    g = gen_barabasi_albert(30, 2, RngSeed(1))
    mode = CountingMode.sampled(300)
    a = feature_vector(g, (3, 4), mode, seed=RngSeed(2)).values
    assert a[:2].sum() == pytest.approx(1.0)
    assert (a == feature_vector(g, (3, 4), mode, seed=RngSeed(2)).values).all()
    with pytest.raises(ValueError):
        feature_vector(g, (3,), mode)


def test_feature_matrix_and_csv(rng):
    gs = [random_graph(9, 0.5, rng) for _ in range(4)]
    f = feature_matrix(gs, (3, 4))
    assert f.shape == (4, 8)
    text = features_to_csv(f, (3, 4))
    header, back = features_from_csv(text)
    assert header == feature_labels((3, 4))
    assert np.abs(back - f).max() <= 1e-11
