import numpy as np
import pytest

from tmest import (
    SupportSet,
    TmestError,
    UnreachablePair,
    all_pairs,
    build_routing_matrix,
    from_edges,
    make_rng,
    read_support,
    read_topology,
    shortest_paths,
    support_from_names,
    write_support,
    write_topology,
)

from helpers import bellman_ford, ecmp_fractions_oracle, pick_support, ring_topology


def test_single_link_single_pair():
    topo = from_edges([("a", "b", 1.0)])
    support = support_from_names(topo, [("a", "b")])
    A = build_routing_matrix(topo, support, "sp")
    assert A.shape == (1, 1)
    assert A.entries[0, 0] == 1.0


def test_ecmp_two_equal_paths_split_half():
    # a->b->c and a->d->c, all weight 1: each of the four links carries 0.5.
    topo = from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("a", "d", 1.0), ("d", "c", 1.0)])
    support = support_from_names(topo, [("a", "c")])
    A = build_routing_matrix(topo, support, "ecmp")
    expected = ecmp_fractions_oracle(topo, 0, topo.node_index["c"])
    np.testing.assert_allclose(A.entries[:, 0], expected)
    np.testing.assert_allclose(A.entries[:, 0], [0.5, 0.5, 0.5, 0.5])


def test_large_scale_shape():
    # 82 nodes, 296 directed links, 1939 supported pairs.
    topo = ring_topology(82, 296 - 82, seed=5)
    assert topo.n_links == 296
    support = pick_support(topo, 1939, seed=6)
    A = build_routing_matrix(topo, support, "sp")
    assert A.shape == (296, 1939)


def test_shortest_paths_single_link():
    topo = from_edges([("a", "b", 3.0)])
    dist, _pred = shortest_paths(topo, 0)
    assert dist[1] == 3.0


def test_shortest_paths_triangle():
    topo = from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 3.0)])
    dist, pred = shortest_paths(topo, 0)
    assert dist[topo.node_index["c"]] == 2.0
    # the direct a->c link is off every shortest path
    assert pred[topo.node_index["c"]] == [1]


def test_shortest_paths_match_bellman_ford():
    topo = ring_topology(20, 40, seed=3, weight_jitter=2.0)
    for src in range(0, 20, 4):
        dist, _ = shortest_paths(topo, src)
        np.testing.assert_allclose(dist, bellman_ford(topo, src), rtol=1e-12)


def test_unreachable_pair_is_named():
    topo = from_edges([("a", "b", 1.0), ("c", "b", 1.0)], nodes=["a", "b", "c"])
    support = support_from_names(topo, [("a", "c")])
    with pytest.raises(UnreachablePair) as exc:
        build_routing_matrix(topo, support, "sp")
    assert "'a'" in str(exc.value) and "'c'" in str(exc.value)


def test_sp_tie_break_lexicographic():
    # two equal-cost a->c paths through b (index 1) and d (index 3):
    # the chosen path must route through the smaller node index.
    topo = from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("a", "d", 1.0), ("d", "c", 1.0)])
    support = support_from_names(topo, [("a", "c")])
    A = build_routing_matrix(topo, support, "sp")
    np.testing.assert_allclose(A.entries[:, 0], [1.0, 1.0, 0.0, 0.0])
    assert set(np.unique(A.entries)) <= {0.0, 1.0}


def _column_checks(topo, support, A, mode):
    ends = topo.link_endpoints()
    for j, (s, d) in enumerate(support.pairs):
        col = A.entries[:, j]
        dist_s, _ = shortest_paths(topo, s)
        used = np.nonzero(col)[0]
        assert used.size > 0
        # every used link advances along some shortest path: dist increases
        # by exactly the link weight
        for e in used:
            u, v = ends[e]
            assert dist_s[u] + topo.links[e].weight == pytest.approx(dist_s[v])
        # conservation: out minus in is +flow at s, -flow at d, 0 elsewhere
        for v in range(topo.n_nodes):
            out_flow = sum(col[e] for e in used if ends[e][0] == v)
            in_flow = sum(col[e] for e in used if ends[e][1] == v)
            if v == s:
                assert out_flow - in_flow == pytest.approx(1.0)
            elif v == d:
                assert in_flow - out_flow == pytest.approx(1.0)
            else:
                assert out_flow - in_flow == pytest.approx(0.0)
        if mode == "sp":
            assert set(np.unique(col)) <= {0.0, 1.0}
        else:
            assert np.all((col >= 0) & (col <= 1 + 1e-12))


@pytest.mark.parametrize("mode", ["sp", "ecmp"])
def test_column_invariants(mode):
    topo = ring_topology(12, 25, seed=9)
    support = pick_support(topo, 30, seed=10)
    A = build_routing_matrix(topo, support, mode)
    _column_checks(topo, support, A, mode)


@pytest.mark.parametrize("mode", ["sp", "ecmp"])
def test_ecmp_matches_enumeration_oracle(mode):
    topo = ring_topology(8, 14, seed=21)
    support = pick_support(topo, 12, seed=22)
    A = build_routing_matrix(topo, support, mode)
    if mode == "ecmp":
        for j, (s, d) in enumerate(support.pairs):
            np.testing.assert_allclose(
                A.entries[:, j], ecmp_fractions_oracle(topo, s, d), atol=1e-12
            )


@pytest.mark.parametrize("mode", ["sp", "ecmp"])
def test_permuted_link_order_same_matrix(mode):
    topo = ring_topology(10, 20, seed=13)
    support = pick_support(topo, 15, seed=14)
    A1 = build_routing_matrix(topo, support, mode)

    rng = make_rng(15)
    perm = rng.permutation(topo.n_links)
    edges = [topo.links[e] for e in perm]
    topo2 = from_edges(
        [(lk.src, lk.dst, lk.weight, lk.capacity) for lk in edges], nodes=topo.nodes
    )
    A2 = build_routing_matrix(topo2, support, mode)
    # realign rows by link identity
    np.testing.assert_allclose(A1.entries[perm], A2.entries, atol=1e-12)


def test_default_support_is_all_ordered_pairs():
    topo = from_edges([("a", "b", 1.0), ("b", "a", 1.0), ("b", "c", 1.0), ("c", "b", 1.0)])
    sup = all_pairs(topo)
    n = topo.n_nodes
    assert sup.size == n * (n - 1)
    assert sup.pairs[0] == (0, 1)
    assert len(set(sup.pairs)) == sup.size


def test_validation_errors():
    with pytest.raises(TmestError):
        from_edges([("a", "a", 1.0)])  # self loop
    with pytest.raises(TmestError):
        from_edges([("a", "b", 1.0), ("a", "b", 2.0)])  # duplicate link
    with pytest.raises(TmestError):
        from_edges([("a", "b", 0.0)])  # nonpositive weight
    with pytest.raises(TmestError):
        from_edges([("a", "b", -2.0)])
    topo = from_edges([("a", "b", 1.0)])
    with pytest.raises(TmestError):
        SupportSet(((0, 0),))  # identical endpoints
    with pytest.raises(TmestError):
        SupportSet(((0, 1), (0, 1)))  # duplicate pair
    with pytest.raises(TmestError):
        support_from_names(topo, [("a", "zzz")])
    with pytest.raises(TmestError):
        build_routing_matrix(topo, support_from_names(topo, [("a", "b")]), "foo")


def test_support_lookup_bijection():
    topo = ring_topology(6, 10, seed=2)
    sup = pick_support(topo, 10, seed=3)
    lut = sup.lookup()
    assert sorted(lut.values()) == list(range(sup.size))
    for pair, j in lut.items():
        assert sup.pairs[j] == pair


def test_csv_round_trips(tmp_path):
    topo = ring_topology(7, 12, seed=30, weight_jitter=1.5)
    sup = pick_support(topo, 9, seed=31)
    tpath = tmp_path / "topo.csv"
    spath = tmp_path / "sup.csv"
    write_topology(tpath, topo)
    write_support(spath, topo, sup)
    topo2 = read_topology(tpath)
    sup2 = read_support(spath, topo2)
    assert topo2.nodes == topo.nodes
    assert [lk.weight for lk in topo2.links] == [lk.weight for lk in topo.links]
    assert sup2.pairs == sup.pairs


def test_topology_csv_with_capacity(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("src,dst,weight,capacity\na,b,1.5,1000\nb,a,2.0,\n")
    topo = read_topology(path)
    assert topo.links[0].capacity == 1000.0
    assert topo.links[1].capacity is None
    bad = tmp_path / "bad.csv"
    bad.write_text("from,to,cost\na,b,1\n")
    with pytest.raises(TmestError):
        read_topology(bad)
