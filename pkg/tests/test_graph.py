import numpy as np
import pytest

import distspec as ds
from distspec.graph import CapSaturated, NegativeEntry

from conftest import apsp_distance_oracle, simple_path_count_oracle, small_params


class TestSparseGraph:
    def test_validation(self):
        with pytest.raises(ValueError):
            ds.SparseGraph.from_edges(3, [(0, 0)])
        with pytest.raises(ValueError):
            ds.SparseGraph.from_edges(3, [(0, 1), (1, 0)])
        with pytest.raises(ValueError):
            ds.SparseGraph.from_edges(3, [(0, 5)])

    def test_adjacency_sorted_symmetric(self):
        g = ds.SparseGraph.from_edges(4, [(2, 1), (0, 3), (0, 1)])
        assert g.adj[1] == [0, 2]
        for u in range(4):
            for w in g.adj[u]:
                assert u in g.adj[w]

    def test_has_edge(self, path_graph):
        assert path_graph.has_edge(1, 2)
        assert not path_graph.has_edge(0, 2)


class TestBfsShells:
    def test_path_graph(self, path_graph):
        prof = ds.bfs_shells(path_graph, 0, 2)
        assert prof.sizes.tolist() == [1, 1, 1]
        assert [layer.tolist() for layer in prof.layers] == [[0], [1], [2]]

    def test_five_cycle(self):
        c5 = ds.SparseGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
        prof = ds.bfs_shells(c5, 2, 2)
        assert prof.sizes.tolist() == [1, 2, 2]

    def test_star_center(self):
        k = 6
        star = ds.SparseGraph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])
        assert ds.bfs_shells(star, 0, 1).sizes.tolist() == [1, k]

    def test_type_counts_sum_to_sizes(self):
        sample = ds.sample_graph(small_params(100), 3)
        prof = ds.bfs_shells(sample.graph, 0, 3, sigma=sample.sigma, r=2)
        assert np.array_equal(prof.type_counts.sum(axis=1), prof.sizes)


class TestDistanceMatrix:
    def test_path_graph(self, path_graph):
        d2 = ds.distance_matrix(path_graph, 2)
        assert d2.entries().tolist() == [[0, 2, 1], [1, 3, 1]]

    def test_depth_one_is_adjacency(self):
        sample = ds.sample_graph(small_params(150), 7)
        d1 = ds.distance_matrix(sample.graph, 1)
        assert np.array_equal(d1.to_dense(), sample.graph.to_csr().toarray())

    def test_matches_apsp_oracle(self):
        sample = ds.sample_graph(small_params(200, W=[[3.0, 1.0], [1.0, 3.0]]), 1)
        for ell in (1, 2, 3):
            mine = ds.distance_matrix(sample.graph, ell).to_dense()
            assert np.array_equal(mine, apsp_distance_oracle(sample.graph, ell))

    def test_supports_disjoint_across_depths(self):
        sample = ds.sample_graph(small_params(120), 5)
        seen = set()
        for ell in (1, 2, 3, 4):
            entries = {(int(i), int(j)) for i, j, _ in
                       ds.distance_matrix(sample.graph, ell).entries()}
            assert not (entries & seen)
            seen |= entries

    def test_requires_positive_depth(self, path_graph):
        with pytest.raises(ValueError):
            ds.distance_matrix(path_graph, 0)

    def test_isolated_vertices_give_empty_rows(self):
        g = ds.SparseGraph.from_edges(5, [(0, 1)])  # vertices 2..4 isolated
        dense = ds.distance_matrix(g, 2).to_dense()
        assert dense.sum() == 0
        prof = ds.bfs_shells(g, 3, 4)
        assert prof.sizes.tolist() == [1, 0, 0, 0, 0]


class TestPathExpansionMatrix:
    def test_square_two_routes(self, square_graph):
        b2 = ds.path_expansion_matrix(square_graph, 2)
        d2 = ds.distance_matrix(square_graph, 2)
        dense_b, dense_d = b2.to_dense(), d2.to_dense()
        assert dense_b[0, 2] == 2 and dense_d[0, 2] == 1
        assert dense_b[1, 3] == 2 and dense_d[1, 3] == 1

    def test_path_graph(self, path_graph):
        b2 = ds.path_expansion_matrix(path_graph, 2)
        assert b2.entries().tolist() == [[0, 2, 1], [1, 3, 1]]

    def test_matches_enumeration_oracle(self):
        sample = ds.sample_graph(small_params(50, W=[[6.0, 2.0], [2.0, 6.0]]), 2)
        for ell in (2, 3):
            mine = ds.path_expansion_matrix(sample.graph, ell, cap=10**9).to_dense()
            assert np.array_equal(mine, simple_path_count_oracle(sample.graph, ell))

    def test_symmetry_of_counts(self):
        sample = ds.sample_graph(small_params(40), 4)
        dense = ds.path_expansion_matrix(sample.graph, 3, cap=10**9).to_dense()
        assert np.array_equal(dense, dense.T)

    def test_cap_saturation_warns(self, square_graph):
        with pytest.warns(CapSaturated):
            b2 = ds.path_expansion_matrix(square_graph, 2, cap=1)
        assert b2.max_value() == 1

    def test_distance_support_included(self):
        sample = ds.sample_graph(small_params(80), 6)
        bl = ds.path_expansion_matrix(sample.graph, 3, cap=10**9).to_dense()
        dl = ds.distance_matrix(sample.graph, 3).to_dense()
        assert np.all(bl[dl > 0] >= 1)


class TestDeltaMatrix:
    def test_tree_is_zero(self, path_graph):
        delta = ds.delta_matrix(ds.path_expansion_matrix(path_graph, 2),
                                ds.distance_matrix(path_graph, 2))
        assert delta.nnz == 0

    def test_square(self, square_graph):
        delta = ds.delta_matrix(ds.path_expansion_matrix(square_graph, 2),
                                ds.distance_matrix(square_graph, 2))
        assert delta.entries().tolist() == [[0, 2, 1], [1, 3, 1]]

    def test_negative_entry_raises(self, square_graph):
        empty = ds.SparseSymMatrix.from_pairs(4, 2, "path", [], [], [])
        with pytest.raises(NegativeEntry):
            ds.delta_matrix(empty, ds.distance_matrix(square_graph, 2))

    def test_zero_one_on_untangled_pairs(self):
        # Entries above 1 need two cycles within reach of both endpoints,
        # so they can only touch vertices whose balls are tangled.
        sample = ds.sample_graph(small_params(300), 0)
        tf, offenders = ds.tangle_free_check(sample.graph, 3)
        off = set(offenders)
        bl = ds.path_expansion_matrix(sample.graph, 3, cap=999)
        delta = ds.delta_matrix(bl, ds.distance_matrix(sample.graph, 3))
        for i, j, v in delta.entries():
            if v > 1:
                assert int(i) in off and int(j) in off


class TestTangleFree:
    def test_tree(self, path_graph):
        ok, offenders = ds.tangle_free_check(path_graph, 3)
        assert ok and offenders == []

    def test_two_triangles_fail_at_shared_vertex(self, two_triangles):
        ok, offenders = ds.tangle_free_check(two_triangles, 2)
        assert not ok
        assert 0 in offenders

    def test_single_cycle_ok(self):
        n = 12
        cyc = ds.SparseGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
        for ell in (1, 3, 5):
            ok, _ = ds.tangle_free_check(cyc, ell)
            assert ok

    def test_tangle_free_implies_small_counts(self):
        # On a certified graph the path counts stay at most 2 and the
        # difference matrix is 0/1.
        edges = [(i, i + 1) for i in range(20)] + [(0, 21), (21, 5)]
        g = ds.SparseGraph.from_edges(22, edges)
        ok, _ = ds.tangle_free_check(g, 4)
        assert ok
        bl = ds.path_expansion_matrix(g, 4, cap=999)
        assert bl.max_value() <= 2
        delta = ds.delta_matrix(bl, ds.distance_matrix(g, 4))
        assert delta.max_value() <= 1


class TestShellStatistics:
    def test_regular_tree_growth(self):
        # Complete binary tree: every internal shell doubles.
        depth, n = 6, 2**7 - 1
        edges = [(v, 2 * v + c) for v in range(2**6 - 1) for c in (1, 2)]
        g = ds.SparseGraph.from_edges(n, edges)
        max_ratio, _ = ds.shell_growth_report(g, 3, alpha=2.0)
        assert max_ratio <= 1.5

    def test_path_graph_bounded(self, path_graph):
        max_ratio, _ = ds.shell_growth_report(path_graph, 3, alpha=3.0)
        assert max_ratio <= 2.0

    def test_top_shell_mass_scale(self, two_type_params):
        # Sum of squared top-shell sizes stays within a constant band of
        # n * alpha^(2 ell).
        ratios = []
        for seed in range(5):
            sample = ds.sample_graph(two_type_params, seed)
            _, mass = ds.shell_growth_report(sample.graph, 4, alpha=3.0)
            ratios.append(mass / (two_type_params.n * 3.0**8))
        assert all(0.1 <= r <= 10.0 for r in ratios)

    def test_set_shell_sizes(self, path_graph):
        sizes = ds.set_shell_sizes(path_graph, [0], 2)
        assert sizes.tolist() == [1, 1, 1]
        sizes = ds.set_shell_sizes(path_graph, [0, 3], 1)
        assert sizes.tolist() == [2, 2]

    def test_set_shell_vertices(self, path_graph):
        assert ds.set_shell(path_graph, [0], 2).tolist() == [2]
        assert ds.set_shell(path_graph, [1, 2], 1).tolist() == [0, 3]


class TestCycles:
    def test_tree_has_none(self, path_graph):
        assert ds.fundamental_cycles(path_graph) == []

    def test_square(self, square_graph):
        cycles = ds.fundamental_cycles(square_graph)
        assert len(cycles) == 1
        assert cycles[0].tolist() == [0, 1, 2, 3]

    def test_count_matches_excess(self):
        sample = ds.sample_graph(small_params(200), 9)
        g = sample.graph
        comps = _component_count(g)
        assert len(ds.fundamental_cycles(g)) == g.m - g.n + comps


def _component_count(g):
    seen = np.zeros(g.n, dtype=bool)
    comps = 0
    for v in range(g.n):
        if seen[v]:
            continue
        comps += 1
        stack = [v]
        seen[v] = True
        while stack:
            u = stack.pop()
            for w in g.adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


class TestMatrixDump:
    def test_round_trip(self, tmp_path, square_graph):
        mat = ds.distance_matrix(square_graph, 2)
        path = tmp_path / "mat.txt"
        ds.dump_matrix(mat, path)
        text = path.read_text().splitlines()
        assert text[0] == "4 2 distance"
        assert text[1:] == ["0 2 1", "1 3 1"]
        back = ds.load_matrix(path)
        assert np.array_equal(back.to_dense(), mat.to_dense())
