import numpy as np
import pytest

import distspec as ds


@pytest.fixture(scope="session")
def two_type_params():
    return ds.SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                        pi=np.array([0.5, 0.5]), n=2000)


@pytest.fixture(scope="session")
def two_type_profile(two_type_params):
    return ds.derive_spectral_profile(two_type_params)


@pytest.fixture(scope="session")
def below_threshold_params():
    return ds.SbmParams(r=2, W=np.array([[4.0, 2.0], [2.0, 4.0]]),
                        pi=np.array([0.5, 0.5]), n=2000)


@pytest.fixture(scope="session")
def three_type_params():
    return ds.SbmParams(r=3, W=ds.circulant_connectivity(9.0, 1.5, 3),
                        pi=np.full(3, 1.0 / 3.0), n=2000)


@pytest.fixture(scope="session")
def three_type_profile(three_type_params):
    return ds.derive_spectral_profile(three_type_params)


@pytest.fixture(scope="session")
def strong_params():
    # Well above threshold (tau ~ 4.2): detection visibly works at n = 2000.
    return ds.SbmParams(r=2, W=np.array([[11.0, 1.0], [1.0, 11.0]]),
                        pi=np.array([0.5, 0.5]), n=2000)


@pytest.fixture(scope="session")
def strong_profile(strong_params):
    return ds.derive_spectral_profile(strong_params)


def small_params(n, W=None, r=2):
    W = np.array([[5.0, 1.0], [1.0, 5.0]]) if W is None else np.asarray(W)
    return ds.SbmParams(r=r, W=W, pi=np.full(r, 1.0 / r), n=n)


@pytest.fixture
def path_graph():
    return ds.SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def square_graph():
    return ds.SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])


@pytest.fixture
def two_triangles():
    # Two triangles sharing vertex 0.
    return ds.SparseGraph.from_edges(
        5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)])


# --- Independent oracles -----------------------------------------------------

def apsp_distance_oracle(g: ds.SparseGraph, ell: int) -> np.ndarray:
    """Dense all-pairs BFS distances via scipy's csgraph (independent code path)."""
    from scipy.sparse.csgraph import shortest_path

    dist = shortest_path(g.to_csr(), method="D", unweighted=True, directed=False)
    return (dist == ell).astype(np.int64)


def simple_path_count_oracle(g: ds.SparseGraph, ell: int) -> np.ndarray:
    """Exhaustive simple-path counts of length exactly ell via networkx."""
    import networkx as nx

    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(map(tuple, g.edge_array()))
    counts = np.zeros((g.n, g.n), dtype=np.int64)
    for u in range(g.n):
        targets = set(range(g.n)) - {u}
        for path in nx.all_simple_paths(G, u, targets, cutoff=ell):
            if len(path) - 1 == ell:
                counts[u, path[-1]] += 1
    return counts
