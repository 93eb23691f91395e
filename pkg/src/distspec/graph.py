"""Immutable sparse graphs and the sparse matrices built from them.

The production object is the distance matrix ``D^ell`` (entry 1 exactly at
pairs whose graph distance equals ell), built by one truncated BFS per
vertex, so the total cost is the sum of ball sizes.  The path-expansion
matrix ``B^ell`` (counts of self-avoiding walks of length ell) is kept as
a verification artifact: exact depth-limited DFS, feasible for small
depths on sparse graphs.  Their difference is supported near cycles only,
which is what the perturbation bounds exploit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp


class NegativeEntry(ValueError):
    """Path counts fell below distance indicators; inputs are inconsistent."""


class CapSaturated(UserWarning):
    """Some self-avoiding path counts hit the cap (signals tangled regions)."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(
            f"{len(self.pairs)} pair(s) hit the path-count cap: "
            f"{self.pairs[:5]}{'...' if len(self.pairs) > 5 else ''}"
        )


class SparseGraph:
    """Undirected simple graph with sorted per-vertex neighbor lists.

    Immutable after construction; edits go through rebuilds (see the
    adversary module).  ``adj`` holds plain Python lists for fast
    traversal of the small neighborhoods this package works with.
    """

    __slots__ = ("n", "m", "indptr", "indices", "adj")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.m = int(len(indices) // 2)
        self.indptr = indptr
        self.indices = indices
        self.adj = [
            indices[indptr[v]:indptr[v + 1]].tolist() for v in range(self.n)
        ]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "SparseGraph":
        """Build from an edge list; validates no self-loops or duplicates."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if (arr < 0).any() or (arr >= n).any():
                raise ValueError("edge endpoint out of range")
            if (arr[:, 0] == arr[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            key = lo * n + hi
            if len(np.unique(key)) != len(key):
                raise ValueError("duplicate edges are not allowed")
            both = np.concatenate([np.stack([lo, hi], 1), np.stack([hi, lo], 1)])
        else:
            both = np.empty((0, 2), dtype=np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, both[:, 1].copy())

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def edge_array(self) -> np.ndarray:
        """All edges once, as an (m, 2) array with u < v, lexicographically sorted."""
        out = np.empty((self.m, 2), dtype=np.int64)
        k = 0
        for u in range(self.n):
            for w in self.adj[u]:
                if w > u:
                    out[k, 0] = u
                    out[k, 1] = w
                    k += 1
        return out

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edge_array()}

    def to_csr(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int8)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


class SparseSymMatrix:
    """Symmetric 0/1 or small-integer matrix; upper triangle stored once.

    The diagonal is structurally zero for every matrix built here (a
    positive-length path or distance needs two distinct endpoints), so
    ``matvec`` mirrors the stored triangle on the fly.
    """

    __slots__ = ("n", "ell", "kind", "upper", "_upper_t")

    def __init__(self, n: int, ell: int, kind: str, upper: sp.csr_matrix):
        self.n = int(n)
        self.ell = int(ell)
        self.kind = str(kind)
        upper = upper.tocsr()
        upper.sort_indices()
        self.upper = upper
        self._upper_t = upper.T.tocsr()

    @classmethod
    def from_pairs(cls, n: int, ell: int, kind: str, rows, cols, vals) -> "SparseSymMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.int64)
        if rows.size and not (rows < cols).all():
            raise ValueError("pairs must be strictly upper triangular")
        upper = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        upper.sum_duplicates()
        return cls(n, ell, kind, upper)

    @property
    def nnz(self) -> int:
        """Logical nonzero count (both triangles)."""
        return 2 * self.upper.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.upper @ x + self._upper_t @ x

    def to_dense(self) -> np.ndarray:
        dense = self.upper.toarray().astype(np.float64)
        return dense + dense.T

    def to_csr(self) -> sp.csr_matrix:
        return (self.upper + self.upper.T).tocsr()

    def entries(self) -> np.ndarray:
        """Upper-triangle entries as an (nnz, 3) array of (i, j, value)."""
        coo = self.upper.tocoo()
        return np.stack([coo.row, coo.col, coo.data]).T

    def max_value(self) -> int:
        return int(self.upper.data.max()) if self.upper.nnz else 0

    def min_value(self) -> int:
        return int(self.upper.data.min()) if self.upper.nnz else 0


@dataclass(frozen=True, eq=False)
class ShellProfile:
    """Distance layers around one vertex: vertex lists, sizes, type counts."""

    v: int
    layers: tuple
    sizes: np.ndarray
    type_counts: Optional[np.ndarray] = None  # (ell+1, r) when labels given


def bfs_shells(
    g: SparseGraph,
    v: int,
    ell: int,
    sigma: Optional[np.ndarray] = None,
    r: Optional[int] = None,
) -> ShellProfile:
    """Exact distance layers 0..ell around v; per-type counts when sigma given."""
    if not 0 <= v < g.n:
        raise ValueError("vertex out of range")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    adj = g.adj
    seen = {v}
    frontier = [v]
    layers = [np.array([v], dtype=np.int64)]
    for _ in range(ell):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
        layers.append(np.array(sorted(nxt), dtype=np.int64))
    sizes = np.array([len(layer) for layer in layers], dtype=np.int64)
    type_counts = None
    if sigma is not None:
        sigma = np.asarray(sigma)
        nr = int(r if r is not None else sigma.max() + 1)
        type_counts = np.zeros((ell + 1, nr), dtype=np.int64)
        for t, layer in enumerate(layers):
            if len(layer):
                type_counts[t] = np.bincount(sigma[layer], minlength=nr)
    return ShellProfile(v=int(v), layers=tuple(layers), sizes=sizes,
                        type_counts=type_counts)


def distance_matrix(g: SparseGraph, ell: int) -> SparseSymMatrix:
    """0/1 matrix marking pairs at graph distance exactly ell.

    One truncated BFS per vertex; each pair is recorded from its lower
    endpoint.  Cost is the sum over vertices of their ell-ball sizes.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n = g.n
    adj = g.adj
    seen = np.full(n, -1, dtype=np.int64)
    rows: list[int] = []
    cols: list[int] = []
    for v in range(n):
        seen[v] = v
        frontier = [v]
        for _ in range(ell):
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if seen[w] != v:
                        seen[w] = v
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
        for w in frontier:
            if w > v:
                rows.append(v)
                cols.append(w)
    vals = np.ones(len(rows), dtype=np.int64)
    return SparseSymMatrix.from_pairs(n, ell, "distance", rows, cols, vals)


def path_expansion_matrix(g: SparseGraph, ell: int, cap: int = 2) -> SparseSymMatrix:
    """Counts of self-avoiding paths of length exactly ell, saturated at cap.

    Exact DFS enumeration with on-path marking; intended for small ell on
    sparse graphs.  Pairs whose raw count exceeds ``cap`` are clamped and
    reported via a :class:`CapSaturated` warning (they indicate tangles).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = g.n
    adj = g.adj
    on_path = bytearray(n)
    saturated: list[tuple[int, int]] = []
    rows: list[int] = []
    cols: list[int] = []
    vals: list[int] = []

    for v in range(n):
        counts: dict[int, int] = {}

        def walk(u: int, depth: int) -> None:
            if depth == ell:
                counts[u] = counts.get(u, 0) + 1
                return
            on_path[u] = 1
            for w in adj[u]:
                if not on_path[w]:
                    walk(w, depth + 1)
            on_path[u] = 0

        walk(v, 0)
        for w in sorted(counts):
            if w <= v:
                continue
            c = counts[w]
            if c > cap:
                saturated.append((v, w))
                c = cap
            rows.append(v)
            cols.append(w)
            vals.append(c)

    if saturated:
        warnings.warn(CapSaturated(saturated))
    return SparseSymMatrix.from_pairs(n, ell, "path", rows, cols, vals)


def delta_matrix(bl: SparseSymMatrix, dl: SparseSymMatrix) -> SparseSymMatrix:
    """Entrywise difference path-counts minus distance-indicators.

    Raises :class:`NegativeEntry` if any entry is negative: a distance-ell
    pair always carries at least one self-avoiding path of that length, so
    a negative value means the inputs disagree about the graph.
    """
    if bl.n != dl.n:
        raise ValueError("matrix sizes differ")
    if bl.ell != dl.ell:
        raise ValueError("matrices were built for different depths")
    diff = (bl.upper - dl.upper).tocsr()
    diff.eliminate_zeros()
    if diff.nnz and diff.data.min() < 0:
        coo = diff.tocoo()
        bad = [(int(i), int(j)) for i, j, v in zip(coo.row, coo.col, coo.data) if v < 0]
        raise NegativeEntry(f"negative entries at {bad[:5]}")
    return SparseSymMatrix(bl.n, bl.ell, "delta", diff)


def difference_matrix(a: SparseSymMatrix, b: SparseSymMatrix, kind: str = "diff") -> SparseSymMatrix:
    """Signed entrywise difference a - b (used for perturbation spectra)."""
    if a.n != b.n:
        raise ValueError("matrix sizes differ")
    diff = (a.upper - b.upper).tocsr()
    diff.eliminate_zeros()
    return SparseSymMatrix(a.n, a.ell, kind, diff)


def _ball(adj, seen: np.ndarray, v: int, ell: int) -> list[int]:
    """Vertices within distance ell of v; marks them in ``seen`` with stamp v."""
    seen[v] = v
    ball = [v]
    frontier = [v]
    for _ in range(ell):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if seen[w] != v:
                    seen[w] = v
                    nxt.append(w)
        ball.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return ball


def tangle_free_check(g: SparseGraph, ell: int) -> tuple[bool, list[int]]:
    """True iff every radius-ell ball contains at most one independent cycle.

    The cycle count of a ball is its edge excess ``edges - vertices + 1``
    (balls are connected by construction).  Returns the offending vertices.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    n = g.n
    adj = g.adj
    seen = np.full(n, -1, dtype=np.int64)
    offenders = []
    for v in range(n):
        ball = _ball(adj, seen, v, ell)
        edges = 0
        for u in ball:
            for w in adj[u]:
                if seen[w] == v and w > u:
                    edges += 1
        excess = edges - len(ball) + 1
        if excess > 1:
            offenders.append(v)
    return (not offenders), offenders


def shell_sizes_all(g: SparseGraph, ell: int) -> np.ndarray:
    """(n, ell+1) array of layer sizes S_t(v) for every vertex."""
    n = g.n
    adj = g.adj
    seen = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros((n, ell + 1), dtype=np.int64)
    for v in range(n):
        seen[v] = v
        sizes[v, 0] = 1
        frontier = [v]
        for t in range(1, ell + 1):
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if seen[w] != v:
                        seen[w] = v
                        nxt.append(w)
            sizes[v, t] = len(nxt)
            frontier = nxt
            if not frontier:
                break
    return sizes


def shell_growth_report(g: SparseGraph, ell: int, alpha: float) -> tuple[float, float]:
    """(max over t,v of S_t(v)/alpha^t, sum over v of S_ell(v)^2).

    The first statistic tracks how far any neighborhood outruns the mean
    growth rate; the second is the second-moment mass of top shells that
    the adversarial constructions rely on.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    sizes = shell_sizes_all(g, ell)
    powers = alpha ** np.arange(ell + 1)
    max_ratio = float((sizes / powers[None, :]).max())
    top_mass = float((sizes[:, ell].astype(np.float64) ** 2).sum())
    return max_ratio, top_mass


def set_shell_sizes(g: SparseGraph, vertex_set: Sequence[int], ell: int) -> np.ndarray:
    """Multi-source layer sizes S_t(X) for t = 0..ell (S_0 = |X|)."""
    members = sorted({int(v) for v in vertex_set})
    if not members:
        raise ValueError("vertex set must be nonempty")
    adj = g.adj
    seen = np.zeros(g.n, dtype=bool)
    seen[members] = True
    sizes = np.zeros(ell + 1, dtype=np.int64)
    sizes[0] = len(members)
    frontier = members
    for t in range(1, ell + 1):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    nxt.append(w)
        sizes[t] = len(nxt)
        frontier = nxt
        if not frontier:
            break
    return sizes


def set_shell(g: SparseGraph, vertex_set: Sequence[int], ell: int) -> np.ndarray:
    """Vertices at distance exactly ell from the set (multi-source BFS)."""
    members = sorted({int(v) for v in vertex_set})
    if not members:
        raise ValueError("vertex set must be nonempty")
    adj = g.adj
    seen = np.zeros(g.n, dtype=bool)
    seen[members] = True
    frontier = members
    for _ in range(ell):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return np.array(sorted(frontier), dtype=np.int64)


def fundamental_cycles(g: SparseGraph) -> list[np.ndarray]:
    """Vertex sets of the fundamental cycles of a BFS spanning forest.

    Each non-tree edge (u, w) closes one cycle: the two tree paths from u
    and w up to their meeting point, plus the edge itself.  On graphs
    where every small ball holds at most one cycle these are exactly the
    local cycles the difference-matrix bounds need.
    """
    n = g.n
    adj = g.adj
    parent = np.full(n, -1, dtype=np.int64)
    depth = np.full(n, -1, dtype=np.int64)
    cycles = []
    for root in range(n):
        if depth[root] >= 0:
            continue
        depth[root] = 0
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if depth[w] < 0:
                        depth[w] = depth[u] + 1
                        parent[w] = u
                        nxt.append(w)
            frontier = nxt
    for u in range(n):
        for w in adj[u]:
            if w <= u:
                continue
            if parent[w] == u or parent[u] == w:
                continue
            # Walk both endpoints up to the meeting vertex.
            pu, pw = u, w
            left, right = [pu], [pw]
            while pu != pw:
                if depth[pu] >= depth[pw]:
                    pu = parent[pu]
                    left.append(pu)
                else:
                    pw = parent[pw]
                    right.append(pw)
            members = set(left) | set(right)
            cycles.append(np.array(sorted(members), dtype=np.int64))
    return cycles


def dump_matrix(mat: SparseSymMatrix, path) -> None:
    """Text dump for oracle cross-checks: header ``n ell kind``, lines ``i j v``."""
    entries = mat.entries()
    order = np.lexsort((entries[:, 1], entries[:, 0])) if len(entries) else []
    with open(path, "w") as fh:
        fh.write(f"{mat.n} {mat.ell} {mat.kind}\n")
        for idx in order:
            i, j, v = entries[idx]
            fh.write(f"{int(i)} {int(j)} {int(v)}\n")


def load_matrix(path) -> SparseSymMatrix:
    with open(path) as fh:
        header = fh.readline().split()
        n, ell, kind = int(header[0]), int(header[1]), header[2]
        rows, cols, vals = [], [], []
        for line in fh:
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(int(v))
    return SparseSymMatrix.from_pairs(n, ell, kind, rows, cols, vals)
