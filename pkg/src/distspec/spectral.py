"""Matrix-free symmetric eigensolver and spectral-radius diagnostics.

The solver is a deflated Lanczos iteration with full reorthogonalization:
converged eigenpairs are projected out of the operator and the Krylov
basis is kept orthogonal explicitly, which is cheap at the target sizes
(a handful of extreme pairs of sparse matrices with a few hundred
thousand nonzeros).  Pairs are ordered by absolute eigenvalue, matching
how the informative eigenvalues of the distance matrix are read off.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .graph import SparseGraph, SparseSymMatrix, delta_matrix, distance_matrix, \
    fundamental_cycles, path_expansion_matrix, set_shell_sizes, tangle_free_check
from .util import make_rng


class DegenerateOperator(ValueError):
    """The operator acts on a zero-dimensional space."""


class ZeroGap(ValueError):
    """Eigenvalue gap must be positive for a perturbation bound."""


class NoConvergence(UserWarning):
    """Fewer pairs converged than requested; partial results returned."""

    def __init__(self, converged: int, requested: int, iterations: int):
        self.converged = converged
        self.requested = requested
        self.iterations = iterations
        super().__init__(
            f"{converged}/{requested} eigenpairs converged after {iterations} matvecs"
        )


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class SeparationReport:
    """Measured top eigenvalues against their predicted scales.

    ``ratios[k]`` compares the (k+1)-th eigenvalue by modulus with
    mu_{k+1}^ell for the informative range; ``bulk_ratio`` compares the
    first non-informative eigenvalue with alpha^(ell/2).
    """

    lam: np.ndarray
    mu_powers: np.ndarray
    bulk_scale: float
    ratios: np.ndarray
    bulk_ratio: float
    informative_ok: bool
    bulk_ok: bool
    chosen_second: int = 1


MatvecLike = Union[Callable[[np.ndarray], np.ndarray], SparseSymMatrix]


def _as_matvec(op: MatvecLike) -> Callable[[np.ndarray], np.ndarray]:
    if hasattr(op, "matvec"):
        return op.matvec
    return op


def _canonical_sign(vec: np.ndarray) -> np.ndarray:
    scale = np.abs(vec).max()
    if scale == 0:
        return vec
    nz = np.nonzero(np.abs(vec) > 1e-12 * scale)[0]
    if nz.size and vec[nz[0]] < 0:
        return -vec
    return vec


def top_eigenpairs(
    op: MatvecLike,
    n: int,
    k: int,
    tol: float = 1e-8,
    max_iter: int = 5000,
    seed: int = 0,
) -> list[EigenPair]:
    """Top-k eigenpairs by absolute value of a symmetric operator.

    Deflated Lanczos with full reorthogonalization against both the
    in-progress Krylov basis and previously converged vectors.  Results
    are deterministic given the seed.  If the iteration budget runs out
    a :class:`NoConvergence` warning is issued and the converged pairs
    are returned.  Eigenvector signs are canonicalized (first nonzero
    coordinate positive).
    """
    if n <= 0:
        raise DegenerateOperator("operator dimension must be positive")
    matvec = _as_matvec(op)
    k = min(int(k), n)
    rng = make_rng(seed)

    conv_vals: list[float] = []
    conv_vecs: list[np.ndarray] = []
    used = 0
    scale = 1.0  # running estimate of the operator norm
    carry: Optional[np.ndarray] = None  # best unconverged Ritz vector

    def deflate(x: np.ndarray) -> np.ndarray:
        for w in conv_vecs:
            x = x - np.dot(w, x) * w
        return x

    def accept_gate(res: float) -> bool:
        # Absolute gate below the per-pair allowance tol*max(1, |lam|):
        # keeps deflation leakage from earlier pairs under later budgets.
        return res <= 0.2 * tol * max(1.0, scale) / max(1.0, float(k))

    while len(conv_vals) < k and used < max_iter:
        if carry is not None:
            q = deflate(carry)
            carry = None
        else:
            q = deflate(rng.standard_normal(n))
        nq = np.linalg.norm(q)
        if nq < 1e-10:
            q = deflate(rng.standard_normal(n))
            nq = np.linalg.norm(q)
            if nq < 1e-10:  # converged space exhausts the whole space
                break
        basis = [q / nq]
        alphas: list[float] = []
        betas: list[float] = []
        steps = min(n - len(conv_vals), max(2 * k + 30, 100), max_iter - used)
        broke_down = False
        for j in range(steps):
            used += 1
            w = deflate(matvec(basis[j]))
            a = float(np.dot(basis[j], w))
            alphas.append(a)
            scale = max(scale, abs(a))
            w = w - a * basis[j]
            if j > 0:
                w = w - betas[j - 1] * basis[j - 1]
            # Full reorthogonalization, twice for numerical safety.
            B = np.array(basis)
            w = w - B.T @ (B @ w)
            w = w - B.T @ (B @ w)
            b = float(np.linalg.norm(w))
            if b < 1e-13 * max(1.0, scale):
                broke_down = True
                break
            betas.append(b)
            basis.append(w / b)
        m = len(alphas)
        T = np.diag(alphas)
        for i, b in enumerate(betas[: m - 1]):
            T[i, i + 1] = T[i + 1, i] = b
        tvals, tvecs = np.linalg.eigh(T)
        scale = max(scale, float(np.abs(tvals).max(initial=0.0)))
        top = int(np.argmax(np.abs(tvals)))
        B = np.array(basis[:m])
        # Accept at most one pair per sweep, and only the sweep's extreme
        # Ritz pair: each accepted value then dominates the remaining
        # deflated spectrum, which keeps the set correct under exact
        # multiplicity (a single Krylov run sees one copy per eigenvalue;
        # the fresh deflated restart finds the others).
        x = deflate(B.T @ tvecs[:, top])
        nx = np.linalg.norm(x)
        if nx < 1e-8:
            continue
        x /= nx
        lam = float(np.dot(x, matvec(x)))
        res = float(np.linalg.norm(matvec(x) - lam * x))
        if accept_gate(res) or (broke_down and res <= tol * max(1.0, abs(lam))):
            conv_vals.append(lam)
            conv_vecs.append(x)
        else:
            carry = x

    pairs = [
        EigenPair(value=v, vector=_canonical_sign(x),
                  residual=float(np.linalg.norm(matvec(x) - v * x)))
        for v, x in zip(conv_vals, conv_vecs)
    ]
    pairs.sort(key=lambda p: (-abs(p.value), -p.value))
    if len(pairs) < k:
        warnings.warn(NoConvergence(len(pairs), k, used))
    return pairs


def separation_report(
    pairs: Sequence[EigenPair],
    profile,
    ell: int,
    n: Optional[int] = None,
    factor: float = 10.0,
) -> SeparationReport:
    """Compare measured eigenvalues with the predicted powers.

    Informative eigenvalues should track mu_k^ell within ``factor``;
    everything below the informative range should stay under
    log(n)^2 * alpha^(ell/2).
    """
    lam = np.array([p.value for p in pairs])
    if n is None:
        n = len(pairs[0].vector) if pairs else 1
    r0 = profile.r0
    mu_powers = np.array([profile.mu[j] ** ell for j in range(min(r0, len(lam)))])
    ratios = np.array([
        lam[j] / mu_powers[j] if mu_powers[j] != 0 else np.inf
        for j in range(len(mu_powers))
    ])
    bulk_scale = float(profile.alpha ** (ell / 2.0))
    if len(lam) > r0:
        bulk_ratio = float(abs(lam[r0]) / bulk_scale)
    else:
        bulk_ratio = float("nan")
    informative_ok = bool(
        len(ratios) and all(1.0 / factor <= rr <= factor for rr in np.abs(ratios))
    )
    logn2 = float(np.log(n) ** 2)
    bulk_ok = bool(np.isnan(bulk_ratio) or bulk_ratio <= logn2)
    return SeparationReport(
        lam=lam,
        mu_powers=mu_powers,
        bulk_scale=bulk_scale,
        ratios=ratios,
        bulk_ratio=bulk_ratio,
        informative_ok=informative_ok,
        bulk_ok=bulk_ok,
    )


def qc_bound(shell_sizes: Sequence[int]) -> tuple[float, float]:
    """Spectral-radius bound from layer sizes around a cycle or vertex set.

    Builds the (ell+1) x (ell+1) matrix with entries sqrt(S_t * S_u) where
    t + u <= ell (zero elsewhere) and returns ``(exact, bound)``: its exact
    spectral radius and the row-sum bound max_t sum_{u <= ell-t} sqrt(S_t S_u).
    The exact value never exceeds the bound.
    """
    S = np.asarray(shell_sizes, dtype=np.float64)
    if (S < 0).any():
        raise ValueError("shell sizes must be nonnegative")
    ell = len(S) - 1
    root = np.sqrt(S)
    Q = np.outer(root, root)
    t = np.arange(ell + 1)
    Q[t[:, None] + t[None, :] > ell] = 0.0
    evals = np.linalg.eigvalsh(Q)
    exact = float(np.abs(evals).max())
    rowsums = [root[i] * root[: ell - i + 1].sum() for i in range(ell + 1)]
    bound = float(max(rowsums))
    return exact, bound


@dataclass(frozen=True, eq=False)
class DeltaRadiusReport:
    rho: float
    cycle_bound: float
    log_bound: float
    tangle_free: bool
    n_cycles: int


def delta_radius_check(
    g: SparseGraph,
    ell: int,
    alpha: float,
    seed: int = 0,
    dl: Optional[SparseSymMatrix] = None,
    bl: Optional[SparseSymMatrix] = None,
) -> DeltaRadiusReport:
    """Spectral radius of (path-counts minus distance-indicators) vs its bounds.

    The difference matrix is nonnegative, so its radius is the top
    eigenvalue by modulus; it is compared against the per-cycle bound
    (max over fundamental cycles of the exact small-matrix radius) and
    the log(n)-scaled growth bound.  Only feasible where the path
    matrix is (n up to a few thousand, small ell).
    """
    dl = distance_matrix(g, ell) if dl is None else dl
    bl = path_expansion_matrix(g, ell) if bl is None else bl
    delta = delta_matrix(bl, dl)
    if delta.nnz == 0:
        rho = 0.0
    else:
        pairs = top_eigenpairs(delta, g.n, k=1, seed=seed)
        rho = abs(pairs[0].value) if pairs else float("nan")
    cycles = fundamental_cycles(g)
    cycle_bound = 0.0
    for cyc in cycles:
        sizes = set_shell_sizes(g, cyc, ell)
        exact, _ = qc_bound(sizes)
        cycle_bound = max(cycle_bound, exact)
    log_bound = float(np.log(g.n) * alpha ** (ell / 2.0)) if g.n > 1 else 0.0
    tf, _ = tangle_free_check(g, ell)
    return DeltaRadiusReport(
        rho=rho,
        cycle_bound=cycle_bound,
        log_bound=log_bound,
        tangle_free=tf,
        n_cycles=len(cycles),
    )


def davis_kahan_bound(gap: float, perturbation_norm: float, d: int) -> float:
    """Eigenspace rotation bound 2*sqrt(2d)*norm/gap (diagnostic scalar)."""
    if gap <= 0:
        raise ZeroGap("eigenvalue gap must be positive")
    return float(2.0 * np.sqrt(2.0 * d) * perturbation_norm / gap)
