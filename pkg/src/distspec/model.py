"""Block-model parameters, derived spectral constants, and graph sampling.

The generative model: each of ``n`` vertices independently receives a
hidden type from the prior ``pi``; every unordered pair ``{u, v}`` is then
an edge independently with probability ``min(W[type(u), type(v)] / n, 1)``.
The mean progeny matrix ``M = diag(pi) @ W`` governs the local branching
structure; its eigenvalues decide whether the types can be recovered from
the graph alone (signal-to-noise ratio ``tau = mu2^2 / mu1 > 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .graph import SparseGraph
from .util import make_rng

_TOL_PI = 1e-12
_TOL_REG = 1e-9
_TOL_MULT = 1e-9


class NotPositiveRegular(ValueError):
    """No power of the mean progeny matrix up to r is entrywise positive."""


class InvalidKappa(ValueError):
    """Depth-scaling exponent must be positive."""


@dataclass(frozen=True, eq=False)
class SbmParams:
    """Block count r, connectivity matrix W (per-n scaling), prior pi, size n."""

    r: int
    W: np.ndarray
    pi: np.ndarray
    n: int

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "pi", pi)
        if self.r < 2:
            raise ValueError("need at least two blocks")
        if self.n < self.r:
            raise ValueError("need n >= r")
        if W.shape != (self.r, self.r):
            raise ValueError(f"W must be {self.r}x{self.r}")
        if not np.allclose(W, W.T, atol=0, rtol=0):
            raise ValueError("W must be symmetric")
        if (W < 0).any():
            raise ValueError("W entries must be nonnegative")
        if pi.shape != (self.r,):
            raise ValueError(f"pi must have length {self.r}")
        if (pi < 0).any():
            raise ValueError("pi entries must be nonnegative")
        if abs(pi.sum() - 1.0) > _TOL_PI:
            raise ValueError("pi must sum to 1")

    @property
    def uniform_pi(self) -> bool:
        return bool(np.max(np.abs(self.pi - 1.0 / self.r)) <= _TOL_PI * self.r)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Spectral constants derived from the mean progeny matrix.

    ``mu`` is sorted by absolute value (descending, ties broken by signed
    value); ``phi`` holds the matching normed left eigenvectors as rows.
    ``r0`` counts the informative eigenvalues (``mu_k^2 > mu_1``), ``d``
    the multiplicity of ``|mu_2|``, ``tau`` the signal-to-noise ratio.
    """

    params: SbmParams
    M: np.ndarray
    alpha: float
    mu: np.ndarray
    phi: np.ndarray
    tau: float
    r0: int
    d: int
    degree_regular: bool
    column_sums: np.ndarray = field(repr=False, default=None)

    @property
    def subcritical(self) -> bool:
        return self.mu[0] <= 1.0

    @property
    def above_threshold(self) -> bool:
        return self.r0 > 1

    @property
    def uniform_pi(self) -> bool:
        return self.params.uniform_pi


@dataclass(frozen=True, eq=False)
class TypedGraphSample:
    """A sampled graph together with its hidden type assignment."""

    graph: SparseGraph
    sigma: np.ndarray
    seed: int

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.int64)
        object.__setattr__(self, "sigma", sigma)
        if sigma.shape != (self.graph.n,):
            raise ValueError("sigma must have one label per vertex")


def _canonical_sign(vec: np.ndarray) -> np.ndarray:
    """Flip sign so the first coordinate of nonnegligible magnitude is positive."""
    nz = np.nonzero(np.abs(vec) > 1e-12 * max(1.0, np.abs(vec).max()))[0]
    if nz.size and vec[nz[0]] < 0:
        return -vec
    return vec


def derive_spectral_profile(params: SbmParams) -> SpectralProfile:
    """Compute eigenvalues/eigenvectors of M and the detection constants.

    The spectrum is taken from the symmetric conjugate
    ``S = diag(pi)^(1/2) W diag(pi)^(1/2)``, which shares eigenvalues with
    ``M = diag(pi) W`` and guarantees a real spectrum.  Raises
    :class:`NotPositiveRegular` when no power ``M^t`` with ``t <= r`` is
    entrywise positive.  Degree irregularity and subcriticality are
    recorded as flags, not errors.
    """
    r = params.r
    M = np.diag(params.pi) @ params.W
    sqrt_pi = np.sqrt(params.pi)
    S = sqrt_pi[:, None] * params.W * sqrt_pi[None, :]

    evals, evecs = np.linalg.eigh(S)
    order = np.lexsort((-evals, -np.abs(evals)))
    mu = evals[order]
    U = evecs[:, order]

    # Left eigenvectors of M: phi = diag(pi)^(-1/2) u, then unit norm.
    if (sqrt_pi <= 0).any():
        raise ValueError("pi entries must be positive to derive eigenvectors")
    phi_cols = U / sqrt_pi[:, None]
    phi_cols = phi_cols / np.linalg.norm(phi_cols, axis=0, keepdims=True)
    phi = np.array([_canonical_sign(phi_cols[:, k]) for k in range(r)])

    power = M.copy()
    for _ in range(r):
        if (power > 0).all():
            break
        power = power @ M
    else:
        raise NotPositiveRegular(
            f"no power of M up to {r} is entrywise positive"
        )

    column_sums = M.sum(axis=0)
    alpha = float(column_sums.mean())
    degree_regular = bool(np.max(np.abs(column_sums - alpha)) <= _TOL_REG)

    tau = float(mu[1] ** 2 / mu[0])
    r0 = int(np.sum(mu**2 > mu[0]))
    d = int(np.sum(np.abs(np.abs(mu) - abs(mu[1])) <= _TOL_MULT * max(1.0, abs(mu[1]))))

    return SpectralProfile(
        params=params,
        M=M,
        alpha=alpha,
        mu=mu,
        phi=phi,
        tau=tau,
        r0=r0,
        d=d,
        degree_regular=degree_regular,
        column_sums=column_sums,
    )


def check_degree_regularity(profile: SpectralProfile) -> tuple[bool, np.ndarray]:
    """Whether every column of M sums to alpha; residuals returned for diagnostics."""
    residuals = profile.column_sums - profile.alpha
    return bool(np.max(np.abs(residuals)) <= _TOL_REG), residuals


def sample_graph(params: SbmParams, seed: int) -> TypedGraphSample:
    """Draw one graph: i.i.d. types from pi, independent per-pair edge coins.

    Edge probability for ``{u, v}`` is ``min(W[sigma(u), sigma(v)] / n, 1)``;
    probabilities at or above 1 are handled by the clamp.  The same seed
    reproduces the same edge list and type vector bit for bit.
    """
    rng = make_rng(seed)
    n, r = params.n, params.r
    sigma = rng.choice(r, size=n, p=params.pi)
    prob = np.minimum(params.W / n, 1.0)

    # Row-blocked Bernoulli sweep over the upper triangle; the block size
    # depends only on n so the draw order (hence the output) is fixed.
    block = max(1, (1 << 22) // n)
    chunks = []
    for start in range(0, n, block):
        stop = min(start + block, n)
        p_rows = prob[np.ix_(sigma[start:stop], sigma)]
        hits = rng.random((stop - start, n)) < p_rows
        rows, cols = np.nonzero(hits)
        rows = rows + start
        keep = cols > rows
        if keep.any():
            chunks.append(np.stack([rows[keep], cols[keep]], axis=1))
    if chunks:
        edges = np.concatenate(chunks, axis=0)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    graph = SparseGraph.from_edges(n, edges)
    return TypedGraphSample(graph=graph, sigma=sigma, seed=int(seed))


class EllChoice(NamedTuple):
    """Chosen matrix depth plus flags about how it was obtained."""

    ell: int
    overridden: bool
    clamped: bool
    kappa_in_regime: bool


def choose_ell(
    profile: SpectralProfile,
    n: int,
    kappa: float = 1.0 / 13.0,
    override: Optional[int] = None,
) -> EllChoice:
    """Depth ell ~ kappa * log_alpha(n), clamped to at least 1.

    ``override`` short-circuits the formula (recorded in the flags);
    ``kappa_in_regime`` records whether kappa sits strictly below 1/12,
    the regime where the eigenvalue-separation guarantees apply.
    """
    if override is not None:
        if override < 1:
            raise ValueError("override depth must be >= 1")
        return EllChoice(int(override), True, False, kappa < 1.0 / 12.0)
    if kappa <= 0:
        raise InvalidKappa(f"kappa must be positive, got {kappa}")
    if profile.mu[0] <= 1.0:
        raise ValueError("alpha must exceed 1 to choose a depth")
    # Small epsilon guards floor() against float dust at exact integer targets.
    raw = math.floor(kappa * math.log(n) / math.log(profile.alpha) + 1e-9)
    clamped = raw < 1
    return EllChoice(max(1, raw), False, clamped, kappa < 1.0 / 12.0)


def sample_to_json(sample: TypedGraphSample, params: SbmParams) -> dict:
    """Graph document: 0-based vertices, each edge listed once with u < v."""
    edges = sample.graph.edge_array()
    return {
        "n": int(sample.graph.n),
        "r": int(params.r),
        "seed": int(sample.seed),
        "types": [int(t) for t in sample.sigma],
        "edges": [[int(u), int(v)] for u, v in edges],
    }


def sample_from_json(doc: dict) -> TypedGraphSample:
    n = int(doc["n"])
    edges = np.asarray(doc["edges"], dtype=np.int64).reshape(-1, 2)
    graph = SparseGraph.from_edges(n, edges)
    sigma = np.asarray(doc["types"], dtype=np.int64)
    return TypedGraphSample(graph=graph, sigma=sigma, seed=int(doc.get("seed", 0)))


def circulant_connectivity(diag: float, off: float, r: int) -> np.ndarray:
    """Connectivity matrix with one on-diagonal and one off-diagonal weight."""
    W = np.full((r, r), float(off))
    np.fill_diagonal(W, float(diag))
    return W
