"""Multitype branching-process simulator and its moment identities.

A particle of type j leaves an independent Poisson(M[i, j]) number of
type-i children, so the population vector evolves as
Z_{t+1} ~ Poisson(M @ Z_t) componentwise.  For an eigenvalue mu of M with
mu^2 > alpha and a matching left eigenvector phi, the rescaled projection
mu^(-t) <phi, Z_t> is a martingale with an L2 limit; its per-root-type
moments satisfy exact linear relations that are verified here both by
closed-form solves and by Monte Carlo.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import SpectralProfile
from .util import derive_seed, make_rng

DEFAULT_CAP = 10**7


class SingularSystem(ValueError):
    """The moment system needs mu^2 > alpha to be solvable."""


class PopulationCapHit(UserWarning):
    def __init__(self, count: int, runs: int):
        self.count = count
        super().__init__(f"{count}/{runs} runs hit the population cap and were frozen")


@dataclass(frozen=True, eq=False)
class GwConfig:
    M: np.ndarray
    root_law: Union[int, np.ndarray]  # point mass on a type, or a probability vector
    depth: int = 8
    runs: int = 10**5
    seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("M must be square")
        if (M < 0).any():
            raise ValueError("M entries must be nonnegative")
        object.__setattr__(self, "M", M)
        if self.depth < 0 or self.runs < 1:
            raise ValueError("need depth >= 0 and runs >= 1")
        if not isinstance(self.root_law, (int, np.integer)):
            law = np.asarray(self.root_law, dtype=float)
            if law.shape != (M.shape[0],) or (law < 0).any() or abs(law.sum() - 1) > 1e-12:
                raise ValueError("root law must be a probability vector over types")
            object.__setattr__(self, "root_law", law)

    @property
    def r(self) -> int:
        return self.M.shape[0]

    def root_vector(self) -> np.ndarray:
        """Mean of the root distribution as a type vector."""
        if isinstance(self.root_law, (int, np.integer)):
            nu = np.zeros(self.r)
            nu[int(self.root_law)] = 1.0
            return nu
        return np.asarray(self.root_law, dtype=float)


@dataclass(frozen=True, eq=False)
class PopulationSample:
    """Per-run population trajectories (runs, depth+1, r) plus cap flags."""

    Z: np.ndarray
    root_types: np.ndarray
    capped: np.ndarray
    cfg: GwConfig

    @property
    def ok(self) -> np.ndarray:
        return ~self.capped


@dataclass(frozen=True, eq=False)
class MartingaleSample:
    """Terminal rescaled projections X = mu^(-depth) <phi, Z_depth> per run."""

    X: np.ndarray
    mean: float
    variance: float
    stderr: float
    expected_mean: float
    per_type_mean: np.ndarray
    per_type_var: np.ndarray
    per_type_count: np.ndarray
    capped_runs: int


def simulate_population(cfg: GwConfig) -> PopulationSample:
    """Exact multitype branching with Poisson offspring, vectorized over runs.

    Runs whose total population exceeds the cap are frozen at that state
    and flagged; moment estimators should exclude them (the flags say how
    many there were).
    """
    rng = make_rng(cfg.seed)
    r = cfg.r
    if isinstance(cfg.root_law, (int, np.integer)):
        root_types = np.full(cfg.runs, int(cfg.root_law), dtype=np.int64)
    else:
        root_types = rng.choice(r, size=cfg.runs, p=cfg.root_law)
    Z = np.zeros((cfg.runs, cfg.depth + 1, r), dtype=np.int64)
    Z[np.arange(cfg.runs), 0, root_types] = 1
    capped = np.zeros(cfg.runs, dtype=bool)
    MT = cfg.M.T
    for t in range(cfg.depth):
        lam = Z[:, t, :] @ MT
        nxt = rng.poisson(lam)
        frozen = capped | (nxt.sum(axis=1) > cfg.cap)
        nxt[frozen] = Z[frozen, t, :]
        capped |= frozen
        Z[:, t + 1, :] = nxt
    if capped.any():
        warnings.warn(PopulationCapHit(int(capped.sum()), cfg.runs))
    return PopulationSample(Z=Z, root_types=root_types, capped=capped, cfg=cfg)


def martingale_values(sample: PopulationSample, phi: np.ndarray, mu: float,
                      depth: Optional[int] = None) -> np.ndarray:
    """X = mu^(-t) <phi, Z_t> for every run at the given depth."""
    t = sample.cfg.depth if depth is None else int(depth)
    return (sample.Z[:, t, :] @ np.asarray(phi, dtype=float)) / float(mu) ** t


def martingale_limit_check(cfg: GwConfig, phi: np.ndarray, mu: float) -> MartingaleSample:
    """Estimate the limit's mean and variance; the mean should match <phi, nu>.

    Requires mu^2 > alpha (the largest eigenvalue of M) for the limit to
    carry finite variance.  Capped runs are excluded from the estimates.
    """
    alpha = float(np.max(np.abs(np.linalg.eigvals(cfg.M))))
    if mu**2 <= alpha:
        raise SingularSystem(f"need mu^2 > alpha, got mu^2 = {mu**2}, alpha = {alpha}")
    sample = simulate_population(cfg)
    phi = np.asarray(phi, dtype=float)
    X_all = martingale_values(sample, phi, mu)
    ok = sample.ok
    X = X_all[ok]
    r = cfg.r
    per_mean = np.full(r, np.nan)
    per_var = np.full(r, np.nan)
    per_count = np.zeros(r, dtype=np.int64)
    for i in range(r):
        mask = ok & (sample.root_types == i)
        per_count[i] = mask.sum()
        if per_count[i] > 1:
            per_mean[i] = X_all[mask].mean()
            per_var[i] = X_all[mask].var(ddof=1)
    return MartingaleSample(
        X=X,
        mean=float(X.mean()),
        variance=float(X.var(ddof=1)),
        stderr=float(X.std(ddof=1) / np.sqrt(len(X))),
        expected_mean=float(np.dot(phi, cfg.root_vector())),
        per_type_mean=per_mean,
        per_type_var=per_var,
        per_type_count=per_count,
        capped_runs=int(sample.capped.sum()),
    )


def moment_closed_forms(
    profile: SpectralProfile, phi: np.ndarray, mu: float
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Exact second moments of the martingale limits by linear solve.

    Returns (c2, m2, var_sum, sqmean_sum) where c2 / m2 are the per-root-
    type variances / second moments, var_sum = sum(c2) and sqmean_sum =
    sum(m2).  Under a uniform prior with equal column sums these equal
    1/(tau_mu - 1) and tau_mu/(tau_mu - 1) with tau_mu = mu^2/alpha,
    which is asserted to 1e-9.
    """
    M = profile.M
    alpha = profile.alpha
    if mu**2 <= alpha:
        raise SingularSystem(f"need mu^2 > alpha, got mu^2 = {mu**2}, alpha = {alpha}")
    phi = np.asarray(phi, dtype=float)
    A = np.eye(len(phi)) - M / mu**2
    m2 = np.linalg.solve(A, phi**2)
    c2 = m2 - phi**2
    var_sum = float(c2.sum())
    sqmean_sum = float(m2.sum())
    if profile.uniform_pi and profile.degree_regular:
        tau_mu = mu**2 / alpha
        expect_var = 1.0 / (tau_mu - 1.0)
        expect_sq = tau_mu / (tau_mu - 1.0)
        if abs(var_sum - expect_var) > 1e-9 or abs(sqmean_sum - expect_sq) > 1e-9:
            raise AssertionError(
                f"moment identities violated: {var_sum} vs {expect_var}, "
                f"{sqmean_sum} vs {expect_sq}"
            )
    return c2, m2, var_sum, sqmean_sum


def finite_depth_second_moments(
    profile: SpectralProfile, phi: np.ndarray, mu: float, depth: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact per-root-type (variances, second moments) at a finite depth.

    One generation of branching gives m2_t = phi^2 + (M^T / mu^2) m2_{t-1}
    with m2_0 = phi^2 (the depth-0 value is deterministic), which is what
    a depth-t simulation estimates; it converges to the closed-form limit
    of :func:`moment_closed_forms` geometrically at rate alpha/mu^2.
    """
    if mu**2 <= profile.alpha:
        raise SingularSystem("need mu^2 > alpha")
    phi = np.asarray(phi, dtype=float)
    m2 = phi**2
    MT = profile.M.T / mu**2
    for _ in range(depth):
        m2 = phi**2 + MT @ m2
    return m2 - phi**2, m2


def _cumulant(x: np.ndarray, order: int) -> float:
    """Unbiased k-statistic of the given order (orders 1..3)."""
    n = len(x)
    if order == 1:
        return float(x.mean())
    if order == 2:
        return float(x.var(ddof=1))
    if order == 3:
        m = x.mean()
        s3 = ((x - m) ** 3).sum()
        return float(n * s3 / ((n - 1) * (n - 2)))
    raise ValueError("cumulant order must be 1, 2, or 3")


def _raw_moment(x: np.ndarray, order: int) -> float:
    return float((x**order).mean())


@dataclass(frozen=True, eq=False)
class CumulantCheck:
    order: int
    cumulants: np.ndarray       # estimated j-th cumulant per root type, depth t
    predicted: np.ndarray       # (M / mu^j) @ raw moments at depth t-1
    residual: np.ndarray
    residual_inf: float
    bootstrap_se: np.ndarray
    max_z: float


def cumulant_relation_check(
    profile: SpectralProfile,
    phi: np.ndarray,
    mu: float,
    order: int = 2,
    runs: int = 10**5,
    seed: int = 0,
    depth: int = 8,
    bootstrap: int = 200,
) -> CumulantCheck:
    """Monte Carlo check of the cumulant/moment recursion c_j = (M / mu^j) m_j.

    One generation of branching relates the order-j cumulants at depth t
    to the order-j raw moments at depth t-1 exactly, so the residual of
    the recursion estimated at matched depths is pure sampling noise.
    The standard error comes from a joint bootstrap over runs.  Orders up
    to 3 are supported.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2, or 3")
    M = profile.M
    alpha = profile.alpha
    if mu**2 <= alpha:
        raise SingularSystem(f"need mu^2 > alpha, got mu^2 = {mu**2}, alpha = {alpha}")
    r = M.shape[0]
    phi = np.asarray(phi, dtype=float)
    deep = []     # X at the final depth, per root type
    shallow = []  # X one generation earlier, same runs
    for i in range(r):
        cfg = GwConfig(M=M, root_law=i, depth=depth, runs=runs,
                       seed=derive_seed(seed, f"gw-root-{i}"))
        sample = simulate_population(cfg)
        ok = sample.ok
        deep.append(martingale_values(sample, phi, mu)[ok])
        shallow.append(martingale_values(sample, phi, mu, depth=depth - 1)[ok])

    cum = np.array([_cumulant(x, order) for x in deep])
    raw = np.array([_raw_moment(x, order) for x in shallow])
    predicted = (M / mu**order) @ raw
    residual = cum - predicted

    rng = make_rng(derive_seed(seed, "gw-bootstrap"))
    boot = np.empty((bootstrap, r))
    for b in range(bootstrap):
        cums = np.empty(r)
        raws = np.empty(r)
        for i in range(r):
            idx = rng.integers(0, len(deep[i]), size=len(deep[i]))
            cums[i] = _cumulant(deep[i][idx], order)
            raws[i] = _raw_moment(shallow[i][idx], order)
        boot[b] = cums - (M / mu**order) @ raws
    se = boot.std(axis=0, ddof=1)
    z = np.abs(residual) / np.where(se > 0, se, np.inf)
    return CumulantCheck(
        order=order,
        cumulants=cum,
        predicted=predicted,
        residual=residual,
        residual_inf=float(np.abs(residual).max()),
        bootstrap_se=se,
        max_z=float(z.max()),
    )
