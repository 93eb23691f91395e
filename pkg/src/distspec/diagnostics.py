"""White-box local statistics linking neighborhoods to eigenvector signal.

These reports use the hidden type assignment, so they live apart from the
detection path: per-vertex shell type counts are projected on the model
eigenvectors, their normalized second moments estimated, and the
resulting vectors compared against the eigenvectors actually extracted
from the distance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import SparseGraph, distance_matrix
from .model import SpectralProfile
from .spectral import EigenPair, top_eigenpairs
from .util import derive_seed


@dataclass(frozen=True, eq=False)
class LocalMomentReport:
    """Second moments of eigenvector-projected shell counts.

    ``diag_raw[k]`` is the mean of <phi_k, Y_ell(v)>^2 over vertices,
    ``diag_norm[k]`` the same divided by mu_k^(2*ell); ``cross_raw`` holds
    the mixed products for j != k.  ``alignment[k]`` is the cosine between
    the matrix eigenvector k and the projected-count vector, and
    ``rho_reference`` the predicted limit 1/(r*(tau-1)) of the normalized
    second moment for the informative directions (uniform prior only).
    """

    diag_raw: np.ndarray
    diag_norm: np.ndarray
    cross_raw: np.ndarray
    alignment: np.ndarray
    rho_reference: float
    ell: int


def shell_type_counts(g: SparseGraph, sigma: np.ndarray, r: int, ell: int) -> np.ndarray:
    """(n, r) matrix whose row v counts types among vertices at distance ell from v."""
    n = g.n
    adj = g.adj
    sigma = np.asarray(sigma, dtype=np.int64)
    seen = np.full(n, -1, dtype=np.int64)
    counts = np.zeros((n, r), dtype=np.int64)
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
            counts[v, sigma[w]] += 1
    return counts


def local_moment_report(
    g: SparseGraph,
    sigma: np.ndarray,
    profile: SpectralProfile,
    ell: int,
    eigenpairs: Optional[Sequence[EigenPair]] = None,
    seed: int = 0,
) -> LocalMomentReport:
    """Compute the shell-count moments and their alignment with the spectrum."""
    r = profile.params.r
    counts = shell_type_counts(g, sigma, r, ell).astype(np.float64)
    proj = counts @ profile.phi.T        # column k holds <phi_k, Y_ell(v)>
    n = g.n
    diag_raw = (proj**2).mean(axis=0)
    mu_sq = profile.mu.astype(np.float64) ** (2 * ell)
    diag_norm = np.divide(diag_raw, mu_sq,
                          out=np.full_like(diag_raw, np.inf), where=mu_sq > 0)
    cross_raw = (proj.T @ proj) / n
    np.fill_diagonal(cross_raw, 0.0)

    if eigenpairs is None:
        dmat = distance_matrix(g, ell)
        eigenpairs = top_eigenpairs(dmat, n, k=min(max(profile.r0, 2), n),
                                    seed=derive_seed(seed, "diag-eig"))
    alignment = np.zeros(min(len(eigenpairs), r))
    for k in range(len(alignment)):
        nk = proj[:, k]
        denom = np.linalg.norm(eigenpairs[k].vector) * np.linalg.norm(nk)
        alignment[k] = abs(float(np.dot(eigenpairs[k].vector, nk))) / denom if denom else 0.0

    rho_ref = float("nan")
    if profile.uniform_pi and profile.tau > 1.0:
        rho_ref = 1.0 / (r * (profile.tau - 1.0))
    return LocalMomentReport(
        diag_raw=diag_raw,
        diag_norm=diag_norm,
        cross_raw=cross_raw,
        alignment=alignment,
        rho_reference=rho_ref,
        ell=ell,
    )
