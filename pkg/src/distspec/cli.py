"""Batch experiment harness: generate, perturb, detect, score, verify.

Commands
--------
generate   sample a graph from a config profile and write the graph JSON
detect     run the detection pipeline on a graph file, write the assignment
perturb    plant a clique within a vertex budget and write the edited graph
sweep      seeds x gamma grid -> CSV of experiment records
verify     run a named invariant suite (gw | spectra | bounds | oracles | all)
gw         branching-process moment checks -> JSON records

All randomness funnels through one seed; per-phase seeds are derived by
labeled hashing, so any CSV row is reproducible from (config, seed) alone
(timing columns excepted).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adversary import build_rogue_certificate, plant_clique, qk_bound
from .graph import SparseGraph, distance_matrix, path_expansion_matrix
from .gw import (
    GwConfig,
    cumulant_relation_check,
    martingale_limit_check,
    moment_closed_forms,
)
from .model import (
    SbmParams,
    choose_ell,
    derive_spectral_profile,
    sample_from_json,
    sample_graph,
    sample_to_json,
)
from .reconstruct import detect, overlap
from .spectral import delta_radius_check, qc_bound, top_eigenpairs
from .util import derive_seed

CSV_HEADER = ("seed,n,r,ell,gamma,overlap,lambda1,lambda2,lambda3,lambda4,"
              "qk_bound,rogue_rayleigh,ms_build,ms_eig,ms_label")
CSV_VERSION = "# distspec-records v1"


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    params: SbmParams
    ell: Optional[int] = None
    kappa: Optional[float] = None
    seeds: tuple = (1,)
    matrix_kind: str = "distance"
    gammas: tuple = ()
    perturbation: str = "clique"
    rogue: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("need at least one seed")
        if any(gamma < 0 for gamma in self.gammas):
            raise ValueError("gamma values must be nonnegative")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        p = doc["params"]
        params = SbmParams(r=int(p["r"]), W=np.asarray(p["W"], dtype=float),
                           pi=np.asarray(p["pi"], dtype=float), n=int(p["n"]))
        return cls(
            params=params,
            ell=doc.get("ell"),
            kappa=doc.get("kappa"),
            seeds=tuple(int(s) for s in doc.get("seeds", [1])),
            matrix_kind=doc.get("matrix", "distance"),
            gammas=tuple(int(x) for x in doc.get("gammas", [])),
            perturbation=doc.get("perturbation", "clique"),
            rogue=bool(doc.get("rogue", False)),
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def resolve_ell(self) -> int:
        profile = derive_spectral_profile(self.params)
        choice = choose_ell(profile, self.params.n,
                            kappa=self.kappa if self.kappa else 1.0 / 13.0,
                            override=self.ell)
        return choice.ell


@dataclass(eq=False)
class ExperimentRecord:
    seed: int
    n: int
    r: int
    ell: int
    gamma: int
    overlap: float
    lambdas: tuple = (float("nan"),) * 4
    qk: Optional[float] = None
    rogue_rayleigh: Optional[float] = None
    ms_build: float = 0.0
    ms_eig: float = 0.0
    ms_label: float = 0.0

    def to_csv_row(self) -> str:
        lam = list(self.lambdas)[:4] + [float("nan")] * max(0, 4 - len(self.lambdas))

        def num(x, places=6):
            if x is None or (isinstance(x, float) and np.isnan(x)):
                return ""
            return f"{x:.{places}f}"

        parts = [str(self.seed), str(self.n), str(self.r), str(self.ell),
                 str(self.gamma), num(self.overlap)]
        parts += [num(v) for v in lam]
        parts += [num(self.qk), num(self.rogue_rayleigh),
                  num(self.ms_build, 3), num(self.ms_eig, 3), num(self.ms_label, 3)]
        return ",".join(parts)


def _default_config() -> ExperimentConfig:
    params = SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                       pi=np.array([0.5, 0.5]), n=2000)
    return ExperimentConfig(params=params, ell=4)


def _resolve_ell(args, config: ExperimentConfig) -> int:
    """Depth resolution order: --ell flag, --kappa flag, then the config."""
    if args.ell:
        return int(args.ell)
    if args.kappa:
        profile = derive_spectral_profile(config.params)
        return choose_ell(profile, config.params.n, kappa=args.kappa).ell
    if config.ell:
        return int(config.ell)
    return config.resolve_ell()


def _load_config(path: Optional[str]) -> ExperimentConfig:
    return ExperimentConfig.load(path) if path else _default_config()


def _load_graph(path: str):
    with open(path) as fh:
        return sample_from_json(json.load(fh))


def cmd_generate(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else config.seeds[0]
    sample = sample_graph(config.params, seed)
    doc = sample_to_json(sample, config.params)
    out = args.out or f"graph-{seed}.json"
    with open(out, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
    print(f"wrote {out}: n={doc['n']} edges={len(doc['edges'])} seed={seed}")
    return 0


def cmd_detect(args) -> int:
    config = _load_config(args.config)
    sample = _load_graph(args.graph)
    profile = derive_spectral_profile(config.params)
    ell = _resolve_ell(args, config)
    seed = args.seed if args.seed is not None else sample.seed
    matrix_kind = args.matrix or config.matrix_kind

    t0 = time.perf_counter()
    if matrix_kind == "distance":
        mat = distance_matrix(sample.graph, ell)
    else:
        mat = path_expansion_matrix(sample.graph, ell)
    ms_build = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    pairs = top_eigenpairs(mat, sample.graph.n, k=min(4, sample.graph.n),
                           seed=derive_seed(seed, "eig"))
    ms_eig = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    assignment, report = detect(sample.graph, profile, ell, seed,
                                matrix_kind=matrix_kind)
    ms_label = (time.perf_counter() - t0) * 1000.0 - ms_build - ms_eig
    ms_label = max(ms_label, 0.0)

    ov = overlap(sample.sigma, assignment.labels, config.params.pi)
    lambdas = tuple(p.value for p in pairs[:4])
    record = ExperimentRecord(
        seed=seed, n=sample.graph.n, r=config.params.r, ell=ell, gamma=0,
        overlap=ov.value, lambdas=lambdas,
        ms_build=ms_build, ms_eig=ms_eig, ms_label=ms_label,
    )
    doc = {
        "labels": [int(x) for x in assignment.labels],
        "overlap": ov.value,
        "perm": [int(x) for x in ov.best_permutation],
        "K": assignment.K_used,
        "source": assignment.source,
        "lambdas": [float(v) for v in lambdas],
    }
    out = args.out or "assignment.json"
    with open(out, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    if args.csv:
        _append_rows(args.csv, [record.to_csv_row()])
    print(f"overlap={ov.value:.4f} K={assignment.K_used:.4f} "
          f"lambda={[round(v, 3) for v in lambdas]}")
    return 0


def cmd_perturb(args) -> int:
    sample = _load_graph(args.graph)
    gammas = args.gamma or [1]
    gamma = int(gammas[0])
    seed = args.seed if args.seed is not None else sample.seed
    perturbed, p = plant_clique(sample.graph, gamma, derive_seed(seed, f"perturb:{gamma}"))
    doc = {
        "n": perturbed.n,
        "r": int(sample.sigma.max()) + 1,
        "seed": int(seed),
        "types": [int(t) for t in sample.sigma],
        "edges": [[int(u), int(v)] for u, v in perturbed.edge_array()],
    }
    out = args.out or "perturbed.json"
    with open(out, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")
    if args.perturbation_out:
        with open(args.perturbation_out, "w") as fh:
            json.dump(p.to_json(), fh)
            fh.write("\n")
    print(f"wrote {out}: gamma={gamma} added={len(p.added_edges)} "
          f"affected={len(p.affected)}")
    return 0


def _append_rows(path: str, rows: Sequence[str], fresh: bool = False) -> None:
    mode = "w" if fresh else "a"
    exists = False
    if not fresh:
        try:
            with open(path) as fh:
                exists = bool(fh.readline())
        except FileNotFoundError:
            exists = False
    with open(path, mode) as fh:
        if fresh or not exists:
            fh.write(CSV_VERSION + "\n" + CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")
            fh.flush()


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    ell = _resolve_ell(args, config)
    profile = derive_spectral_profile(config.params)
    gammas = tuple(args.gamma) if args.gamma else (config.gammas or (0,))
    out = args.out or "sweep.csv"
    _append_rows(out, [], fresh=True)
    failures = 0
    for seed in config.seeds:
        sample = sample_graph(config.params, seed)
        for gamma in gammas:
            try:
                record, _ = _sweep_row(config, profile, sample, ell, seed, gamma)
                _append_rows(out, [record.to_csv_row()])
            except Exception as exc:  # record and continue
                failures += 1
                with open(out, "a") as fh:
                    fh.write(f"# ERROR seed={seed} gamma={gamma}: {exc}\n")
    print(f"wrote {out}: {len(config.seeds)}x{len(gammas)} grid, "
          f"{failures} failure(s)")
    return 0 if failures == 0 else 1


def _sweep_row(config, profile, sample, ell, seed, gamma):
    graph = sample.graph
    qk = None
    rogue_r = None
    if gamma > 0:
        perturbed, p = plant_clique(graph, gamma, derive_seed(seed, f"perturb:{gamma}"))
        if p.affected:
            qk = qk_bound(graph, sorted(p.affected), ell)
        graph = perturbed

    t0 = time.perf_counter()
    if config.matrix_kind == "distance":
        mat = distance_matrix(graph, ell)
    else:
        mat = path_expansion_matrix(graph, ell)
    ms_build = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    pairs = top_eigenpairs(mat, graph.n, k=min(4, graph.n),
                           seed=derive_seed(seed, f"eig:{gamma}"))
    ms_eig = (time.perf_counter() - t0) * 1000.0

    t0 = time.perf_counter()
    assignment, _ = detect(graph, profile, ell, derive_seed(seed, f"detect:{gamma}"),
                           matrix_kind=config.matrix_kind)
    ms_label = (time.perf_counter() - t0) * 1000.0

    ov = overlap(sample.sigma, assignment.labels, config.params.pi)
    if config.rogue and gamma > 0:
        try:
            cert = build_rogue_certificate(sample.graph, profile, ell, gamma,
                                           seed=derive_seed(seed, f"rogue:{gamma}"))
            rogue_r = cert.rayleigh
        except Exception:
            rogue_r = None
    record = ExperimentRecord(
        seed=seed, n=sample.graph.n, r=config.params.r, ell=ell, gamma=gamma,
        overlap=ov.value, lambdas=tuple(p.value for p in pairs[:4]),
        qk=qk, rogue_rayleigh=rogue_r,
        ms_build=ms_build, ms_eig=ms_eig, ms_label=ms_label,
    )
    return record, mat


def cmd_gw(args) -> int:
    config = _load_config(args.config)
    profile = derive_spectral_profile(config.params)
    mu = float(profile.mu[1])
    phi = profile.phi[1]
    seed = args.seed if args.seed is not None else 0
    runs = args.runs

    c2, m2, var_sum, sq_sum = moment_closed_forms(profile, phi, mu)
    cfg = GwConfig(M=profile.M, root_law=np.full(profile.params.r, 1.0 / profile.params.r),
                   depth=8, runs=runs, seed=derive_seed(seed, "gw-mart"))
    mart = martingale_limit_check(cfg, phi, mu)
    cum = cumulant_relation_check(profile, phi, mu, order=2, runs=runs,
                                  seed=derive_seed(seed, "gw-cum"))
    tau_mu = mu**2 / profile.alpha
    records = [
        {
            "statistic": "variance_sum",
            "estimate": float(np.nansum(mart.per_type_var)),
            "stderr": mart.stderr,
            "closed_form": var_sum,
            "residual": float(np.nansum(mart.per_type_var)) - var_sum,
        },
        {
            "statistic": "mean",
            "estimate": mart.mean,
            "stderr": mart.stderr,
            "closed_form": mart.expected_mean,
            "residual": mart.mean - mart.expected_mean,
        },
        {
            "statistic": "sqmean_sum_closed_form",
            "estimate": sq_sum,
            "stderr": 0.0,
            "closed_form": tau_mu / (tau_mu - 1.0),
            "residual": sq_sum - tau_mu / (tau_mu - 1.0),
        },
        {
            "statistic": "cumulant_relation_order2",
            "estimate": cum.residual_inf,
            "stderr": float(cum.bootstrap_se.max()),
            "closed_form": 0.0,
            "residual": cum.residual_inf,
        },
    ]
    out = args.out or "gw-report.json"
    with open(out, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    for rec in records:
        print(f"{rec['statistic']}: estimate={rec['estimate']:.6f} "
              f"closed_form={rec['closed_form']:.6f} residual={rec['residual']:.2e}")
    return 0


# ----------------------------------------------------------------------------
# verify suites: small, self-contained invariant checks with stable IDs.

def _oracle_distance_matrix(graph: SparseGraph, ell: int) -> np.ndarray:
    from scipy.sparse.csgraph import shortest_path

    dist = shortest_path(graph.to_csr(), method="D", unweighted=True, directed=False)
    return (dist == ell).astype(np.int64)


def _oracle_path_counts(graph: SparseGraph, ell: int) -> np.ndarray:
    """Independent uncapped simple-path counter (tiny graphs only)."""
    n = graph.n
    counts = np.zeros((n, n), dtype=np.int64)

    def extend(path, last):
        if len(path) - 1 == ell:
            counts[path[0], last] += 1
            return
        for w in graph.adj[last]:
            if w not in path:
                path.append(w)
                extend(path, w)
                path.pop()

    for v in range(n):
        extend([v], v)
    return counts


def _verify_oracles(rng_seed: int = 7) -> list[tuple[str, bool, str]]:
    results = []
    params = SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                       pi=np.array([0.5, 0.5]), n=120)
    ok_all = True
    for seed in range(3):
        sample = sample_graph(params, seed + rng_seed)
        for ell in (1, 2, 3):
            mine = distance_matrix(sample.graph, ell).to_dense()
            oracle = _oracle_distance_matrix(sample.graph, ell)
            if not np.array_equal(mine, oracle):
                ok_all = False
    results.append(("oracles.distance_matrix_matches_apsp", ok_all,
                    "3 seeds x ell in {1,2,3} at n=120"))
    params_small = SbmParams(r=2, W=np.array([[6.0, 2.0], [2.0, 6.0]]),
                             pi=np.array([0.5, 0.5]), n=40)
    ok_all = True
    for seed in range(2):
        sample = sample_graph(params_small, seed + rng_seed)
        for ell in (2, 3):
            mine = path_expansion_matrix(sample.graph, ell, cap=10**6).to_dense()
            oracle = _oracle_path_counts(sample.graph, ell)
            if not np.array_equal(mine, oracle):
                ok_all = False
    results.append(("oracles.path_matrix_matches_enumeration", ok_all,
                    "2 seeds x ell in {2,3} at n=40"))
    return results


def _verify_spectra() -> list[tuple[str, bool, str]]:
    results = []
    params = SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                       pi=np.array([0.5, 0.5]), n=300)
    sample = sample_graph(params, 11)
    dl = distance_matrix(sample.graph, 3)
    pairs = top_eigenpairs(dl, sample.graph.n, k=4, seed=3)
    dense_vals = np.linalg.eigvalsh(dl.to_dense())
    top_by_abs = dense_vals[np.argsort(-np.abs(dense_vals))][:4]
    ok = all(abs(p.value - t) <= 1e-6 * max(1.0, abs(t))
             for p, t in zip(pairs, top_by_abs))
    results.append(("spectra.solver_matches_dense", ok,
                    f"top-4 of distance matrix at n=300, ell=3"))
    ok = all(p.residual <= 1e-8 * max(1.0, abs(p.value)) for p in pairs)
    results.append(("spectra.residuals_within_tol", ok, "residual <= tol*max(1,|lambda|)"))
    G = np.array([[np.dot(p.vector, q.vector) for q in pairs] for p in pairs])
    ok = bool(np.abs(G - np.eye(len(pairs))).max() <= 1e-8)
    results.append(("spectra.vectors_orthonormal", ok, "pairwise dot products"))
    return results


def _verify_bounds() -> list[tuple[str, bool, str]]:
    results = []
    # Path graph: unique paths, so the difference matrix vanishes.
    path_edges = [(i, i + 1) for i in range(9)]
    tree = SparseGraph.from_edges(10, path_edges)
    rep = delta_radius_check(tree, 3, alpha=2.0)
    results.append(("bounds.tree_delta_radius_zero", rep.rho <= 1e-12,
                    f"rho={rep.rho:.2e}"))
    square = SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    rep = delta_radius_check(square, 2, alpha=2.0)
    results.append(("bounds.square_delta_radius_one", abs(rep.rho - 1.0) <= 1e-9,
                    f"rho={rep.rho:.6f}"))
    exact, bound = qc_bound([1, 4, 16])
    results.append(("bounds.qc_exact_below_rowsum", exact <= bound + 1e-12,
                    f"exact={exact:.3f} bound={bound:.3f}"))
    params = SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                       pi=np.array([0.5, 0.5]), n=300)
    sample = sample_graph(params, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # saturation is expected on tangled samples
        rep = delta_radius_check(sample.graph, 3, alpha=3.0)
    ok = (not rep.tangle_free) or rep.rho <= rep.cycle_bound + 1e-9
    results.append(("bounds.delta_within_cycle_bound", ok,
                    f"rho={rep.rho:.3f} cycle_bound={rep.cycle_bound:.3f} "
                    f"tangle_free={rep.tangle_free}"))
    return results


def _verify_gw() -> list[tuple[str, bool, str]]:
    from .gw import finite_depth_second_moments

    results = []
    params = SbmParams(r=2, W=np.array([[5.0, 1.0], [1.0, 5.0]]),
                       pi=np.array([0.5, 0.5]), n=100)
    profile = derive_spectral_profile(params)
    mu = float(profile.mu[1])
    phi = profile.phi[1]
    c2, m2, var_sum, sq_sum = moment_closed_forms(profile, phi, mu)
    tau = profile.tau
    ok = (abs(var_sum - 1 / (tau - 1)) <= 1e-9 and
          abs(sq_sum - tau / (tau - 1)) <= 1e-9)
    results.append(("gw.closed_form_identities", ok,
                    f"var_sum={var_sum:.9f} sqmean_sum={sq_sum:.9f}"))
    # The simulation estimates the depth-8 truncation, which sits a known
    # (alpha/mu^2)^8 below the limit; compare against the exact recursion.
    depth = 8
    c2_t, _ = finite_depth_second_moments(profile, phi, mu, depth)
    cfg = GwConfig(M=profile.M, root_law=np.array([0.5, 0.5]), depth=depth,
                   runs=10**5, seed=404)
    mart = martingale_limit_check(cfg, phi, mu)
    var_mc = float(np.nansum(mart.per_type_var))
    ok = abs(var_mc - c2_t.sum()) <= 0.10 * c2_t.sum()
    results.append(("gw.variance_sum_monte_carlo", ok,
                    f"mc={var_mc:.4f} depth-{depth} exact={c2_t.sum():.4f} "
                    f"limit={var_sum:.4f}"))
    return results


SUITES = {
    "oracles": _verify_oracles,
    "spectra": _verify_spectra,
    "bounds": _verify_bounds,
    "gw": _verify_gw,
}


def cmd_verify(args) -> int:
    names = list(SUITES) if args.which == "all" else [args.which]
    failures = 0
    for name in names:
        for check_id, ok, detail in SUITES[name]():
            status = "PASS" if ok else "FAIL"
            print(f"{status} {check_id} — {detail}")
            failures += 0 if ok else 1
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distspec",
        description="Distance-matrix spectral detection experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, help="master 64-bit seed")
        p.add_argument("--ell", type=int, help="matrix depth override")
        p.add_argument("--kappa", type=float, help="depth exponent")
        p.add_argument("--matrix", choices=["distance", "path"],
                       help="which matrix powers the detection")
        p.add_argument("--gamma", type=int, nargs="*",
                       help="perturbation strengths")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("generate", help="sample a graph and write JSON")
    add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="run detection on a graph file")
    p.add_argument("graph", help="graph JSON produced by generate")
    add_common(p)
    p.add_argument("--csv", help="append an experiment record to this CSV")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("perturb", help="plant a clique within a vertex budget")
    p.add_argument("graph", help="graph JSON")
    add_common(p)
    p.add_argument("--perturbation-out", help="write the edit list JSON here")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("sweep", help="seeds x gamma grid to CSV")
    add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("which", choices=["gw", "spectra", "bounds", "oracles", "all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gw", help="branching-process moment checks")
    add_common(p)
    p.add_argument("--runs", type=int, default=10**5)
    p.set_defaults(func=cmd_gw)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
