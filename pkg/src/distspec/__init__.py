"""Distance-matrix spectral community detection for sparse random graphs.

The pipeline: sample a block-structured sparse graph, build the matrix
that marks vertex pairs at graph distance exactly ell, read the hidden
two-way split off the eigenvector of the second-largest eigenvalue, and
score the recovered labels against the hidden ones.  Companion modules
quantify how far adversarial edge edits can push the spectrum and verify
the branching-process identities behind the method's constants.
"""

from .model import (
    EllChoice,
    SbmParams,
    SpectralProfile,
    TypedGraphSample,
    check_degree_regularity,
    choose_ell,
    circulant_connectivity,
    derive_spectral_profile,
    sample_from_json,
    sample_graph,
    sample_to_json,
)
from .graph import (
    CapSaturated,
    ShellProfile,
    SparseGraph,
    SparseSymMatrix,
    bfs_shells,
    delta_matrix,
    difference_matrix,
    distance_matrix,
    dump_matrix,
    fundamental_cycles,
    load_matrix,
    path_expansion_matrix,
    set_shell,
    set_shell_sizes,
    shell_growth_report,
    shell_sizes_all,
    tangle_free_check,
)
from .spectral import (
    DeltaRadiusReport,
    EigenPair,
    SeparationReport,
    davis_kahan_bound,
    delta_radius_check,
    qc_bound,
    separation_report,
    top_eigenpairs,
)
from .reconstruct import (
    LabelAssignment,
    OverlapScore,
    detect,
    explicit_K,
    label_two_way,
    normalize_for_algorithm,
    overlap,
)
from .adversary import (
    Perturbation,
    QkReport,
    RogueCertificate,
    apply_perturbation,
    build_rogue_certificate,
    plant_clique,
    qk_bound,
    qk_bound_report,
    robustness_budget,
)
from .gw import (
    CumulantCheck,
    GwConfig,
    MartingaleSample,
    PopulationSample,
    cumulant_relation_check,
    finite_depth_second_moments,
    martingale_limit_check,
    martingale_values,
    moment_closed_forms,
    simulate_population,
)
from .diagnostics import LocalMomentReport, local_moment_report, shell_type_counts
from .util import derive_seed, make_rng

__version__ = "0.1.0"
