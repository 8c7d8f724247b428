"""Distance-profile matching of point clouds.

Matches points across two clouds by comparing their distance profiles
(the distribution of distances to all cloud members), which are invariant
under rigid motions.  Also provides assignment-based matching, exact
discrete optimal transport, and a transport lower bound on the
Gromov-Wasserstein distance.
"""

from .assignment import (
    Permutation,
    assign_ot_baseline,
    assign_profiles,
    baseline_cost_matrix,
    profile_cost_matrix,
    solve_lap,
)
from .errors import DimensionMismatchError, InputFormatError, ProfileMatchError
from .geometry import (
    DistanceMatrix,
    DistanceProfile,
    PointCloud,
    all_profiles,
    distance_profile,
    pairwise_distances,
)
from .matching import (
    DiscrepancyMatrix,
    MatchResult,
    discrepancy_matrix,
    match,
    match_clouds,
)
from .models import (
    LabeledSample,
    MixtureSpec,
    PairedMixtures,
    apply_rigid,
    derived_rng,
    derived_seed,
    kmeans,
    make_paired_mixtures,
    make_two_coordinate_rotation,
    noisy_correspondence_instance,
    random_rotation,
    sample_mixture,
)
from .theory import (
    METHODS,
    ExperimentRecord,
    SeparationReport,
    center_profile_distance,
    inlier_threshold_interval,
    lemma1_bound_check,
    matching_accuracy,
    perfect_matching,
    phi,
    proposition1_check,
    run_mixture_experiment,
    run_noise_stability_experiment,
    separation_report,
    theorem2_noise_bound,
)
from .transport import Coupling, gw_objective, product_coupling, solve_discrete_ot, tlb
from .wasserstein import wasserstein_p, wasserstein_p_pow

__version__ = "0.1.0"

__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "DistanceProfile",
    "pairwise_distances",
    "distance_profile",
    "all_profiles",
    "wasserstein_p",
    "wasserstein_p_pow",
    "DiscrepancyMatrix",
    "MatchResult",
    "discrepancy_matrix",
    "match",
    "match_clouds",
    "Permutation",
    "solve_lap",
    "assign_profiles",
    "assign_ot_baseline",
    "profile_cost_matrix",
    "baseline_cost_matrix",
    "Coupling",
    "solve_discrete_ot",
    "product_coupling",
    "tlb",
    "gw_objective",
    "MixtureSpec",
    "PairedMixtures",
    "LabeledSample",
    "sample_mixture",
    "make_paired_mixtures",
    "random_rotation",
    "make_two_coordinate_rotation",
    "apply_rigid",
    "noisy_correspondence_instance",
    "kmeans",
    "derived_rng",
    "derived_seed",
    "SeparationReport",
    "ExperimentRecord",
    "METHODS",
    "center_profile_distance",
    "separation_report",
    "lemma1_bound_check",
    "phi",
    "theorem2_noise_bound",
    "matching_accuracy",
    "perfect_matching",
    "inlier_threshold_interval",
    "run_mixture_experiment",
    "run_noise_stability_experiment",
    "proposition1_check",
    "ProfileMatchError",
    "InputFormatError",
    "DimensionMismatchError",
]
