"""Bayesian nonparametric mutual information estimation via Dirichlet-process posteriors."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    MaxwellProduct,
    MVNormal,
    MVStudent,
    ProductOfMarginals,
    ScenarioSpec,
    SphericalLogNormal,
    a_matrix,
    b_matrix,
    gaussian_true_mi,
    make_scenario,
    parse_scenario,
    sample_scenario,
    sigma_matrix,
    student_true_mi,
)
from .dp import DPApproximation, JitterPolicy, PriorSpec, dirichlet_weights, sample_dp_posterior  # noqa: E402
from .entropy import EntropyEstimate, knn_entropy, weighted_posterior_entropy  # noqa: E402
from .errors import BnpmiError, DataError, DegenerateInputError, ParameterError  # noqa: E402
from .estimator import (  # noqa: E402
    EstimatorConfig,
    MIPosteriorSample,
    estimate_mi,
    knn_mi_plain,
    midhinge,
    mi_posterior_draw,
    positive_part,
)
from .knn import KnnResult, knn_distances, knn_distances_1d  # noqa: E402
