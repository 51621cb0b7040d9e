"""Bayesian nonparametric mutual information estimation.

Each posterior draw samples P_N from the Dirichlet-process posterior, then
evaluates

    MI_pos = -H(P_N) + sum_i H(P_N projected on coordinate i)

with the weighted k-NN entropy.  ``estimate_mi`` repeats this ``ell`` times,
truncates at zero and reports the midhinge (Q1 + Q3) / 2 of the truncated
draws.  ``knn_mi_plain`` is the unweighted frequentist counterpart.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import format_scenario
from .dp import JitterPolicy, PriorSpec, sample_dp_posterior
from .entropy import knn_entropy, weighted_posterior_entropy
from .errors import BnpmiError, DegenerateInputError, ParameterError

QUARTILE_METHODS = (
    "linear",
    "lower",
    "higher",
    "nearest",
    "midpoint",
    "hazen",
    "weibull",
    "median_unbiased",
    "normal_unbiased",
)
MARGINAL_MODES = ("projected", "independent")

# share of zero k-NN distances in one draw above which the draw is flagged
ZERO_FLAG_FRACTION = 0.10


@dataclass(frozen=True)
class EstimatorConfig:
    a: float = 0.05
    k: int = 3
    N: int = 1000
    ell: int = 1000
    jitter_scale: float = 0.01
    jitter_per_atom: bool = False
    epsilon_floor: float = 1e-10
    quartile_method: str = "linear"
    marginals: str = "projected"
    seed: int = 0
    base: object = field(default=None, compare=False)

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"a must be positive, got {self.a}")
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if int(self.N) != self.N or self.N < 2:
            raise ParameterError(f"N must be an integer >= 2, got {self.N}")
        if self.k > self.N - 1:
            raise ParameterError(f"k={self.k} exceeds N - 1 = {self.N - 1}")
        if int(self.ell) != self.ell or self.ell < 4:
            raise ParameterError(f"ell must be an integer >= 4 (quartiles), got {self.ell}")
        if not self.jitter_scale >= 0:
            raise ParameterError(f"jitter_scale must be non-negative, got {self.jitter_scale}")
        if not self.epsilon_floor > 0:
            raise ParameterError(f"epsilon_floor must be positive, got {self.epsilon_floor}")
        if self.quartile_method not in QUARTILE_METHODS:
            raise ParameterError(
                f"unknown quartile method {self.quartile_method!r}; "
                f"valid: {', '.join(QUARTILE_METHODS)}"
            )
        if self.marginals not in MARGINAL_MODES:
            raise ParameterError(f"marginals must be one of {MARGINAL_MODES}, got {self.marginals!r}")
        if int(self.seed) != self.seed:
            raise ParameterError(f"seed must be an integer, got {self.seed}")

    @property
    def prior(self) -> PriorSpec:
        return PriorSpec(self.a, self.base)

    @property
    def jitter(self) -> JitterPolicy:
        return JitterPolicy(self.jitter_scale, self.jitter_per_atom)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["base"] = "normal:standard" if self.base is None else format_scenario(self.base)
        return out


def positive_part(x):
    """max(x, 0), elementwise for arrays."""
    if np.ndim(x) == 0:
        return max(float(x), 0.0)
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def midhinge(values, method: str = "linear") -> float:
    """(Q1 + Q3) / 2 of ``values``.

    With the default ``"linear"`` method quantile p sits at 0-based rank
    p * (m - 1), interpolating linearly between order statistics.
    """
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 0:
        raise ParameterError("midhinge of an empty vector")
    if method not in QUARTILE_METHODS:
        raise ParameterError(f"unknown quartile method {method!r}")
    q1, q3 = np.quantile(np.sort(v), [0.25, 0.75], method=method)
    return float(0.5 * (q1 + q3))


def check_data(data, k: int) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"data must be an n x d matrix, got shape {x.shape}")
    n, d = x.shape
    if d < 2:
        raise ParameterError(f"mutual information needs d >= 2 columns, got {d}")
    if n < k + 1:
        raise ParameterError(f"need n >= k + 1 = {k + 1} observations, got {n}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("data contain non-finite values")
    constant = np.flatnonzero(np.all(x == x[0], axis=0))
    if constant.size:
        raise DegenerateInputError(f"column {int(constant[0])} is constant")
    return x


@dataclass(frozen=True)
class DrawDiagnostics:
    zero_distances: int
    support_points: int
    flagged: bool


def _posterior_draw(x: np.ndarray, config: EstimatorConfig, rng: np.random.Generator):
    d = x.shape[1]
    prior, jitter = config.prior, config.jitter
    joint_rng, *marginal_rngs = rng.spawn(d + 1)
    dp = sample_dp_posterior(x, prior, config.N, jitter, joint_rng)

    def entropy(measure):
        return weighted_posterior_entropy(measure, config.k, epsilon_floor=config.epsilon_floor)

    joint = entropy(dp)
    if config.marginals == "projected":
        marginals = [entropy(dp.project(i)) for i in range(d)]
    else:
        marginals = [
            entropy(sample_dp_posterior(x[:, [i]], PriorSpec(config.a), config.N, jitter, r))
            for i, r in enumerate(marginal_rngs)
        ]
    value = -joint.value + sum(h.value for h in marginals)
    zeros = joint.zero_distance_count + sum(h.zero_distance_count for h in marginals)
    diag = DrawDiagnostics(
        zero_distances=zeros,
        support_points=joint.m,
        flagged=joint.zero_distance_count > ZERO_FLAG_FRACTION * joint.m,
    )
    return value, diag


def mi_posterior_draw(data, config: EstimatorConfig, rng: np.random.Generator) -> float:
    """One posterior draw of the mutual information (not truncated)."""
    x = check_data(data, config.k)
    return _posterior_draw(x, config, rng)[0]


def draw_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators keyed by (seed, index)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True, eq=False)
class MIPosteriorSample:
    """The ``ell`` posterior draws for one dataset.

    ``raw`` holds the untruncated draws and ``draws`` their positive parts;
    ``estimate`` is the midhinge of ``draws``.
    """

    raw: np.ndarray
    config: EstimatorConfig
    diagnostics: tuple = field(repr=False, default=())

    @property
    def draws(self) -> np.ndarray:
        return positive_part(self.raw)

    @property
    def estimate(self) -> float:
        return midhinge(self.draws, self.config.quartile_method)

    @property
    def mean(self) -> float:
        return float(np.mean(self.draws))

    @property
    def median(self) -> float:
        return float(np.median(self.draws))

    def quantiles(self, probs=(0.025, 0.25, 0.5, 0.75, 0.975)) -> dict[float, float]:
        q = np.quantile(self.draws, probs, method=self.config.quartile_method)
        return {float(p): float(v) for p, v in zip(probs, q)}

    def summaries(self) -> dict[str, float]:
        """Posterior mean and midhinge of the raw and truncated draws."""
        m = self.config.quartile_method
        return {
            "mean_pos": float(np.mean(self.raw)),
            "midhinge_pos": midhinge(self.raw, m),
            "mean_pos_plus": self.mean,
            "midhinge_pos_plus": self.estimate,
        }

    @property
    def zero_distance_counts(self) -> np.ndarray:
        return np.array([dg.zero_distances for dg in self.diagnostics], dtype=int)

    @property
    def flagged_draws(self) -> int:
        return sum(dg.flagged for dg in self.diagnostics)


def estimate_mi(data, config: EstimatorConfig | None = None) -> MIPosteriorSample:
    """Run the full estimator on an n x d dataset.

    Draw i uses its own generator derived from (config.seed, i), so the
    result depends only on the data and the config.  A failing draw aborts
    the whole estimate.
    """
    config = config or EstimatorConfig()
    x = check_data(data, config.k)
    raw = np.empty(config.ell)
    diags = []
    for i, rng in enumerate(draw_streams(config.seed, config.ell)):
        try:
            raw[i], dg = _posterior_draw(x, config, rng)
        except BnpmiError as exc:
            raise type(exc)(f"posterior draw {i} failed: {exc}") from exc
        if not np.isfinite(raw[i]):
            raise DegenerateInputError(f"posterior draw {i} is not finite ({raw[i]})")
        diags.append(dg)
    return MIPosteriorSample(raw=raw, config=config, diagnostics=tuple(diags))


def knn_mi_plain(data, k: int = 3) -> float:
    """Sum of marginal k-NN entropies minus the joint k-NN entropy."""
    x = check_data(data, k)
    joint = knn_entropy(x, k).value
    return sum(knn_entropy(x[:, i], k).value for i in range(x.shape[1])) - joint
