"""Scenario families, their samplers and closed-form mutual information.

Every family exposes ``dim``, ``sample(n, rng)`` and ``true_mi()``; the last
returns ``None`` when no closed form is known.  ``parse_scenario`` and
``format_scenario`` convert between families and the colon-separated token
format used on the command line, e.g. ``normal:d=4:cov=sigma`` or
``student:df=3:d=4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .special import digamma, log_beta, log_gamma


# ---------------------------------------------------------------------------
# Covariance matrices used by the simulation scenarios
# ---------------------------------------------------------------------------


def sigma_matrix(d: int) -> np.ndarray:
    """0.5 off the diagonal, diagonal (1, 2, 1, ..., 1)."""
    cov = np.full((d, d), 0.5)
    np.fill_diagonal(cov, 1.0)
    if d >= 2:
        cov[1, 1] = 2.0
    return cov


def a_matrix(d: int) -> np.ndarray:
    """Identity with 0.5 linking only the last two coordinates."""
    cov = np.eye(d)
    if d >= 2:
        cov[d - 1, d - 2] = cov[d - 2, d - 1] = 0.5
    return cov


def b_matrix(d: int) -> np.ndarray:
    """Unit diagonal, 0.9 everywhere else."""
    cov = np.full((d, d), 0.9)
    np.fill_diagonal(cov, 1.0)
    return cov


NAMED_COVARIANCES = {
    "identity": np.eye,
    "sigma": sigma_matrix,
    "a": a_matrix,
    "b": b_matrix,
}


def cholesky_factor(cov) -> np.ndarray:
    """Validate a covariance matrix and return its lower Cholesky factor.

    Raises ParameterError if the matrix is not square, not symmetric to
    1e-12, has a non-positive diagonal or is not positive definite.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] < 1:
        raise ParameterError(f"covariance must be a square matrix, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ParameterError("covariance has non-finite entries")
    if np.max(np.abs(cov - cov.T)) > 1e-12:
        raise ParameterError("covariance is not symmetric")
    if np.any(np.diag(cov) <= 0):
        raise ParameterError("covariance diagonal must be strictly positive")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("covariance is not positive definite") from exc


# ---------------------------------------------------------------------------
# Closed-form mutual information
# ---------------------------------------------------------------------------


def gaussian_true_mi(cov) -> float:
    """Mutual information (nats) among the coordinates of N(mu, cov).

    Equals -0.5 * log(det(cov) / prod(diag(cov))), i.e. minus half the
    log-determinant of the correlation matrix, which is exactly 0 for a
    diagonal covariance.
    """
    cholesky_factor(cov)
    cov = np.asarray(cov, dtype=float)
    scale = 1.0 / np.sqrt(np.diag(cov))
    corr = cov * np.outer(scale, scale)
    np.fill_diagonal(corr, 1.0)
    log_det = 2.0 * np.sum(np.log(np.diag(np.linalg.cholesky(corr))))
    return max(0.0, float(-0.5 * log_det))


def student_true_mi(df: float, d: int) -> float:
    """Mutual information (nats) among the coordinates of t_df(0, I_d).

    The sum of the d univariate t_df entropies minus the entropy of the
    d-variate t_df distribution.
    """
    if not df > 0:
        raise ParameterError(f"degrees of freedom must be positive, got {df}")
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    half = 0.5 * df
    marginal = (0.5 * (df + 1.0)) * (digamma(0.5 * (df + 1.0)) - digamma(half)) + (
        0.5 * math.log(df) + log_beta(half, 0.5)
    )
    joint_half = 0.5 * (df + d)
    log_norm = log_gamma(joint_half) - log_gamma(half) - 0.5 * d * math.log(df * math.pi)
    joint = -log_norm + joint_half * (digamma(joint_half) - digamma(half))
    return max(d * marginal - joint, 0.0)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _check_dim(d: int) -> int:
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension must be a positive integer, got {d}")
    return int(d)


def _check_count(n: int) -> int:
    if int(n) != n or n < 1:
        raise ParameterError(f"sample size must be a positive integer, got {n}")
    return int(n)


@dataclass(frozen=True, eq=False)
class MVNormal:
    mean: np.ndarray
    cov: np.ndarray
    cov_name: str | None = None
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        object.__setattr__(self, "_chol", cholesky_factor(cov))
        if mean.shape[0] != cov.shape[0]:
            raise ParameterError(
                f"mean has length {mean.shape[0]} but covariance is {cov.shape[0]}x{cov.shape[0]}"
            )
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @classmethod
    def standard(cls, d: int) -> "MVNormal":
        d = _check_dim(d)
        return cls(np.zeros(d), np.eye(d), "identity")

    @property
    def dim(self) -> int:
        return self.cov.shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((_check_count(n), self.dim))
        return self.mean + z @ self._chol.T

    def true_mi(self) -> float:
        return gaussian_true_mi(self.cov)


@dataclass(frozen=True)
class MVStudent:
    """Multivariate t with location 0 and identity scale matrix."""

    df: float
    d: int

    def __post_init__(self):
        if not self.df > 0:
            raise ParameterError(f"degrees of freedom must be positive, got {self.df}")
        _check_dim(self.d)

    @property
    def dim(self) -> int:
        return self.d

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        n = _check_count(n)
        z = rng.standard_normal((n, self.d))
        w = rng.chisquare(self.df, size=(n, 1))
        return z / np.sqrt(w / self.df)

    def true_mi(self) -> float:
        return student_true_mi(self.df, self.d)


@dataclass(frozen=True)
class MaxwellProduct:
    """d independent Maxwell-Boltzmann coordinates with scale c."""

    scale: float
    d: int

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"Maxwell scale must be positive, got {self.scale}")
        _check_dim(self.d)

    @property
    def dim(self) -> int:
        return self.d

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # norm of three iid N(0, c^2) variates
        return self.scale * np.sqrt(rng.chisquare(3.0, size=(_check_count(n), self.d)))

    def true_mi(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SphericalLogNormal:
    """Uniform direction on the unit sphere times a LogNormal(0, logsd^2) radius."""

    d: int
    logsd: float = 0.5

    def __post_init__(self):
        _check_dim(self.d)
        if not self.logsd > 0:
            raise ParameterError(f"log-radius sd must be positive, got {self.logsd}")

    @property
    def dim(self) -> int:
        return self.d

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        n = _check_count(n)
        z = rng.standard_normal((n, self.d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        # a zero Gaussian vector has probability zero; redraw defensively
        while np.any(norms == 0):
            bad = norms[:, 0] == 0
            z[bad] = rng.standard_normal((int(bad.sum()), self.d))
            norms = np.linalg.norm(z, axis=1, keepdims=True)
        radius = rng.lognormal(0.0, self.logsd, size=(n, 1))
        return z / norms * radius

    def true_mi(self) -> float | None:
        return None


@dataclass(frozen=True)
class ProductOfMarginals:
    """Independent coordinates, one block per part."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ParameterError("product needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.hstack([p.sample(n, rng) for p in self.parts])

    def true_mi(self) -> float | None:
        inner = [p.true_mi() for p in self.parts]
        if any(v is None for v in inner):
            return None
        return float(sum(inner))


FAMILIES = (MVNormal, MVStudent, MaxwellProduct, SphericalLogNormal, ProductOfMarginals)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """A named synthetic distribution plus its analytic mutual information."""

    family: object
    label: str = ""

    def __post_init__(self):
        if not isinstance(self.family, FAMILIES):
            raise ParameterError(f"unsupported family {type(self.family).__name__}")
        if not self.label:
            object.__setattr__(self, "label", format_scenario(self.family))

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def true_mi(self) -> float | None:
        return self.family.true_mi()

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.family.sample(n, rng)


def sample_scenario(spec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n x d dataset from a ScenarioSpec or a bare family."""
    family = spec.family if isinstance(spec, ScenarioSpec) else spec
    return family.sample(n, rng)


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

VALID_FAMILIES = ("normal", "student", "maxwell", "spherical", "product")


def _parse_fields(tokens: list[str], allowed: set[str], family: str) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParameterError(f"expected key=value in {family} scenario, got {tok!r}")
        key, value = tok.split("=", 1)
        key = key.strip().lower()
        if key not in allowed:
            raise ParameterError(
                f"unknown key {key!r} for {family}; allowed: {', '.join(sorted(allowed))}"
            )
        out[key] = value.strip()
    return out


def _number(fields, key, default=None, cast=float):
    if key not in fields:
        if default is None:
            raise ParameterError(f"missing required key {key!r}")
        return default
    try:
        return cast(fields[key])
    except ValueError as exc:
        raise ParameterError(f"bad value for {key!r}: {fields[key]!r}") from exc


def parse_scenario(text: str):
    """Parse a scenario token into a family object.

    Grammar (keys are case-insensitive)::

        normal:d=4[:cov=identity|sigma|a|b][:mean=c]
        student:df=3:d=4
        maxwell:c=10:d=2
        spherical:d=3[:logsd=0.5]
        product:<part>+<part>+...     (each part is itself a scenario token)
    """
    text = text.strip()
    family, _, rest = text.partition(":")
    family = family.lower()
    if family == "product":
        if not rest:
            raise ParameterError("product scenario needs at least one part")
        return ProductOfMarginals(tuple(parse_scenario(p) for p in rest.split("+")))
    tokens = [t for t in rest.split(":") if t] if rest else []
    if family == "normal":
        f = _parse_fields(tokens, {"d", "cov", "mean"}, family)
        d = _check_dim(_number(f, "d", cast=int))
        cov_name = f.get("cov", "identity").lower()
        if cov_name not in NAMED_COVARIANCES:
            raise ParameterError(
                f"unknown covariance {cov_name!r}; valid: {', '.join(NAMED_COVARIANCES)}"
            )
        mean = _number(f, "mean", 0.0)
        return MVNormal(np.full(d, mean), NAMED_COVARIANCES[cov_name](d), cov_name)
    if family == "student":
        f = _parse_fields(tokens, {"df", "d"}, family)
        return MVStudent(_number(f, "df"), _check_dim(_number(f, "d", cast=int)))
    if family == "maxwell":
        f = _parse_fields(tokens, {"c", "d"}, family)
        return MaxwellProduct(_number(f, "c"), _check_dim(_number(f, "d", cast=int)))
    if family == "spherical":
        f = _parse_fields(tokens, {"d", "logsd"}, family)
        return SphericalLogNormal(_check_dim(_number(f, "d", cast=int)), _number(f, "logsd", 0.5))
    raise ParameterError(f"unknown scenario family {family!r}; valid families: {', '.join(VALID_FAMILIES)}")


def _fmt(x: float) -> str:
    return repr(float(x)).removesuffix(".0") if float(x).is_integer() else repr(float(x))


def format_scenario(family) -> str:
    """Inverse of parse_scenario for families that came from it."""
    if isinstance(family, ScenarioSpec):
        family = family.family
    if isinstance(family, MVNormal):
        name = family.cov_name
        if name is None or not np.array_equal(family.cov, NAMED_COVARIANCES[name](family.dim)):
            name = "custom"
        text = f"normal:d={family.dim}:cov={name}"
        if np.any(family.mean != 0):
            if np.all(family.mean == family.mean[0]):
                text += f":mean={_fmt(family.mean[0])}"
            else:
                text += ":mean=custom"
        return text
    if isinstance(family, MVStudent):
        return f"student:df={_fmt(family.df)}:d={family.d}"
    if isinstance(family, MaxwellProduct):
        return f"maxwell:c={_fmt(family.scale)}:d={family.d}"
    if isinstance(family, SphericalLogNormal):
        return f"spherical:d={family.d}:logsd={_fmt(family.logsd)}"
    if isinstance(family, ProductOfMarginals):
        return "product:" + "+".join(format_scenario(p) for p in family.parts)
    raise ParameterError(f"cannot format {type(family).__name__}")


def make_scenario(text: str) -> ScenarioSpec:
    return ScenarioSpec(parse_scenario(text))
