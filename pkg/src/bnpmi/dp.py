"""Finite approximation of the Dirichlet-process posterior DP(a + n, G_{a,n}).

Atoms are i.i.d. from the posterior base measure, the mixture
``a/(a+n) G + n/(a+n) F_n``; weights are normalised Gamma((a+n)/N) variates,
i.e. a symmetric Dirichlet((a+n)/N, ..., (a+n)/N) vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import MVNormal
from .errors import ParameterError


@dataclass(frozen=True)
class PriorSpec:
    """Concentration ``a`` and base measure ``G`` (standard normal when None)."""

    a: float = 0.05
    base: object = None

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"concentration a must be positive, got {self.a}")

    def base_for(self, d: int):
        if self.base is None:
            return MVNormal.standard(d)
        if self.base.dim != d:
            raise ParameterError(f"base measure has dimension {self.base.dim}, data has {d}")
        return self.base


@dataclass(frozen=True)
class JitterPolicy:
    """Gaussian perturbation of the data-sourced atoms.

    Noise has per-coordinate standard deviation ``scale * sd_j`` with sd_j
    the sample standard deviation of data column j.  By default one noise
    vector is drawn per data row and shared by every atom resampled from that
    row, so copies of a row stay coincident (and are merged by the entropy
    estimator) while ties between distinct rows are broken.  With
    ``per_atom=True`` every resampled atom gets its own noise.
    Prior-sourced atoms are never perturbed.
    """

    scale: float = 0.01
    per_atom: bool = False

    def __post_init__(self):
        if not self.scale >= 0:
            raise ParameterError(f"jitter scale must be non-negative, got {self.scale}")


NO_JITTER = JitterPolicy(scale=0.0)


@dataclass(frozen=True, eq=False)
class DPApproximation:
    """P_N = sum_i weights[i] * delta(atoms[i]).

    ``source_flags[i]`` is True when atom i came from the prior base measure
    and False when it is a resampled data row.
    """

    atoms: np.ndarray
    weights: np.ndarray
    source_flags: np.ndarray = field(repr=False)

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def project(self, coord: int) -> "DPApproximation":
        """Image of P_N under x -> x[coord]; the exact marginal random measure."""
        return DPApproximation(self.atoms[:, [coord]], self.weights, self.source_flags)


def _check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise ParameterError(f"data must be an n x d matrix, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ParameterError(f"need at least 2 observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("data contain non-finite values")
    return x


def _check_n_atoms(N: int) -> int:
    if int(N) != N or N < 2:
        raise ParameterError(f"number of atoms N must be an integer >= 2, got {N}")
    return int(N)


def posterior_base_sample(
    data,
    prior: PriorSpec,
    N: int,
    jitter: JitterPolicy,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """N i.i.d. draws from G_{a,n}; returns (atoms, source_flags)."""
    x = _check_data(data)
    N = _check_n_atoms(N)
    n, d = x.shape
    base = prior.base_for(d)
    from_prior = rng.random(N) < prior.a / (prior.a + n)
    n_prior = int(from_prior.sum())
    rows = rng.integers(0, n, size=N - n_prior)

    atoms = np.empty((N, d))
    if jitter.scale > 0:
        sd = jitter.scale * np.std(x, axis=0, ddof=1)
        if jitter.per_atom:
            atoms[~from_prior] = x[rows] + rng.standard_normal((rows.size, d)) * sd
        else:
            atoms[~from_prior] = (x + rng.standard_normal((n, d)) * sd)[rows]
    else:
        atoms[~from_prior] = x[rows]
    if n_prior:
        atoms[from_prior] = base.sample(n_prior, rng)
    return atoms, from_prior


def dirichlet_weights(N: int, total_mass: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric Dirichlet(total_mass/N, ...) weights via normalised Gammas.

    For shape s < 1 a Gamma(s) variate is drawn as Gamma(s + 1) * U**(1/s)
    and handled in log space, so tiny shapes never underflow to an all-zero
    vector.
    """
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")
    if not total_mass > 0:
        raise ParameterError(f"total mass must be positive, got {total_mass}")
    N = int(N)
    shape = total_mass / N
    if shape >= 1.0:
        log_g = np.log(rng.standard_gamma(shape, size=N))
    else:
        # 1 - U lies in (0, 1], keeping log finite
        log_g = np.log(rng.standard_gamma(shape + 1.0, size=N)) + np.log1p(-rng.random(N)) / shape
    w = np.exp(log_g - log_g.max())
    return w / w.sum()


def sample_dp_posterior(
    data,
    prior: PriorSpec,
    N: int,
    jitter: JitterPolicy,
    rng: np.random.Generator,
) -> DPApproximation:
    """One draw P_N from the DP posterior given ``data``.

    Atoms and weights come from independent child streams of ``rng``.
    """
    x = _check_data(data)
    atom_rng, weight_rng = rng.spawn(2)
    atoms, flags = posterior_base_sample(x, prior, N, jitter, atom_rng)
    weights = dirichlet_weights(N, prior.a + x.shape[0], weight_rng)
    return DPApproximation(atoms, weights, flags)
