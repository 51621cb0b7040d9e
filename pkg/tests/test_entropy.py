import math
from types import SimpleNamespace

import numpy as np
import pytest

from bnpmi.entropy import knn_entropy, merge_coincident, weighted_posterior_entropy
from bnpmi.errors import DegenerateInputError, ParameterError
from bnpmi.special import EULER_GAMMA, harmonic_number


def measure(atoms, weights):
    return SimpleNamespace(atoms=np.asarray(atoms, float), weights=np.asarray(weights, float))


def weighted_entropy_transcription(atoms, weights, k):
    """Direct, loop-based transcription of the weighted posterior entropy."""
    atoms = np.atleast_2d(atoms)
    N, d = atoms.shape
    total = 0.0
    for i in range(N):
        dists = sorted(float(np.linalg.norm(atoms[i] - atoms[j])) for j in range(N) if j != i)
        r = dists[k - 1]
        vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        total += weights[i] * math.log((N - 1) * vol * r**d / k)
    return total - sum(1 / j for j in range(1, k)) + 0.5772156649015329 + math.log(k)


def multiplicity_transcription(atoms, weights, k):
    """Loop-based count of atoms inside each distinct point's k-NN ball."""
    groups = {}
    for a, w in zip(map(tuple, np.atleast_2d(atoms)), weights):
        mass, count = groups.get(a, (0.0, 0))
        groups[a] = (mass + w, count + 1)
    pts = list(groups)
    N = len(atoms)
    d = len(pts[0])
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    total = 0.0
    for p in pts:
        others = sorted((math.dist(p, q), groups[q][1]) for q in pts if q != p)[:k]
        r = others[-1][0]
        inside = sum(c for _, c in others)
        mass, count = groups[p]
        total += mass * math.log((N - count) * vol * r**d / inside)
    return total - sum(1 / j for j in range(1, k)) + 0.5772156649015329 + math.log(k)


class TestKnnEntropy:
    def test_hand_value(self):
        # R = (1, 1, 2), d = 1, n = 3, k = 1
        expected = (math.log(1) + math.log(1) + math.log(2)) / 3 + math.log(2) + EULER_GAMMA + math.log(2)
        assert knn_entropy(np.array([0.0, 1.0, 3.0]), 1).value == pytest.approx(expected, abs=1e-12)

    def test_scaling_adds_log_s(self):
        x = np.array([[0.0], [1.0], [3.0]])
        assert knn_entropy(2 * x, 1).value - knn_entropy(x, 1).value == pytest.approx(math.log(2), abs=1e-12)

    def test_gaussian_1d(self):
        vals = [knn_entropy(np.random.default_rng(s).normal(size=1000), 3).value for s in range(50)]
        assert np.mean(vals) == pytest.approx(0.5 * math.log(2 * math.pi * math.e), abs=0.10)

    def test_uniform(self):
        vals = [knn_entropy(np.random.default_rng(s).uniform(size=1000), 3).value for s in range(50)]
        assert np.mean(vals) == pytest.approx(0.0, abs=0.10)

    def test_gaussian_2d(self):
        vals = [knn_entropy(np.random.default_rng(s).normal(size=(2000, 2)), 3).value for s in range(20)]
        assert np.mean(vals) == pytest.approx(math.log(2 * math.pi * math.e), abs=0.1)

    def test_fields(self):
        est = knn_entropy(np.random.default_rng(0).normal(size=(40, 3)), 2)
        assert (est.k, est.m, est.zero_distance_count) == (2, 40, 0)

    def test_duplicates_are_floored_and_counted(self):
        x = np.array([[0.0], [0.0], [1.0], [2.0]])
        est = knn_entropy(x, 1, epsilon_floor=1e-10)
        assert est.zero_distance_count == 2
        assert np.isfinite(est.value)

    def test_all_identical(self):
        with pytest.raises(DegenerateInputError):
            knn_entropy(np.ones((10, 2)), 3)

    def test_too_few_points(self):
        with pytest.raises(ParameterError):
            knn_entropy(np.zeros((3, 1)) + np.arange(3)[:, None], 3)


class TestWeightedEntropy:
    @pytest.mark.parametrize("N, d, k", [(10, 1, 1), (50, 2, 3), (200, 3, 5), (120, 4, 3), (1000, 2, 3)])
    def test_uniform_weights_reduce_to_knn_entropy(self, N, d, k):
        pts = np.random.default_rng(N + d).normal(size=(N, d))
        w = np.full(N, 1.0 / N)
        a = weighted_posterior_entropy(measure(pts, w), k).value
        b = knn_entropy(pts, k).value
        assert a == pytest.approx(b, abs=1e-10)

    def test_single_atom_weight(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(30, 2))
        w = np.zeros(30)
        w[0] = 1.0
        r = sorted(np.linalg.norm(pts[0] - pts[j]) for j in range(1, 30))[2]
        expected = (
            math.log(29 * math.pi * r**2 / (3 * math.gamma(2)))
            - harmonic_number(2)
            + EULER_GAMMA
            + math.log(3)
        )
        assert weighted_posterior_entropy(measure(pts, w), 3).value == pytest.approx(expected, abs=1e-10)

    def test_matches_direct_transcription(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(200, 3))
        w = rng.gamma(0.3, size=200)
        w /= w.sum()
        got = weighted_posterior_entropy(measure(pts, w), 4).value
        assert got == pytest.approx(weighted_entropy_transcription(pts, w, 4), abs=1e-10)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ParameterError):
            weighted_posterior_entropy(measure(np.eye(5), np.full(5, 0.21)), 1)
        with pytest.raises(ParameterError):
            weighted_posterior_entropy(measure(np.eye(3), [1.5, -0.5, 0.0]), 1)

    def test_coincident_atoms_are_merged(self):
        rng = np.random.default_rng(8)
        base = rng.normal(size=(25, 2))
        rows = rng.integers(0, 25, size=400)
        w = rng.gamma(1.0, size=400)
        w /= w.sum()
        est = weighted_posterior_entropy(measure(base[rows], w), 3)
        assert est.value == pytest.approx(multiplicity_transcription(base[rows], w, 3), abs=1e-10)
        assert est.m == len(np.unique(rows))
        assert est.zero_distance_count == 0

    def test_equal_multiplicities_reduce_to_distinct_points(self):
        rng = np.random.default_rng(18)
        pts = rng.normal(size=(40, 3))
        w = rng.dirichlet(np.ones(40))
        copies = measure(np.repeat(pts, 5, axis=0), np.repeat(w, 5) / 5)
        direct = weighted_entropy_transcription(pts, w, 3)
        assert weighted_posterior_entropy(copies, 3).value == pytest.approx(direct, abs=1e-10)

    def test_negligible_far_atom_barely_matters(self):
        rng = np.random.default_rng(19)
        pts = np.repeat(rng.normal(size=(30, 2)), 30, axis=0)
        w = np.full(900, 1 / 900)
        h = weighted_posterior_entropy(measure(pts, w), 3).value
        far = np.vstack([pts, [[40.0, 40.0]]])
        wf = np.append(w * (1 - 1e-6), 1e-6)
        assert weighted_posterior_entropy(measure(far, wf), 3).value == pytest.approx(h, abs=2e-3)

    def test_without_merging_duplicates_hit_the_floor(self):
        pts = np.repeat(np.arange(5.0)[:, None], 4, axis=0)
        w = np.full(20, 0.05)
        est = weighted_posterior_entropy(measure(pts, w), 3, merge=False)
        assert est.zero_distance_count == 20
        expected = math.log(19 * 2 * 1e-10 / 3) - 1.5 + EULER_GAMMA + math.log(3)
        assert est.value == pytest.approx(expected, abs=1e-9)

    def test_too_few_distinct_atoms(self):
        pts = np.repeat([[0.0], [1.0], [2.0]], 5, axis=0)
        with pytest.raises(DegenerateInputError):
            weighted_posterior_entropy(measure(pts, np.full(15, 1 / 15)), 3)


class TestInvariances:
    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_translation(self, d):
        rng = np.random.default_rng(d)
        pts = rng.normal(size=(150, d))
        shift = rng.normal(size=d) * 10
        w = rng.dirichlet(np.full(150, 0.5))
        assert knn_entropy(pts + shift, 3).value == pytest.approx(knn_entropy(pts, 3).value, abs=1e-9)
        a = weighted_posterior_entropy(measure(pts + shift, w), 3).value
        b = weighted_posterior_entropy(measure(pts, w), 3).value
        assert a == pytest.approx(b, abs=1e-9)

    @pytest.mark.parametrize("d, s", [(1, 2.0), (2, 0.3), (3, 17.0)])
    def test_scaling(self, d, s):
        rng = np.random.default_rng(10 + d)
        pts = rng.normal(size=(150, d))
        w = rng.dirichlet(np.full(150, 0.5))
        shift = d * math.log(s)
        assert knn_entropy(s * pts, 3).value - knn_entropy(pts, 3).value == pytest.approx(shift, abs=1e-9)
        a = weighted_posterior_entropy(measure(s * pts, w), 3).value
        b = weighted_posterior_entropy(measure(pts, w), 3).value
        assert a - b == pytest.approx(shift, abs=1e-9)


def test_merge_coincident_preserves_measure():
    atoms = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0], [1.0, 3.0]])
    support, w, c = merge_coincident(atoms, [0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(support, [[0, 0], [1, 2], [1, 3]])
    np.testing.assert_allclose(w, [0.2, 0.4, 0.4])
    np.testing.assert_array_equal(c, [1, 2, 1])
