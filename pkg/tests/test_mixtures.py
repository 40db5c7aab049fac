import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gmdiv import (
    Compact,
    GaussianMixture,
    HypothesisError,
    MixingDistribution,
    Subgaussian,
    Unconstrained,
    dichotomy_family,
    mixture_from_record,
    mixture_to_record,
    subgaussian_check,
)
from conftest import random_compact, single_gaussian

LOG_INV_SQRT_2PI = -0.5 * math.log(2 * math.pi)


class TestLogDensity:
    def test_standard_normal_at_mode(self):
        gm = single_gaussian(0.0)
        assert gm.log_density(np.array([0.0])) == pytest.approx(-0.9189385332046727, abs=1e-12)

    def test_point_mass_shifts_the_gaussian(self, rng):
        u = np.array([2.0, 0.0, 0.0])
        gm = single_gaussian(u)
        for _ in range(10):
            x = rng.standard_normal(3) * 3
            expected = -0.5 * np.sum((x - u) ** 2) + 3 * LOG_INV_SQRT_2PI
            assert gm.log_density(x) == pytest.approx(expected, rel=1e-12)

    def test_two_symmetric_atoms_at_center(self):
        # both kernels contribute phi(1), so the mixture density is phi(1)
        gm = GaussianMixture.from_atoms([[-1.0], [1.0]], [0.5, 0.5])
        expected = -0.5 + LOG_INV_SQRT_2PI
        assert gm.log_density(np.array([0.0])) == pytest.approx(expected, rel=1e-14)

    def test_finite_far_from_all_atoms(self):
        gm = GaussianMixture.from_atoms([[-1.0], [1.0]], [0.5, 0.5])
        val = gm.log_density(np.array([400.0]))
        assert math.isfinite(val)
        batch = gm.log_density(np.array([[-300.0], [0.0], [500.0]]))
        assert batch.shape == (3,)
        assert np.all(np.isfinite(batch))

    def test_dimension_mismatch_rejected(self):
        gm = single_gaussian([0.0, 0.0])
        with pytest.raises(ValueError):
            gm.log_density(np.array([1.0, 2.0, 3.0]))


class TestScore:
    def test_single_atom_at_origin(self):
        gm = single_gaussian(0.0)
        assert gm.score(np.array([2.0]))[0] == pytest.approx(-2.0, abs=1e-14)

    def test_single_atom_shift(self, rng):
        u = np.array([1.0, -2.0])
        gm = single_gaussian(u)
        x = rng.standard_normal(2)
        assert np.allclose(gm.score(x), u - x, atol=1e-12)

    def test_symmetric_pair_zero_at_center(self):
        gm = GaussianMixture.from_atoms([[-1.0], [1.0]], [0.5, 0.5])
        assert gm.score(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_matches_central_differences(self, d, rng):
        h = 1e-4
        for _ in range(20):
            gm = random_compact(rng, M=2.0, d=d)
            x = rng.standard_normal(d) * 3
            grad = gm.score(x)
            fd = np.empty(d)
            for i in range(d):
                e = np.zeros(d)
                e[i] = h
                fd[i] = (gm.log_density(x + e) - gm.log_density(x - e)) / (2 * h)
            err = np.linalg.norm(fd - grad) / max(np.linalg.norm(grad), 1.0)
            assert err <= 1e-5

    @pytest.mark.parametrize("d", [1, 2])
    def test_compact_score_bound(self, d, rng):
        # |grad log p| <= 3 ||x|| + 4 M for Compact(M)
        M = 2.0
        for _ in range(10):
            gm = random_compact(rng, M=M, d=d)
            for r in np.linspace(0.0, M + 10.0, 40):
                omega = rng.standard_normal(d)
                omega /= np.linalg.norm(omega)
                x = r * omega
                assert np.linalg.norm(gm.score(x)) <= 3 * r + 4 * M + 1e-9


class TestRadialEnvelope:
    def test_monotone_and_tail_envelope(self, rng):
        # beyond the support radius the density decreases along every ray and
        # obeys p(r') <= p(r) exp(-((r'-M)^2 - (r-M)^2)/2)
        M = 2.0
        for d in (1, 2):
            for _ in range(5):
                gm = random_compact(rng, M=M, d=d)
                omega = rng.standard_normal(d)
                omega /= np.linalg.norm(omega)
                rs = np.linspace(M, M + 8.0, 60)
                logs = gm.log_density(rs[:, None] * omega[None, :])
                assert np.all(np.diff(logs) <= 1e-12)
                for i in range(len(rs) - 1):
                    for j in range(i + 1, len(rs), 7):
                        decay = -0.5 * ((rs[j] - M) ** 2 - (rs[i] - M) ** 2)
                        assert logs[j] <= logs[i] + decay + 1e-9


class TestSample:
    def test_rejects_nonpositive_n(self):
        gm = single_gaussian(0.0)
        with pytest.raises(ValueError):
            gm.sample(0, seed=1)

    def test_deterministic_given_seed(self):
        gm = GaussianMixture.from_atoms([[-1.0], [1.0]], [0.3, 0.7])
        a = gm.sample(1000, seed=42)
        b = gm.sample(1000, seed=42)
        assert np.array_equal(a, b)
        c = gm.sample(1000, seed=43)
        assert not np.array_equal(a, c)

    def test_single_atom_mean_within_clt_band(self):
        gm = single_gaussian(0.0)
        xs = gm.sample(10**6, seed=7)
        assert abs(float(xs.mean())) <= 5.0 / math.sqrt(10**6)


class TestMixingDistributionValidation:
    def test_renormalizes_within_tolerance(self):
        w = np.array([0.5, 0.5 + 5e-13])
        m = MixingDistribution(np.array([[0.0], [1.0]]), w)
        assert m.weights.sum() == pytest.approx(1.0, abs=1e-16)

    def test_rejects_bad_weight_sum(self):
        with pytest.raises(ValueError, match="tolerance"):
            MixingDistribution(np.array([[0.0], [1.0]]), np.array([0.6, 0.5]))

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            MixingDistribution(np.array([[0.0], [1.0]]), np.array([1.0, 0.0]))

    def test_compact_atom_outside_ball_rejected(self):
        with pytest.raises(ValueError, match="Compact"):
            MixingDistribution(np.array([[3.0]]), np.array([1.0]), Compact(2.0))

    def test_subgaussian_tag_enforced(self):
        with pytest.raises(ValueError, match="subgaussian"):
            MixingDistribution(
                np.array([[0.0], [10.0]]), np.array([0.5, 0.5]), Subgaussian(1.0)
            )

    def test_nonpositive_tag_parameters_rejected(self):
        with pytest.raises(HypothesisError):
            Compact(0.0)
        with pytest.raises(HypothesisError):
            Subgaussian(-1.0)


class TestSubgaussianCheck:
    def test_origin_atom_passes_any_level(self):
        m = MixingDistribution(np.array([[0.0]]), np.array([1.0]))
        assert subgaussian_check(m, 0.01)

    def test_heavy_far_atom_fails(self):
        m = MixingDistribution(np.array([[0.0], [10.0]]), np.array([0.5, 0.5]))
        assert not subgaussian_check(m, 1.0)

    def test_dichotomy_passes_at_its_own_level(self):
        assert subgaussian_check(dichotomy_family(2.0, 5.0), 2.0)


class TestDichotomyFamily:
    def test_tail_weight_values(self):
        m = dichotomy_family(math.sqrt(2.0), 2.0)
        assert m.weights[1] == pytest.approx(math.exp(-1.0), rel=1e-15)
        m = dichotomy_family(2.0, 2.0)
        assert m.weights[1] == pytest.approx(math.exp(-0.5), rel=1e-15)
        assert np.allclose(m.locations.ravel(), [0.0, 2.0])

    def test_parameter_range(self):
        with pytest.raises(HypothesisError):
            dichotomy_family(1.0, 5.0)
        with pytest.raises(HypothesisError):
            dichotomy_family(2.0, 1.0)

    @settings(max_examples=30, deadline=None)
    @given(
        K=st.floats(min_value=1.01, max_value=50.0),
        r=st.floats(min_value=1.01, max_value=50.0),
    )
    def test_always_subgaussian_at_level_k(self, K, r):
        assume(r * r / (2.0 * K * K) < 700.0)  # keep h_r representable
        assert subgaussian_check(dichotomy_family(K, r), K)

    def test_underflowing_tail_weight_rejected(self):
        with pytest.raises(HypothesisError, match="underflows"):
            dichotomy_family(1.01, 39.0)


class TestSerialization:
    @pytest.mark.parametrize(
        "tag", [Compact(2.0), Subgaussian(1.5), Unconstrained()]
    )
    def test_roundtrip(self, tag):
        locs = np.array([[0.0, 0.0], [0.3, -0.4], [1.0, 0.5]])
        w = np.array([0.6, 0.3, 0.1])
        m = MixingDistribution(locs, w, tag)
        rec = mixture_to_record(m)
        assert list(rec) == ["dim", "atoms", "class_tag", "params"]
        back = mixture_from_record(rec)
        assert np.array_equal(back.locations, m.locations)
        # weights may be renormalized a second time; exact to one ulp
        assert np.allclose(back.weights, m.weights, rtol=5e-16, atol=0.0)
        assert back.tag == m.tag

    def test_unknown_field_rejected(self):
        rec = mixture_to_record(MixingDistribution(np.array([[0.0]]), np.array([1.0])))
        rec["extra"] = 1
        with pytest.raises(ValueError, match="unknown"):
            mixture_from_record(rec)
