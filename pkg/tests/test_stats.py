import math

import numpy as np
import pytest

from chordstats import analytic as an
from chordstats import billiard as bl
from chordstats import stats as st
from chordstats.core import Box, FixedStart


class TestEcdf:
    def test_right_continuous_steps(self):
        e = st.EcdfSummary.from_lengths([3.0, 1.0, 2.0])
        assert e.evaluate(0.5) == 0.0
        assert e.evaluate(1.0) == pytest.approx(1 / 3)
        assert e.evaluate(1.5) == pytest.approx(1 / 3)
        assert e.evaluate(3.0) == 1.0

    def test_provenance_from_sample_set(self):
        sample = bl.sample_spreading(Box((1, 2)), 5, 30.0, seed=1)
        e = st.EcdfSummary.from_sample_set(sample)
        assert e.provenance["model"] == "spreading"
        assert e.provenance["box"] == [1.0, 2.0]


class TestKsDistance:
    def test_quantile_construction(self):
        n = 100
        x = (np.arange(1, n + 1) - 0.5) / n
        d = st.ks_distance(x, lambda t: np.clip(t, 0.0, 1.0))
        assert d <= 0.5 / n + 1e-12

    def test_sample_against_own_ecdf_is_zero(self, rng):
        e = st.EcdfSummary.from_lengths(rng.random(500))
        assert st.ks_distance(e, e.evaluate) == 0.0

    def test_rescaling_invariance(self, rng):
        x = rng.random(1000) * 2 + 0.5
        cdf = lambda t: np.clip((np.asarray(t) - 0.5) / 2.0, 0.0, 1.0)
        d1 = st.ks_distance(x, cdf)
        lam = 7.0
        cdf_scaled = lambda t: cdf(np.asarray(t) / lam)
        d2 = st.ks_distance(x * lam, cdf_scaled)
        assert d1 == pytest.approx(d2, abs=1e-12)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            st.ks_distance(np.array([]), lambda t: t)

    def test_binned_matches_exact_on_fine_grid(self, rng):
        x = rng.random(50_000)
        cdf = lambda t: np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        exact = st.ks_distance(x, cdf)
        hist = st.Histogram.from_values(x, 1.0, 1 << 20)
        binned = st.ks_distance_binned(hist.edges, hist.counts, cdf)
        assert binned == pytest.approx(exact, abs=2e-5)

    def test_two_sample_binned_identical_is_zero(self, rng):
        x = rng.random(1000)
        h1 = st.Histogram.from_values(x, 1.0, 256)
        assert st.ks_two_sample_binned(h1.counts, h1.counts) == 0.0


class TestHistogram:
    def test_counts_and_density_normalization(self, rng):
        h = st.Histogram.uniform(2.0, 64)
        vals = rng.random(5000) * 2.0
        vals = vals[vals > 0]
        h.add(vals)
        assert h.total == vals.size
        widths = np.diff(h.edges)
        assert np.sum(h.density() * widths) == pytest.approx(1.0, abs=1e-12)

    def test_out_of_range_rejected(self):
        h = st.Histogram.uniform(1.0, 10)
        with pytest.raises(ValueError):
            h.add([1.5])
        with pytest.raises(ValueError):
            h.add([0.0])

    def test_merge(self, rng):
        a = st.Histogram.from_values(rng.random(100) * 0.99 + 0.005, 1.0, 16)
        b = st.Histogram.from_values(rng.random(200) * 0.99 + 0.005, 1.0, 16)
        total = a.total + b.total
        a.merge(b)
        assert a.total == total


class TestRecovery:
    def test_spreading_2d(self):
        sample = bl.sample_spreading(Box((1, 2)), 1100, 1000.0, seed=17)
        report = st.recover_sides_2d(st.EcdfSummary.from_sample_set(sample))
        assert report.sufficient
        assert report.sides[0] == pytest.approx(1.0, rel=0.02)
        assert report.sides[1] == pytest.approx(2.0, rel=0.02)

    def test_absorption_2d(self):
        sample = bl.sample_absorption(Box((1, 2)), 2000, 500, seed=23)
        report = st.recover_sides_2d(st.EcdfSummary.from_sample_set(sample))
        assert report.sufficient
        assert report.sides[0] == pytest.approx(1.0, rel=0.02)
        assert report.sides[1] == pytest.approx(2.0, rel=0.02)

    def test_uniform_noise_insufficient(self, rng):
        report = st.recover_sides_2d(rng.random(10**6))
        assert not report.sufficient
        assert report.sides is None
        assert "reason" in report.diagnostics

    def test_tiny_sample_insufficient(self, rng):
        report = st.recover_sides_2d(rng.random(100))
        assert not report.sufficient

    def test_cube_degeneracy_reports_multiplicity(self):
        sample = bl.sample_spreading(Box((1, 1, 1)), 15_000, 500.0, seed=31)
        report = st.recover_sides_3d(st.EcdfSummary.from_sample_set(sample))
        assert report.sufficient
        assert report.multiplicities == (3,)
        assert report.sides == pytest.approx((1.0, 1.0, 1.0), rel=0.02)

    def test_double_side_multiplicity(self):
        sample = bl.sample_spreading(Box((1, 1, 2)), 25_000, 800.0, seed=41)
        report = st.recover_sides_3d(st.EcdfSummary.from_sample_set(sample))
        assert report.sufficient
        assert report.multiplicities in ((2, 1), (1, 1, 1))
        assert report.sides == pytest.approx((1.0, 1.0, 2.0), rel=0.02)

    def test_scale_covariance(self):
        base = bl.sample_spreading(Box((1, 2)), 1100, 1000.0, seed=17)
        lam = 3.0
        r1 = st.recover_sides_2d(base.lengths)
        r2 = st.recover_sides_2d(base.lengths * lam)
        assert r1.sufficient and r2.sufficient
        assert np.allclose(np.asarray(r2.sides) / lam, r1.sides, rtol=1e-6)

    def test_inverse_sampled_analytic_data(self, rng):
        # no simulator in the loop: sample the closed-form law directly
        box = Box((1, 2))
        cdf = an.spreading_density_2d(box).cdf_callable()
        grid = np.linspace(1e-9, box.diag(), 200_001)
        samples = np.interp(rng.random(10**6), cdf(grid), grid)
        report = st.recover_sides_2d(samples)
        assert report.sufficient
        assert report.sides[0] == pytest.approx(1.0, rel=0.01)
        assert report.sides[1] == pytest.approx(2.0, rel=0.01)
