import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeworth import estimators as E
from edgeworth import models as M
from edgeworth import simulator as S

from conftest import BASELINE_SEED

frac = st.fractions(min_value=-3, max_value=3, max_denominator=10)


class TestMomentCumulantConversion:
    def test_bernoulli_half(self):
        # Central moments of Bernoulli(1/2): m2 = 1/4, m3 = 0, m4 = 1/16.
        chi = E.moments_to_cumulants(
            [Fraction(1, 4), Fraction(0), Fraction(1, 16)], Fraction(1, 2)
        )
        assert chi == [Fraction(1, 2), Fraction(1, 4), Fraction(0), Fraction(-1, 8)]

    def test_point_mass(self):
        chi = E.moments_to_cumulants([0, 0, 0, 0, 0], 3)
        assert chi == [3, 0, 0, 0, 0, 0]

    def test_low_order_identities(self):
        m2, m3, m4 = Fraction(2), Fraction(-1, 2), Fraction(7)
        chi = E.moments_to_cumulants([m2, m3, m4], Fraction(0))
        assert chi[1] == m2 and chi[2] == m3
        assert chi[3] == m4 - 3 * m2 * m2

    def test_order_cap(self):
        with pytest.raises(ValueError, match="unsupported"):
            E.moments_to_cumulants([1] * 8, 0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(frac, min_size=1, max_size=7), frac)
    def test_round_trip_identity(self, central, mean):
        chi = E.moments_to_cumulants(central, mean)
        back = E.cumulants_to_moments(chi)
        assert back == list(central)

    def test_poisson_sample_cumulants_all_equal_rate(self):
        rng = np.random.Generator(np.random.PCG64(5))
        draws = rng.poisson(5.0, size=400_000)
        mean = draws.mean()
        centered = draws - mean
        central = [float((centered**j).mean()) for j in range(2, 5)]
        chi = E.moments_to_cumulants(central, float(mean))
        for value, tol in zip(chi, (0.05, 0.3, 1.5, 5.0)):
            assert value == pytest.approx(5.0, abs=tol)


class TestEstimateChi:
    def test_chi1_matches_raw_profile(self, bst_run_1e5):
        model = M.bst()
        est = E.estimate_chi(bst_run_1e5, model, 0.0, J=1)
        snap = bst_run_1e5.final
        raw = float((snap.levels * snap.counts).sum()) / snap.S - 2.0 * snap.w_n
        assert est.chi(1) == pytest.approx(raw, abs=1e-10)

    def test_bst_minus_log2_w_is_one(self, bst_run_1e5):
        est = E.estimate_chi(bst_run_1e5, M.bst(), -math.log(2.0), J=1)
        assert est.w_hat == pytest.approx(1.0, rel=1e-11)

    def test_outside_range_warns(self, bst_run_1e5):
        with pytest.warns(UserWarning, match="outside"):
            E.estimate_chi(bst_run_1e5, M.bst(), 2.5, J=1)

    def test_estimates_stabilize_across_snapshots(self, bst_run_1e5):
        model = M.bst()
        tail = bst_run_1e5.snapshots[-3:]
        values = [
            E.estimate_chi(bst_run_1e5, model, 0.0, J=1, snapshot=s).chi(1) for s in tail
        ]
        diffs = [abs(b - a) for a, b in zip(values, values[1:])]
        assert max(diffs) < 0.2

    def test_richardson_flag(self, bst_run_1e5):
        est = E.estimate_chi(bst_run_1e5, M.bst(), 0.0, J=2, richardson=True)
        plain = E.estimate_chi(bst_run_1e5, M.bst(), 0.0, J=2)
        assert est.n_used == plain.n_used
        assert est.chi(1) == pytest.approx(plain.chi(1), abs=0.1)

    def test_json_round_trip(self, bst_run_1e5):
        est = E.estimate_chi(bst_run_1e5, M.bst(), 0.3, J=2)
        back = E.LimitEstimate.from_json(est.to_json())
        assert back == est


class TestChiCurve:
    def test_interpolation_matches_exact(self, bst_run_1e5):
        model = M.bst()
        grid = np.linspace(-0.4, 0.4, 17)
        curve = E.ChiCurve(bst_run_1e5, model, grid, J=2)
        exact = E.ChiCurve(bst_run_1e5, model, grid, J=2, exact=True)
        for beta in (-0.31, 0.07, 0.35):
            assert curve.w(beta) == pytest.approx(exact.w(beta), rel=1e-4)
            for a, b in zip(curve.chi(beta), exact.chi(beta)):
                assert a == pytest.approx(b, abs=1e-3)


class TestReplicateMoments:
    def test_jabbour_mean_one(self, bst_ensemble_1e3):
        rows = E.replicate_moments(bst_ensemble_1e3, M.bst(), 0.5, statistic="J")
        final = rows[-1]
        assert abs(final["mean"] - 1.0) <= 5 * final["stderr"]

    def test_w_mean_matches_exact(self, bst_ensemble_1e3):
        rows = E.replicate_moments(bst_ensemble_1e3, M.bst(), -0.5, statistic="W")
        final = rows[-1]
        expected = M.exact_mean_W(M.bst(), 1000, -0.5)
        assert abs(final["mean"] - expected) <= 5 * final["stderr"]

    def test_deterministic_statistic_zero_stderr(self, bst_ensemble_1e3):
        rows = E.replicate_moments(
            bst_ensemble_1e3, M.bst(), 0.0, statistic=lambda snap, model, beta: float(snap.S)
        )
        assert rows[-1]["stderr"] == 0.0

    def test_mismatched_schedules_rejected(self):
        a = S.grow(M.bst(), 100, seed=1, schedule=[50, 100])
        b = S.grow(M.bst(), 100, seed=2, schedule=[100])
        with pytest.raises(ValueError, match="mismatched"):
            E.replicate_moments([a, b], M.bst(), 0.0)

    def test_needs_two_runs(self):
        a = S.grow(M.bst(), 100, seed=1)
        with pytest.raises(ValueError, match=">= 2"):
            E.replicate_moments([a], M.bst(), 0.0)


class TestTrend:
    def test_strictly_decreasing(self):
        report = E.trend([(10, 5.0), (100, 3.0), (1000, 1.0)])
        assert report["monotone_fraction"] == 1.0
        assert report["last_over_first_ratio"] == pytest.approx(0.2)

    def test_constant_series(self):
        report = E.trend([(1, 2.0), (2, 2.0), (3, 2.0)])
        assert report["last_over_first_ratio"] == 1.0

    def test_needs_three_points(self):
        with pytest.raises(ValueError, match=">= 3"):
            E.trend([(1, 1.0), (2, 2.0)])


class TestChiVarianceStability:
    def test_bst_chi1_variance_stable_between_scales(self):
        # The limit has finite variance, so the sample variance of chi-hat_1
        # stabilizes between n = 10^4 and n = 10^5.
        model = M.bst()
        runs = S.grow_ensemble(
            model, 10**5, BASELINE_SEED, replicates=200, schedule=[10**4, 10**5]
        )
        by_n = {10**4: [], 10**5: []}
        for run in runs:
            for snap in run.snapshots:
                est = E.estimate_chi(run, model, 0.0, J=1, snapshot=snap)
                by_n[snap.n].append(est.chi(1))
        var4 = np.var(by_n[10**4], ddof=1)
        var5 = np.var(by_n[10**5], ddof=1)
        assert abs(var5 - var4) / var4 < 0.3
