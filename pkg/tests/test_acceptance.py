"""Acceptance criteria, one test per criterion.

Each test prints a one-line PASS/FAIL summary (collected in the terminal
summary section) and enforces the criterion at its stated tolerance and
runtime budget.  Reference values marked `ref.*` live in the packaged
fixtures file, frozen from the seeded baseline runs by
tools/regen_fixtures.py.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np

from edgeworth import estimators as E
from edgeworth import fixtures as FX
from edgeworth import models as M
from edgeworth import simulator as S
from edgeworth import verify as V
from edgeworth.algebra import DiffOperator, Polynomial, bell_eval, bell_partition_sum, hermite_poly
from edgeworth.expansion import CumulantSet, edgeworth_term, fourier_invert_check

from conftest import record_acceptance

FIXTURES = FX.load_fixtures()


class _Criterion:
    def __init__(self, cid: str, budget: float):
        self.cid = cid
        self.budget = budget
        self.t0 = time.perf_counter()

    def finish(self, ok: bool, desc: str):
        elapsed = time.perf_counter() - self.t0
        state = "PASS" if ok and elapsed < self.budget else "FAIL"
        line = f"{self.cid} {state} [{elapsed:.2f}s / {self.budget:.0f}s] {desc}"
        record_acceptance(line)
        assert ok, line
        assert elapsed < self.budget, line


def _rand_fraction(rng, lo=-3, hi=3, max_den=12, nonzero=False):
    while True:
        f = Fraction(rng.randint(lo * max_den, hi * max_den), rng.randint(1, max_den))
        if not nonzero or f != 0:
            return f


def _rational_cumulant_set(rng, chi_orders=2, kappa_orders=4):
    sigma = abs(_rand_fraction(rng, nonzero=True)) + Fraction(1, 4)
    kappa = [Fraction(0), Fraction(0), sigma * sigma]
    kappa += [_rand_fraction(rng) for _ in range(3, kappa_orders + 1)]
    chi = [Fraction(0)] + [_rand_fraction(rng) for _ in range(chi_orders)]
    return CumulantSet.build(Fraction(0), tuple(kappa), tuple(chi), sigma=sigma)


def _explicit_g1(c):
    s = c.sigma
    return (c.chi_order(1) / s) * hermite_poly(1) + (
        c.kappa_order(3) / (6 * s**3)
    ) * hermite_poly(3)


def _explicit_g2(c):
    s = c.sigma
    chi1, chi2 = c.chi_order(1), c.chi_order(2)
    k3, k4 = c.kappa_order(3), c.kappa_order(4)
    return (
        ((chi1 * chi1 + chi2) / (2 * s**2)) * hermite_poly(2)
        + (k4 / (24 * s**4) + k3 * chi1 / (6 * s**4)) * hermite_poly(4)
        + (k3 * k3 / (72 * s**6)) * hermite_poly(6)
    )


def test_c01_symbolic_exactness():
    crit = _Criterion("C01 symbolic-exactness", budget=1.0)
    rng = random.Random(2026)
    ok = True
    for _ in range(100):
        c = _rational_cumulant_set(rng)
        ok &= edgeworth_term(0, c) == Polynomial.one()
        ok &= edgeworth_term(1, c) == _explicit_g1(c)
        ok &= edgeworth_term(2, c) == _explicit_g2(c)
        if not ok:
            break
    crit.finish(ok, "G_0/G_1/G_2 coefficient-exact on 100 random rational cumulant sets")


def test_c02_bell_oracle_equivalence():
    crit = _Criterion("C02 bell-oracle", budget=1.0)
    rng = random.Random(7)
    polys = [
        Polynomial([_rand_fraction(rng), _rand_fraction(rng)]) for _ in range(8)
    ]
    ops = [
        DiffOperator({i: _rand_fraction(rng), i + 2: _rand_fraction(rng)})
        for i in range(1, 9)
    ]
    ok = True
    for J in range(9):
        ok &= bell_eval(polys[:J], one=Polynomial.one()) == bell_partition_sum(
            polys[:J], one=Polynomial.one()
        )
        ok &= bell_eval(ops[:J], one=DiffOperator.identity()) == bell_partition_sum(
            ops[:J], one=DiffOperator.identity()
        )
    crit.finish(ok, "recurrence == partition sum for J <= 8 over polynomials and operators")


def test_c03_parity_and_degree():
    crit = _Criterion("C03 parity-degree", budget=1.0)
    rng = random.Random(99)
    ok = True
    for _ in range(5):
        c = _rational_cumulant_set(rng, chi_orders=8, kappa_orders=10)
        for j in range(9):
            g = edgeworth_term(j, c)
            ok &= g.degree <= 3 * j
            ok &= all(
                coeff == 0 for i, coeff in enumerate(g.coeffs) if (i - j) % 2 != 0
            )
    crit.finish(ok, "deg(G_j) <= 3j and G_j(-x) = (-1)^j G_j(x), exact, j <= 8")


def test_c04_fourier_inversion():
    crit = _Criterion("C04 fourier-inversion", budget=10.0)
    rng = random.Random(4)
    x_grid = np.arange(-5.0, 5.5, 0.5)
    worst = 0.0
    for _ in range(3):
        exact = _rational_cumulant_set(rng, chi_orders=4, kappa_orders=6)
        c = CumulantSet.build(
            0.0,
            tuple(float(v) for v in exact.kappa),
            tuple(float(v) for v in exact.chi),
        )
        worst = max(worst, fourier_invert_check(4, c, x_grid))
    crit.finish(worst <= 1e-8, f"max relative error {worst:.3e} <= 1e-8 for k <= 4")


def test_c05_classical_edgeworth():
    crit = _Criterion("C05 classical-edgeworth", budget=30.0)
    report = V.classical_edgeworth_check(
        {0: "0.2", 1: "0.5", 2: "0.3"}, [64, 128, 256, 512], 2
    )
    by_n = {row["n"]: row for row in report.series}
    ok = by_n[512]["E1"] < by_n[64]["E1"] and by_n[512]["E2"] < by_n[64]["E2"]
    for n in (64, 512):
        for j in (1, 2):
            ok &= FX.match_significant(
                by_n[n][f"E{j}"], FIXTURES[f"ref.classical.r2.E{j}.n{n}"], 3
            )
    crit.finish(
        ok,
        f"E1: {by_n[64]['E1']:.4g} -> {by_n[512]['E1']:.4g}, "
        f"E2: {by_n[64]['E2']:.4g} -> {by_n[512]['E2']:.4g}, match fixtures to 3 s.d.",
    )


def test_c06_exact_martingale_invariants(bst_run_1e5):
    crit = _Criterion("C06 martingale-invariants", budget=5.0)
    model = M.bst()
    worst0 = worst2 = 0.0
    for snap in bst_run_1e5.snapshots:
        w0 = S.laplace_W(snap, model, 0.0)
        worst0 = max(worst0, abs(w0 - (snap.n + 1) / snap.n) / ((snap.n + 1) / snap.n))
        w2 = S.laplace_W(snap, model, -math.log(2.0))
        worst2 = max(worst2, abs(w2 - 1.0))
    ok = worst0 <= 1e-9 and worst2 <= 1e-9
    crit.finish(ok, f"W_n(0) and W_n(-log 2) exact to {max(worst0, worst2):.2e} <= 1e-9")


def test_c07_jabbour_mean(bst_ensemble_1e3):
    crit = _Criterion("C07 jabbour-mean", budget=60.0)
    model = M.bst()
    ok = True
    details = []
    for beta in (-0.5, 0.0, 0.5):
        j_vals = np.array([S.jabbour_J(run.final, model, beta) for run in bst_ensemble_1e3])
        se = j_vals.std(ddof=1) / math.sqrt(len(j_vals))
        ok &= abs(j_vals.mean() - 1.0) <= 5 * se + 1e-9
        w_vals = np.array([S.laplace_W(run.final, model, beta) for run in bst_ensemble_1e3])
        se_w = w_vals.std(ddof=1) / math.sqrt(len(w_vals))
        expected = M.exact_mean_W(model, 1000, beta)
        ok &= abs(w_vals.mean() - expected) <= 5 * se_w + 1e-9
        details.append(f"beta={beta:g}: |EJ-1|={abs(j_vals.mean() - 1):.2e}")
    crit.finish(ok, "; ".join(details))


def test_c08_mean_limit_monotone():
    crit = _Criterion("C08 mean-limit", budget=1.0)
    ok = True
    for name in ("bst", "port"):
        model = M.get_model(name)
        for beta in (-0.5, 0.3):
            limit = M.limit_mean_W(model, beta)
            gap3 = abs(M.exact_mean_W(model, 10**3, beta) - limit)
            gap6 = abs(M.exact_mean_W(model, 10**6, beta) - limit)
            ok &= gap6 < gap3
    crit.finish(ok, "E W_n approaches the Gamma-ratio limit monotonically in n")


def test_c09_beta_ranges():
    crit = _Criterion("C09 beta-ranges", budget=1.0)
    lo_b, hi_b = M.bst().beta_range()
    _, hi_p = M.port().beta_range()
    _, hi_v = M.vertical_bst().beta_range()
    ok = (
        abs(hi_b - 0.768) <= 1e-3
        and abs(lo_b - (-1.678)) <= 1e-3
        and abs(hi_p - 1.278) <= 1e-3
        and abs(hi_v - 0.9071) <= 1e-4
    )
    crit.finish(
        ok,
        f"bst ({lo_b:.4f}, {hi_b:.4f}), port beta+ {hi_p:.4f}, vertical beta+ {hi_v:.5f}",
    )


def test_c10_local_clt_trend(bst_run_1e6):
    crit = _Criterion("C10 local-clt", budget=120.0)
    model = M.bst()
    chi = E.estimate_chi(bst_run_1e6, model, 0.0, J=2)
    report = V.clt_sup_error(bst_run_1e6, model, 0, 0.0, chi)
    first = report.series[0]
    final = report.series[-1]
    assert first["n"] == 1000 and final["n"] == 10**6
    ok = final["statistic"] < first["statistic"]
    ok &= FX.match_significant(
        final["statistic"], FIXTURES["ref.clt.bst.s12.r0.b0.final"], 2
    )
    crit.finish(
        ok,
        f"sqrt(w)*sup: {first['statistic']:.4g} (n=1e3) -> {final['statistic']:.4g} (n=1e6), "
        "matches fixture to 2 s.d.",
    )


def test_c11_mode_theorem(bst_run_1e6, rrt_run_1e6, port_run_1e6):
    crit = _Criterion("C11 mode", budget=180.0)
    ok = True
    details = []
    for name, run in (("bst", bst_run_1e6), ("rrt", rrt_run_1e6), ("port", port_run_1e6)):
        model = M.get_model(name)
        chi = E.estimate_chi(run, model, 0.0, J=2)
        report = V.mode_check(run, model, chi, n_min=10**4)
        frac = 1.0 - report.checks["fail_fraction"]
        ok &= frac >= 0.95
        details.append(f"{name}: {frac:.0%}")
    crit.finish(ok, "mode in {floor(u*), ceil(u*)} for " + ", ".join(details))


def test_c12_width(bst_run_1e6, rrt_run_1e6, port_run_1e6):
    crit = _Criterion("C12 width", budget=60.0)
    ok = True
    details = []
    for name, run in (("bst", bst_run_1e6), ("rrt", rrt_run_1e6), ("port", port_run_1e6)):
        model = M.get_model(name)
        chi = E.estimate_chi(run, model, 0.0, J=2)
        report = V.width_check(run, model, chi)
        final = report.series[-1]
        ok &= abs(final["first_order"] - 1.0) <= 0.10
        ref = FIXTURES[f"ref.width.{name}.s12.mtilde_theta2_final"]
        ok &= abs(final["statistic"] - ref) <= 0.05
        details.append(f"{name}: first-order {final['first_order']:.3f}")
    crit.finish(ok, ", ".join(details) + "; M~ - theta^2 matches fixtures to 1 decimal")


def test_c13_occupation_uncentered(bst_occupation_ensemble):
    crit = _Criterion("C13 occupation-uncentered", budget=600.0)
    report = V.occupation_check(
        bst_occupation_ensemble, M.bst(), "uncentered", beta=0.3, alpha=0.0
    )
    first, final = report.series[0], report.series[-1]
    assert first["n"] == 10**4 and final["n"] == 10**6
    ok = final["abs_rel_gap"] < first["abs_rel_gap"]
    ok &= FX.match_significant(
        final["abs_rel_gap"],
        FIXTURES["ref.occupation.uncentered.bst.s12.b0p3.final_abs_rel_gap"],
        2,
    )
    crit.finish(
        ok,
        f"mean |rel gap| to W(0.3)/(sqrt(2 pi) sigma): {first['abs_rel_gap']:.4f} (n=1e4)"
        f" -> {final['abs_rel_gap']:.4f} (n=1e6), 50 replicates",
    )
