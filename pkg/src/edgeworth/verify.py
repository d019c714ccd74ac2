"""Theorem harnesses: scaled error statistics and predicted limits.

Each harness turns an almost-sure limit theorem into a finite-n report: a
per-snapshot series of the theorem's scaled statistic, the predicted limit
built from estimated limit objects, and named scalar checks that can be
compared against thresholds from a fixtures file.  The theorems carry no
rate constants, so every finite-n threshold is an engineering choice
recorded in fixtures, never a claim of the theory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import models as _models
from . import simulator as _sim
from .estimators import ChiCurve, LimitEstimate, estimate_chi
from .expansion import (
    CumulantSet,
    edgeworth_terms,
    expansion_value,
    saddle_expansion_value,
)
from .models import ModelSpec

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


@dataclass
class TheoremReport:
    """Statistic series plus predictions and reproducibility metadata."""

    theorem: str
    metadata: dict
    series: list = field(default_factory=list)
    predicted: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    fixture_prefix: str = ""
    passed: bool | None = None
    thresholds: dict | None = None

    def series_rows(self) -> list:
        """(n, statistic, prediction) rows for the plot-data CSV."""
        out = []
        for row in self.series:
            out.append(
                (
                    row.get("n"),
                    row.get("statistic", math.nan),
                    row.get("prediction", math.nan),
                )
            )
        return out

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "metadata": self.metadata,
            "predicted": self.predicted,
            "series": self.series,
            "checks": self.checks,
            "fixture_prefix": self.fixture_prefix,
            "passed": self.passed,
            "thresholds": self.thresholds,
        }


def _slug(value) -> str:
    s = f"{value:g}" if isinstance(value, float) else str(value)
    return s.replace("-", "m").replace(".", "p").replace(":", "-")


def _chi_tuple(source: LimitEstimate, r: int) -> tuple:
    """(chi_0 .. chi_r) for a CumulantSet from a LimitEstimate."""
    if r == 0:
        return (math.log(source.w_hat),)
    return source.chi_with_log_w()[: r + 1]


# ---------------------------------------------------------------------------
# Local CLT / Edgeworth harness


def clt_sup_error(
    run: _sim.RunTrace,
    model: ModelSpec,
    r: int,
    beta: float,
    chi_source: LimitEstimate,
) -> TheoremReport:
    """Series of w_n^{(r+1)/2} sup_k |tilted profile - order-r expansion|.

    The sup runs over the profile support extended to the window
    [mu w - 10 sigma sqrt(w), mu w + 10 sigma sqrt(w)]; outside, both sides
    are below 1e-15 of the peak.  chi-hat and W-hat come from `chi_source`.
    """
    if r > 4:
        raise ValueError("r <= 4 supported")
    lo, hi = model.beta_range()
    if not (lo < beta < hi):
        raise ValueError(f"beta = {beta} outside admissible interval ({lo}, {hi})")
    c = _models.cumulants(model, beta, kmax=r + 2, chi=_chi_tuple(chi_source, r))
    terms = edgeworth_terms(r, c)
    phi = _models.phi_value(model, beta)
    W = chi_source.w_hat
    series = []
    for snap in run.snapshots:
        w = snap.w_n
        if snap.n < 2:
            # w_n = 0: the expansion degenerates and the scaled statistic
            # vanishes with the w^{(r+1)/2} prefactor.
            series.append({"n": snap.n, "statistic": 0.0, "prediction": 0.0})
            continue
        scaled = w ** ((r + 1) / 2.0) * _sup_error(snap, beta, phi, c, W, w, r, terms)
        series.append({"n": snap.n, "statistic": scaled, "prediction": 0.0})
    values = [row["statistic"] for row in series]
    checks = {
        "final_scaled_sup": values[-1],
        "last_over_first": values[-1] / values[0] if values[0] else math.inf,
    }
    return TheoremReport(
        theorem="clt",
        metadata={
            "model": model.name,
            "seed": run.seed,
            "beta": beta,
            "r": r,
            "chi_n_used": chi_source.n_used,
        },
        series=series,
        predicted={"limit": 0.0},
        checks=checks,
        fixture_prefix=f"clt.{_slug(model.name)}.s{run.seed}.r{r}.b{_slug(beta)}",
    )


def _sup_error(snap, beta, phi, c, W, w, r, terms) -> float:
    sigma, mu = float(c.sigma), float(c.mu)
    lo = min(snap.min_level, math.floor(mu * w - 10 * sigma * math.sqrt(w)))
    hi = max(snap.max_level, math.ceil(mu * w + 10 * sigma * math.sqrt(w)))
    ks = np.arange(lo, hi + 1)
    counts = np.zeros(len(ks))
    offset = snap.min_level - lo
    counts[offset : offset + len(snap.counts)] = snap.counts
    emp = np.where(
        counts > 0, np.exp(beta * ks - phi * w + np.log(np.maximum(counts, 1.0))), 0.0
    )
    pred = expansion_value(r, c, W, w, ks, terms=terms)
    return float(np.abs(emp - pred).max())


# ---------------------------------------------------------------------------
# Saddle-point (large deviations) harness


def saddle_sup_error(
    run: _sim.RunTrace,
    model: ModelSpec,
    r: int,
    K_interval: tuple,
    chi_curve: ChiCurve | None = None,
    grid_points: int = 33,
    exact_chi: bool = False,
) -> TheoremReport:
    """Series of w_n^{r+1} sup over k in w_n phi'(K) of the saddle expansion error.

    At each admissible level the tilt solves phi'(beta) = k / w_n; cumulant
    estimates are interpolated on a `grid_points` beta grid over K (cubic)
    unless `exact_chi` forces per-level tilted-moment evaluation.
    """
    k_lo, k_hi = K_interval
    blo, bhi = model.beta_range()
    if not (blo < k_lo < k_hi < bhi):
        raise ValueError(f"K interval {K_interval} not strictly inside ({blo}, {bhi})")
    J = max(2 * r, 1)
    if chi_curve is None:
        chi_curve = ChiCurve(
            run, model, np.linspace(k_lo, k_hi, grid_points), J=J, exact=exact_chi
        )
    lo_rate = _models.phi_deriv(model, 1, k_lo)
    hi_rate = _models.phi_deriv(model, 1, k_hi)
    series = []
    for snap in run.snapshots:
        w = snap.w_n
        kmin = math.ceil(w * lo_rate)
        kmax = math.floor(w * hi_rate)
        if kmin > kmax:
            series.append({"n": snap.n, "statistic": math.nan, "prediction": 0.0})
            continue
        worst = 0.0
        for k in range(kmin, kmax + 1):
            bn = _models.saddle_beta(model, k, w)
            chi = (0.0,)
            if r > 0:
                chi = chi + tuple(chi_curve.chi(bn)[: 2 * r])
            c = _models.cumulants(model, bn, kmax=2 * r + 2, chi=chi)
            emp = snap.count_at(k) * math.exp(bn * k - _models.phi_value(model, bn) * w)
            pred = saddle_expansion_value(r, c, chi_curve.w(bn), w, k)
            worst = max(worst, abs(emp - pred))
        series.append({"n": snap.n, "statistic": w ** (r + 1) * worst, "prediction": 0.0})
    values = [row["statistic"] for row in series if not math.isnan(row["statistic"])]
    checks = {
        "final_scaled_sup": values[-1] if values else math.nan,
        "last_over_first": (values[-1] / values[0]) if len(values) > 1 and values[0] else math.inf,
    }
    return TheoremReport(
        theorem="saddle",
        metadata={
            "model": model.name,
            "seed": run.seed,
            "r": r,
            "K": list(K_interval),
            "exact_chi": exact_chi,
        },
        series=series,
        predicted={"limit": 0.0},
        checks=checks,
        fixture_prefix=f"saddle.{_slug(model.name)}.s{run.seed}.r{r}",
    )


# ---------------------------------------------------------------------------
# Mode and width harnesses


def predicted_mode_location(model: ModelSpec, w: float, chi1: float) -> float:
    """u* = phi'(0) w + chi_1(0) - kappa_3(0) / (2 sigma^2(0))."""
    return (
        _models.phi_deriv(model, 1, 0.0) * w
        + chi1
        - _models.phi_deriv(model, 3, 0.0) / (2.0 * _models.phi_deriv(model, 2, 0.0))
    )


def _nint(x: float) -> int:
    """Nearest integer, half-integers rounded down (mode-location convention)."""
    f = math.floor(x)
    return f if x - f <= 0.5 else f + 1


def mode_check(
    run: _sim.RunTrace,
    model: ModelSpec,
    chi_source: LimitEstimate,
    n_min: int = 10**4,
) -> TheoremReport:
    """Check the empirical mode against {floor(u*), ceil(u*)} per snapshot.

    Also reports the fraction of snapshots where the argmax is unique and
    equal to nint(u*), the density-one diagnostic; the geometric snapshot
    grid samples n non-uniformly, so this fraction is a heuristic proxy for
    the asymptotic density.
    """
    chi1 = chi_source.chi(1)
    series = []
    n_pass = n_tot = n_nint = 0
    for snap in run.snapshots:
        stats = _sim.mode_width(snap)
        u_star = predicted_mode_location(model, snap.w_n, chi1)
        stats.u_star = u_star
        stats.theta_n = abs(u_star - _nint(u_star))
        ok = stats.u_n in (math.floor(u_star), math.ceil(u_star))
        nint_ok = (not stats.tie) and stats.u_n == _nint(u_star)
        counted = snap.n >= n_min
        if counted:
            n_tot += 1
            n_pass += ok
            n_nint += nint_ok
        series.append(
            {
                "n": snap.n,
                "statistic": stats.u_n,
                "prediction": u_star,
                "ok": ok,
                "tie": stats.tie,
                "nint_ok": nint_ok,
                "counted": counted,
            }
        )
    pass_fraction = n_pass / n_tot if n_tot else math.nan
    nint_fraction = n_nint / n_tot if n_tot else math.nan
    return TheoremReport(
        theorem="mode",
        metadata={
            "model": model.name,
            "seed": run.seed,
            "n_min": n_min,
            "chi1_hat": chi1,
            "snapshots_counted": n_tot,
        },
        series=series,
        predicted={"pass_fraction": 1.0, "nint_density": 1.0},
        checks={
            "fail_fraction": 1.0 - pass_fraction if n_tot else math.inf,
            "nint_miss_fraction": 1.0 - nint_fraction if n_tot else math.inf,
        },
        fixture_prefix=f"mode.{_slug(model.name)}.s{run.seed}",
    )


def width_check(
    run: _sim.RunTrace,
    model: ModelSpec,
    chi_source: LimitEstimate,
) -> TheoremReport:
    """First- and second-order width checks.

    First order: sqrt(2 pi w) sigma(0) M_n / (m(0) n) -> 1.  Second order:
    the rescaled deficiency M~_n minus theta_n^2 approaches
    chi_2(0) + kappa_3^2/(6 sigma^4) - kappa_4/(4 sigma^2); the set of
    subsequential limits of M~_n itself is the interval [limit, limit+1/4].
    """
    chi1, chi2 = chi_source.chi(1), chi_source.chi(2)
    m0 = float(model.m0)
    sigma2 = _models.phi_deriv(model, 2, 0.0)
    sigma = math.sqrt(sigma2)
    k3 = _models.phi_deriv(model, 3, 0.0)
    k4 = _models.phi_deriv(model, 4, 0.0)
    limit = chi2 + k3**2 / (6.0 * sigma2**2) - k4 / (4.0 * sigma2)
    series = []
    for snap in run.snapshots:
        w = snap.w_n
        stats = _sim.mode_width(snap)
        first_order = math.sqrt(2.0 * math.pi * w) * sigma * stats.M_n / (m0 * snap.n)
        m_tilde = 2.0 * sigma2 * w * (1.0 - first_order)
        u_star = predicted_mode_location(model, w, chi1)
        theta = abs(u_star - _nint(u_star))
        stats.u_star, stats.theta_n, stats.m_tilde = u_star, theta, m_tilde
        series.append(
            {
                "n": snap.n,
                "statistic": m_tilde - theta**2,
                "prediction": limit,
                "first_order": first_order,
                "theta": theta,
                "m_tilde": m_tilde,
            }
        )
    final = series[-1]
    return TheoremReport(
        theorem="width",
        metadata={
            "model": model.name,
            "seed": run.seed,
            "chi1_hat": chi1,
            "chi2_hat": chi2,
        },
        series=series,
        predicted={
            "limit": limit,
            "interval_lo": limit,
            "interval_hi": limit + 0.25,
        },
        checks={
            "first_order_abs_dev": abs(final["first_order"] - 1.0),
            "mtilde_abs_gap": abs(final["statistic"] - limit),
        },
        fixture_prefix=f"width.{_slug(model.name)}.s{run.seed}",
    )


# ---------------------------------------------------------------------------
# Occupation-number harnesses


def occupation_check(
    runs: Sequence[_sim.RunTrace],
    model: ModelSpec,
    case: str,
    *,
    beta: float = 0.0,
    alpha: float = 0.0,
    a_offset: int = 0,
    c_rule: Callable[[int], float] | None = None,
    normalization: str = "saddle",
    n_min: int = 1,
) -> TheoremReport:
    """Occupation-number limit theorems over a replicate ensemble.

    case "uncentered": L_n(k_n) along k_n = phi'(beta) w + alpha sigma sqrt(w),
    any admissible beta; limit W(beta) e^{-alpha^2/2} / (sqrt(2 pi) sigma(beta))
    under the fixed-beta normalization, W(beta) / (sqrt(2 pi) sigma(beta))
    under the saddle normalization (which absorbs the Gaussian factor).

    Centered cases (deterministic offspring only; the mean expansion at
    r = 2 provides the centering):
    case "a": k_n as above at the center tilt; limit proportional to
    chi_1 - E chi_1.  case "b": k_n = phi'(0) w + c_n with |c_n| -> inf,
    c_n = o(w).  case "c": k_n = floor(phi'(beta) w) + a_offset, bounded
    c_n; the limit is the centered random variable R(c_n), and the
    subsequential family {R(a-z), z in [0,1]} is reported.  beta other than
    0 in cases "a"/"c" covers profiles around a second degenerate tilt
    (binary search trees at -log 2).
    """
    if len(runs) < 1:
        raise ValueError("need at least one run")
    if case not in ("uncentered", "a", "b", "c"):
        raise ValueError(f"unknown case {case!r}")
    if case != "uncentered" and not model.deterministic_offspring:
        raise ValueError("centered occupation cases require deterministic offspring")
    snaps_n = [s.n for s in runs[0].snapshots if s.n >= n_min]
    estimates = [estimate_chi(run, model, beta, J=2) for run in runs]

    if case == "uncentered":
        series, checks, predicted = _occupation_uncentered(
            runs, model, estimates, snaps_n, beta, alpha, normalization
        )
    else:
        series, checks, predicted = _occupation_centered(
            runs, model, estimates, snaps_n, case, beta, alpha, a_offset, c_rule
        )
    return TheoremReport(
        theorem=f"occupation-{case[0]}" if case != "uncentered" else "occupation-u",
        metadata={
            "model": model.name,
            "seed": runs[0].seed,
            "replicates": len(runs),
            "case": case,
            "beta": beta,
            "alpha": alpha,
            "a_offset": a_offset,
            "normalization": normalization,
        },
        series=series,
        predicted=predicted,
        checks=checks,
        fixture_prefix=(
            f"occupation.{case}.{_slug(model.name)}.s{runs[0].seed}.b{_slug(beta)}"
        ),
    )


def _occupation_uncentered(runs, model, estimates, snaps_n, beta, alpha, normalization):
    sigma = math.sqrt(_models.phi_deriv(model, 2, beta))
    mu = _models.phi_deriv(model, 1, beta)
    phi = _models.phi_value(model, beta)
    gauss = math.exp(-0.5 * alpha * alpha)
    targets = np.array(
        [
            est.w_hat / (SQRT_TWO_PI * sigma) * (gauss if normalization == "fixed" else 1.0)
            for est in estimates
        ]
    )
    series = []
    for n in snaps_n:
        w = math.log(n)
        k = round(mu * w + alpha * sigma * math.sqrt(w))
        if normalization == "saddle":
            bn = _models.saddle_beta(model, k, w)
            log_norm = bn * k - _models.phi_value(model, bn) * w
        elif normalization == "fixed":
            log_norm = beta * k - phi * w
        else:
            raise ValueError(f"unknown normalization {normalization!r}")
        stats = np.array(
            [
                math.sqrt(w) * run.snapshot_at(n).count_at(k) * math.exp(log_norm)
                for run in runs
            ]
        )
        rel = stats / targets - 1.0
        series.append(
            {
                "n": n,
                "k": k,
                "statistic": float(stats.mean()),
                "prediction": float(targets.mean()),
                "rel_gap": float(stats.mean() / targets.mean() - 1.0),
                "abs_rel_gap": float(np.abs(rel).mean()),
            }
        )
    final, first = series[-1], series[0]
    checks = {
        "final_abs_rel_gap": final["abs_rel_gap"],
        "gap_ratio_last_first": (
            final["abs_rel_gap"] / first["abs_rel_gap"] if first["abs_rel_gap"] else math.inf
        ),
    }
    predicted = {"limit_mean": float(targets.mean())}
    return series, checks, predicted


def _occupation_centered(runs, model, estimates, snaps_n, case, beta, alpha, a_offset, c_rule):
    sigma2 = _models.phi_deriv(model, 2, beta)
    sigma = math.sqrt(sigma2)
    mu = _models.phi_deriv(model, 1, beta)
    phi = _models.phi_value(model, beta)
    m0 = float(model.m0)
    k3 = _models.phi_deriv(model, 3, beta)
    chi1 = np.array([est.chi(1) for est in estimates])
    chi2 = np.array([est.chi(2) for est in estimates])
    w_bar = float(np.mean([est.w_hat for est in estimates]))
    chi1_centered = chi1 - chi1.mean()

    if case == "b":
        if c_rule is None:
            raise ValueError("case (b) requires a c_rule")
        cs = [c_rule(n) for n in snaps_n]
        if len(cs) >= 2 and (abs(cs[-1]) <= abs(cs[0])):
            raise ValueError("case (b) requires |c_n| -> infinity")
        if any(
            abs(c2) / math.log(n2) >= abs(c1) / math.log(n1)
            for (n1, c1), (n2, c2) in zip(
                zip(snaps_n, cs), list(zip(snaps_n, cs))[1:]
            )
        ):
            raise ValueError("case (b) requires c_n = o(log n)")
    if case == "c" and c_rule is not None:
        cs = [c_rule(n) for n in snaps_n]
        if len(cs) >= 2 and abs(cs[-1]) > abs(cs[0]) + 1.0:
            raise ValueError("case (c) requires bounded c_n")

    series = []
    for n in snaps_n:
        w = math.log(n)
        if case == "a":
            k = round(mu * w + alpha * sigma * math.sqrt(w))
            c_n = k - mu * w
        elif case == "b":
            c_n = float(c_rule(n))
            k = round(mu * w + c_n)
        else:
            c_n = (a_offset - (mu * w - math.floor(mu * w))) if c_rule is None else float(
                c_rule(n)
            )
            k = math.floor(mu * w) + a_offset if c_rule is None else round(mu * w + c_n)

        if case == "b":
            bn = _models.saddle_beta(model, k, w)
            log_norm = bn * k - _models.phi_value(model, bn) * w
            centering = mean_expansion_value(model, 2, bn, n, k)
            scale = w**1.5 / c_n
        else:
            log_norm = beta * k - phi * w
            centering = mean_expansion_value(model, 2, beta, n, k)
            scale = w if case == "a" else w**1.5
        stats = np.array(
            [
                scale * (run.snapshot_at(n).count_at(k) * math.exp(log_norm) - centering)
                for run in runs
            ]
        )
        if case == "a":
            x_lim = alpha
            preds = (
                m0
                * x_lim
                * math.exp(-0.5 * x_lim * x_lim)
                / (SQRT_TWO_PI * sigma2)
                * chi1_centered
            )
        elif case == "b":
            preds = m0 * chi1_centered / (SQRT_TWO_PI * sigma**3)
        else:
            r_vals = (
                w_bar
                / (SQRT_TWO_PI * sigma**3)
                * (chi1 * (c_n + k3 / (2.0 * sigma2)) - 0.5 * (chi1**2 + chi2))
            )
            preds = r_vals - r_vals.mean()
        resid = stats - preds
        series.append(
            {
                "n": n,
                "k": k,
                "c_n": c_n,
                "statistic": float(np.sqrt((stats**2).mean())),
                "prediction": float(np.sqrt((preds**2).mean())),
                "rms_residual": float(np.sqrt((resid**2).mean())),
                "corr": _safe_corr(stats, preds),
            }
        )
    final, first = series[-1], series[0]
    checks = {
        "final_rms_residual": final["rms_residual"],
        "residual_ratio_last_first": (
            final["rms_residual"] / first["rms_residual"] if first["rms_residual"] else math.inf
        ),
    }
    predicted = {}
    if case == "c":
        # Per replicate, the subsequential-limit family over z in [0, 1] is
        # the segment between the centered R at c = a-1 and at c = a; its
        # span is |chi_1 - mean chi_1| scaled by the R prefactor.
        slope = w_bar / (SQRT_TWO_PI * sigma**3) * chi1_centered
        predicted["family_c_lo"] = a_offset - 1.0
        predicted["family_c_hi"] = float(a_offset)
        predicted["family_span_rms"] = float(np.sqrt((slope**2).mean()))
    return series, checks, predicted


def _safe_corr(a: np.ndarray, b: np.ndarray) -> float:
    if len(a) < 2 or a.std() == 0 or b.std() == 0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


# ---------------------------------------------------------------------------
# Mean-profile expansion


def mean_expansion_value(model: ModelSpec, r: int, beta: float, n: int, k) -> float:
    """Order-r expansion of the mean profile: approximates
    e^{beta k - phi(beta) log n} E L_n(k) using the deterministic analogue
    of the random cumulants (log-derivatives of E W_infty) and
    W = lim E W_n(beta).  Deterministic offspring counts only.
    """
    chi_t = _models.mean_chi_set(model, beta, r)
    c = _models.cumulants(model, beta, kmax=r + 2, chi=chi_t)
    W = _models.limit_mean_W(model, beta)
    return expansion_value(r, c, W, math.log(n), k)


def mean_profile_check(
    runs: Sequence[_sim.RunTrace],
    model: ModelSpec,
    r: int,
    beta: float,
    k_rule: Callable[[int], int] | None = None,
) -> TheoremReport:
    """Replicate-mean of the tilted profile against the mean expansion.

    By default the level is the integer nearest to the tilted drift
    phi'(beta) log n.
    """
    phi = _models.phi_value(model, beta)
    mu = _models.phi_deriv(model, 1, beta)
    series = []
    for idx, snap0 in enumerate(runs[0].snapshots):
        n = snap0.n
        w = snap0.w_n
        k = k_rule(n) if k_rule is not None else round(mu * w)
        vals = np.array(
            [
                run.snapshots[idx].count_at(k) * math.exp(beta * k - phi * w)
                for run in runs
            ]
        )
        pred = mean_expansion_value(model, r, beta, n, k)
        stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.nan
        series.append(
            {
                "n": n,
                "k": k,
                "statistic": float(vals.mean()),
                "prediction": pred,
                "stderr": stderr,
                "rel_gap": float(vals.mean() / pred - 1.0) if pred else math.nan,
                "zscore": float((vals.mean() - pred) / stderr) if stderr else math.nan,
            }
        )
    final = series[-1]
    return TheoremReport(
        theorem="mean",
        metadata={
            "model": model.name,
            "seed": runs[0].seed,
            "replicates": len(runs),
            "r": r,
            "beta": beta,
        },
        series=series,
        predicted={"final_prediction": final["prediction"]},
        checks={
            "final_abs_rel_gap": abs(final["rel_gap"]),
            "final_abs_zscore": abs(final["zscore"]),
        },
        fixture_prefix=f"mean.{_slug(model.name)}.s{runs[0].seed}.r{r}.b{_slug(beta)}",
    )


# ---------------------------------------------------------------------------
# Classical i.i.d. lattice Edgeworth expansion with exact convolution oracle


def pmf_cumulants(pmf: dict, order: int) -> list:
    """Exact cumulants kappa_1..kappa_order of a finite integer pmf.

    Rational probabilities give exact rational cumulants.
    """
    items = sorted(pmf.items())
    mean = sum(k * p for k, p in items)
    central = [sum(p * (k - mean) ** j for k, p in items) for j in range(2, order + 1)]
    from .estimators import moments_to_cumulants

    return moments_to_cumulants(central, mean)


def check_minimal_lattice(pmf: dict):
    ks = sorted(pmf)
    if len(ks) < 2:
        raise ValueError("pmf must have at least two support points (variance > 0)")
    g = 0
    for k in ks[1:]:
        g = math.gcd(g, k - ks[0])
    if g >= 2:
        b = ks[0] % g
        raise ValueError(
            f"support lies in the sublattice {g}Z + {b}: rescale via k -> (k - {b}) / {g}"
        )


def classical_edgeworth_check(pmf: dict, n_list: Sequence[int], r: int) -> TheoremReport:
    """Compare the order-r lattice Edgeworth expansion to exact convolutions.

    `pmf` maps integer support points to probabilities (Fractions keep the
    cumulants exact); the exact law of the n-fold sum comes from iterated
    convolution.  Reports E_j(n) = n^{(j+1)/2} sup_k |exact - expansion_j|
    for all j <= r; the expansion uses only the pmf cumulants (the
    chi-corrections of the random theory all vanish here).
    """
    pmf = {int(k): _models._as_fraction(p) for k, p in pmf.items()}
    total = sum(pmf.values())
    if total != 1:
        raise ValueError(f"pmf must sum to 1, got {total}")
    if any(p <= 0 for p in pmf.values()):
        raise ValueError("pmf values must be positive")
    check_minimal_lattice(pmf)
    n_list = sorted(int(n) for n in n_list)
    if n_list[0] < 1 or n_list[-1] > 4096:
        raise ValueError("n must lie in [1, 4096]")
    if r > 4:
        raise ValueError("r <= 4 supported")

    kappa = [Fraction(0)] + pmf_cumulants(pmf, r + 2)
    c = CumulantSet.build(
        beta=0.0, kappa=[float(v) for v in kappa], chi=(0.0,) * (r + 1)
    )
    terms_by_order = [edgeworth_terms(j, c) for j in range(r + 1)]
    mu, sigma = float(kappa[1]), math.sqrt(float(kappa[2]))

    ks = sorted(pmf)
    base = np.zeros(ks[-1] - ks[0] + 1)
    for k, p in pmf.items():
        base[k - ks[0]] = float(p)
    series = []
    current = base.copy()
    steps = 1
    mass_errors = []
    for n in n_list:
        while steps < n:
            current = np.convolve(current, base)
            steps += 1
        offset = n * ks[0]
        support = np.arange(offset, offset + len(current))
        pad = int(math.ceil(10 * sigma * math.sqrt(n)))
        k_all = np.arange(support[0] - pad, support[-1] + pad + 1)
        exact = np.zeros(len(k_all))
        exact[pad : pad + len(current)] = current
        mass_errors.append(abs(float(current.sum()) - 1.0))
        row = {"n": n}
        for j in range(r + 1):
            approx = expansion_value(j, c, 1.0, float(n), k_all, terms=terms_by_order[j])
            e_j = n ** ((j + 1) / 2.0) * float(np.abs(exact - approx).max())
            row[f"E{j}"] = e_j
        row["statistic"] = row[f"E{r}"]
        row["prediction"] = 0.0
        series.append(row)
    checks = {"max_mass_error": max(mass_errors)}
    for j in range(r + 1):
        first, last = series[0][f"E{j}"], series[-1][f"E{j}"]
        checks[f"E{j}_final"] = last
        checks[f"E{j}_ratio_last_first"] = last / first if first else math.inf
    return TheoremReport(
        theorem="classical",
        metadata={
            "pmf": {str(k): str(v) for k, v in pmf.items()},
            "n_list": n_list,
            "r": r,
            "kappa": [float(v) for v in kappa[1:]],
        },
        series=series,
        predicted={"limit": 0.0},
        checks=checks,
        fixture_prefix=f"classical.r{r}",
    )
