"""Estimation of the limit objects W_infty(beta) and chi_j(beta) from runs.

The log-derivative limits are estimated analytically from tilted profile
moments (exact given a snapshot), never by numerical differentiation in
beta.  Replicate ensembles provide means and standard errors; `trend`
summarizes finite-n series for the almost-sure limit checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb
from typing import Callable, Sequence

import numpy as np

from . import models as _models
from . import simulator as _sim
from .models import ModelSpec

_MAX_ORDER = 8


@dataclass(frozen=True)
class LimitEstimate:
    """Point estimate of (W_infty(beta), chi_1..chi_J(beta)) from one run."""

    beta: float
    w_hat: float
    chi_hat: tuple
    n_used: int
    stderr: tuple | None = None

    def chi(self, j: int) -> float:
        if j < 1 or j > len(self.chi_hat):
            raise ValueError(f"chi_{j} not estimated (have 1..{len(self.chi_hat)})")
        return self.chi_hat[j - 1]

    def chi_with_log_w(self) -> tuple:
        """(chi_0, chi_1, ...) with chi_0 = log W-hat, as a CumulantSet wants."""
        return (math.log(self.w_hat),) + tuple(self.chi_hat)

    def to_json(self) -> dict:
        out = {
            "beta": self.beta,
            "W_hat": self.w_hat,
            "chi_hat": list(self.chi_hat),
            "n_used": self.n_used,
        }
        if self.stderr is not None:
            out["stderr"] = list(self.stderr)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "LimitEstimate":
        return cls(
            beta=float(obj["beta"]),
            w_hat=float(obj["W_hat"]),
            chi_hat=tuple(obj["chi_hat"]),
            n_used=int(obj["n_used"]),
            stderr=tuple(obj["stderr"]) if obj.get("stderr") is not None else None,
        )


def moments_to_cumulants(central_moments: Sequence, mean) -> list:
    """Cumulants chi_1..chi_J from the mean and central moments m_2..m_J.

    chi_1 = mean, chi_2 = m_2, chi_3 = m_3, chi_4 = m_4 - 3 m_2^2, higher
    orders by the standard recursion; exact over rationals.  J <= 8.
    """
    J = len(central_moments) + 1
    if J > _MAX_ORDER:
        raise ValueError(f"unsupported order {J} > {_MAX_ORDER}")
    m = [1, 0] + list(central_moments)  # m[i] = i-th central moment
    chi = [None, mean]  # chi[j] = j-th cumulant, order >= 2 computed below
    for n in range(2, J + 1):
        acc = m[n]
        for k in range(2, n):
            acc = acc - comb(n - 1, k - 1) * chi[k] * m[n - k]
        chi.append(acc)
    return chi[1:]


def cumulants_to_moments(chi: Sequence) -> list:
    """Inverse of `moments_to_cumulants`: central moments m_2..m_J from
    cumulants chi_1..chi_J (chi_1 does not influence central moments)."""
    J = len(chi)
    if J > _MAX_ORDER:
        raise ValueError(f"unsupported order {J} > {_MAX_ORDER}")
    kappa = [None] + list(chi)
    m = [1, 0]  # central moments of the centered variable
    for n in range(2, J + 1):
        acc = 0
        for k in range(2, n + 1):
            acc = acc + comb(n - 1, k - 1) * kappa[k] * m[n - k]
        m.append(acc)
    return m[2:]


def estimate_chi(
    run: _sim.RunTrace,
    model: ModelSpec,
    beta: float,
    J: int,
    snapshot: _sim.ProfileSnapshot | None = None,
    richardson: bool = False,
) -> LimitEstimate:
    """chi-hat_j = (tilted cumulant at beta) - phi^(j)(beta) log n and
    W-hat = W_n(beta), both at the largest snapshot by default.

    `richardson=True` averages the last two snapshots instead (off by
    default: the limit is approached faster than any power of 1/log n, so
    no extrapolation model is canonical).
    """
    snaps = [snapshot] if snapshot is not None else [run.final]
    if richardson and snapshot is None and len(run.snapshots) >= 2:
        snaps = [run.snapshots[-2], run.final]
    lo, hi = model.beta_range()
    if not (lo < beta < hi):
        warnings.warn(
            f"beta = {beta} outside ({lo:.6g}, {hi:.6g}): W_n may vanish or oscillate",
            stacklevel=2,
        )
    estimates = []
    for snap in snaps:
        w = snap.w_n
        tilted = _sim.tilted_cumulants(snap, beta, J)
        chi_hat = tuple(
            tilted[j - 1] - _models.phi_deriv(model, j, beta) * w for j in range(1, J + 1)
        )
        estimates.append((_sim.laplace_W(snap, model, beta), chi_hat))
    w_hat = sum(e[0] for e in estimates) / len(estimates)
    chi_hat = tuple(
        sum(e[1][i] for e in estimates) / len(estimates) for i in range(J)
    )
    return LimitEstimate(beta=beta, w_hat=w_hat, chi_hat=chi_hat, n_used=snaps[-1].n)


class ChiCurve:
    """chi-hat and W-hat as smooth functions of beta, estimated from one run.

    Built on a fixed beta grid with cubic interpolation; `exact=True`
    bypasses interpolation and evaluates the tilted cumulants at each
    requested beta directly (slower, no interpolation error).
    """

    def __init__(
        self,
        run: _sim.RunTrace,
        model: ModelSpec,
        beta_grid: Sequence[float],
        J: int,
        exact: bool = False,
    ):
        from scipy.interpolate import CubicSpline

        self.run = run
        self.model = model
        self.J = J
        self.exact = exact
        self.beta_grid = np.asarray(sorted(beta_grid), dtype=float)
        if not exact:
            if len(self.beta_grid) < 4:
                raise ValueError("need >= 4 grid points for cubic interpolation")
            w_vals, chi_vals = [], []
            for b in self.beta_grid:
                est = estimate_chi(run, model, float(b), J)
                w_vals.append(est.w_hat)
                chi_vals.append(est.chi_hat)
            chi_vals = np.asarray(chi_vals)
            self._w_spline = CubicSpline(self.beta_grid, np.asarray(w_vals))
            self._chi_splines = [CubicSpline(self.beta_grid, chi_vals[:, i]) for i in range(J)]

    def w(self, beta: float) -> float:
        if self.exact:
            return _sim.laplace_W(self.run.final, self.model, beta)
        return float(self._w_spline(beta))

    def chi(self, beta: float) -> tuple:
        if self.exact:
            return estimate_chi(self.run, self.model, beta, self.J).chi_hat
        return tuple(float(s(beta)) for s in self._chi_splines)


def replicate_moments(
    runs: Sequence[_sim.RunTrace],
    model: ModelSpec,
    beta: float,
    statistic: str | Callable = "W",
) -> list:
    """Per-snapshot replicate mean and standard error of a statistic.

    `statistic` is "W" (normalized Laplace transform), "J" (mean-one
    martingale), or a callable (snapshot, model, beta) -> float.  All runs
    must share the snapshot schedule.
    """
    if len(runs) < 2:
        raise ValueError("need >= 2 replicate runs")
    schedules = {tuple(s.n for s in run.snapshots) for run in runs}
    if len(schedules) != 1:
        raise ValueError("replicate runs have mismatched snapshot schedules")
    if statistic == "W":
        fn = _sim.laplace_W
    elif statistic == "J":
        fn = _sim.jabbour_J
    elif callable(statistic):
        fn = statistic
    else:
        raise ValueError(f"unknown statistic {statistic!r}")
    out = []
    n_steps = schedules.pop()
    for idx, n in enumerate(n_steps):
        vals = np.array([fn(run.snapshots[idx], model, beta) for run in runs])
        mean = float(vals.mean())
        stderr = float(vals.std(ddof=1) / math.sqrt(len(vals)))
        out.append({"n": n, "mean": mean, "stderr": stderr})
    return out


def trend(series: Sequence) -> dict:
    """Finite-n trend summary of a series of (n, value) pairs.

    monotone_fraction: largest fraction of consecutive steps moving in one
    direction (1.0 for a strictly monotone series).  last_over_first_ratio:
    value[-1] / value[0] (inf when value[0] == 0 != value[-1], 1.0 when both
    vanish).
    """
    pts = list(series)
    if len(pts) < 3:
        raise ValueError("trend needs >= 3 points")
    values = [float(v) for _, v in pts]
    downs = sum(1 for a, b in zip(values, values[1:]) if b < a)
    ups = sum(1 for a, b in zip(values, values[1:]) if b > a)
    steps = len(values) - 1
    if values[0] != 0:
        ratio = values[-1] / values[0]
    else:
        ratio = 1.0 if values[-1] == 0 else math.inf
    return {
        "monotone_fraction": max(downs, ups) / steps,
        "last_over_first_ratio": ratio,
    }
