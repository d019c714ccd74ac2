"""One-split branching random walk model catalog.

A model is a finite cluster law (the offspring displacement point process)
plus derived analytic machinery: the tilted intensity mass m(beta), its
normalization phi = m / m(0) and derivatives, the admissible tilt interval,
saddle points, the product normalizer of the mean martingale, and the exact
and limiting mean of the normalized Laplace transform.

Cluster laws are restricted to finitely many atoms with finite support;
every catalog model is of this form and the moment assumptions then hold
automatically.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lgamma
from typing import Mapping, Sequence

import numpy as np
from scipy.special import polygamma

from .algebra import bell_partial
from .expansion import CumulantSet

_OVERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class ClusterLaw:
    """Finite offspring point process: atoms are (displacement multiset, prob)."""

    atoms: tuple

    def __init__(self, atoms: Sequence):
        norm = []
        total = Fraction(0)
        for offsets, prob in atoms:
            offsets = tuple(int(z) for z in offsets)
            if len(offsets) == 0:
                raise ValueError("every cluster atom must contain at least one particle")
            prob = _as_fraction(prob)
            if prob <= 0:
                raise ValueError(f"atom probability must be positive, got {prob}")
            norm.append((tuple(sorted(offsets)), prob))
            total += prob
        if total != 1:
            raise ValueError(f"atom probabilities must sum to 1, got {total}")
        object.__setattr__(self, "atoms", tuple(norm))

    @property
    def intensity(self) -> dict:
        """nu_k = expected number of offspring at displacement k."""
        nu: dict = {}
        for offsets, prob in self.atoms:
            for z in offsets:
                nu[z] = nu.get(z, Fraction(0)) + prob
        return dict(sorted(nu.items()))

    @property
    def mean_offspring(self) -> Fraction:
        return sum(prob * len(offsets) for offsets, prob in self.atoms)

    @property
    def deterministic_offspring(self) -> bool:
        sizes = {len(offsets) for offsets, _ in self.atoms}
        return len(sizes) == 1

    @property
    def support(self) -> tuple:
        return tuple(sorted(self.intensity))


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    if isinstance(p, str):
        return Fraction(p)
    if isinstance(p, float):
        return Fraction(p).limit_denominator(10**12)
    raise TypeError(f"cannot interpret probability {p!r}")


@dataclass
class ModelSpec:
    """A named one-split BRW model."""

    name: str
    cluster: ClusterLaw
    initial_position: int = 0
    _beta_range: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.m0 <= 0:
            raise ValueError(f"model must be supercritical: m(0) = {self.m0} <= 0")

    @property
    def m0(self) -> Fraction:
        return self.cluster.mean_offspring - 1

    @property
    def deterministic_offspring(self) -> bool:
        return self.cluster.deterministic_offspring

    @property
    def position_shift(self) -> bool:
        """True when the walk starts away from the origin (PORT-style models);
        the Laplace limit then carries an extra factor e^{beta * start}."""
        return self.initial_position != 0

    def beta_range(self) -> tuple:
        if self._beta_range is None:
            self._beta_range = beta_range(self)
        return self._beta_range


def m_value(model: ModelSpec, beta):
    """m(beta) = sum_k nu_k e^{beta k} - 1; exact finite sum, accepts complex."""
    exp = cmath.exp if isinstance(beta, complex) else math.exp
    return sum(float(nu) * exp(beta * k) for k, nu in model.cluster.intensity.items()) - 1.0


def m_deriv(model: ModelSpec, j: int, beta):
    if j == 0:
        return m_value(model, beta)
    exp = cmath.exp if isinstance(beta, complex) else math.exp
    return sum(float(nu) * k**j * exp(beta * k) for k, nu in model.cluster.intensity.items())


def phi_value(model: ModelSpec, beta):
    return m_value(model, beta) / float(model.m0)


def phi_deriv(model: ModelSpec, j: int, beta):
    """phi^(j)(beta); the deterministic cumulant of order j at tilt beta."""
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if j == 0:
        return phi_value(model, beta)
    return m_deriv(model, j, beta) / float(model.m0)


def cumulants(model: ModelSpec, beta: float, kmax: int, chi: Sequence = ()) -> CumulantSet:
    """CumulantSet at tilt beta with kappa up to order kmax from the model."""
    kappa = [phi_deriv(model, j, beta) for j in range(kmax + 1)]
    return CumulantSet.build(beta=beta, kappa=kappa, chi=tuple(chi))


def _g(model: ModelSpec, beta: float) -> float:
    """g(beta) = phi'(beta) beta - phi(beta); negative strictly inside the
    admissible interval, zero at its finite endpoints."""
    return phi_deriv(model, 1, beta) * beta - phi_value(model, beta)


def beta_range(model: ModelSpec) -> tuple:
    """Maximal open interval around 0 where phi'(beta) beta < phi(beta).

    Bracket expansion by factor 2 from beta = +-1 followed by bisection to
    1e-12; an endpoint is reported as +-inf when no sign change occurs
    before the overflow guard 700 / max|k|.
    """
    max_k = max((abs(k) for k in model.cluster.support), default=1)
    bound = _OVERFLOW_EXPONENT / max(1, max_k)

    def solve(direction: int) -> float:
        lo, hi = 0.0, direction * 1.0
        while abs(hi) <= bound:
            if _g(model, hi) >= 0:
                break
            lo, hi = hi, hi * 2.0
        else:
            return math.inf * direction
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _g(model, mid) < 0:
                lo = mid
            else:
                hi = mid
            if abs(hi - lo) < 1e-12:
                break
        return 0.5 * (lo + hi)

    return (solve(-1), solve(+1))


def _phi_prime_limits(model: ModelSpec) -> tuple:
    """Range of phi' over the admissible tilt interval."""
    lo, hi = model.beta_range()
    support = model.cluster.support
    if math.isinf(lo):
        low = -math.inf if min(support) < 0 else 0.0
    else:
        low = phi_deriv(model, 1, lo)
    if math.isinf(hi):
        high = math.inf if max(support) > 0 else 0.0
    else:
        high = phi_deriv(model, 1, hi)
    return low, high


def saddle_beta(model: ModelSpec, k: int, w_n: float, rtol: float = 1e-12) -> float:
    """Solve phi'(beta) = k / w_n inside the admissible tilt interval.

    Newton iteration (phi'' > 0 so phi' is strictly increasing) with a
    bisection fallback; converges to |phi'(beta) - k/w_n| <= rtol * max(1, k/w_n).
    """
    if not w_n > 0:
        raise ValueError("w_n must be positive")
    target = k / w_n
    low, high = _phi_prime_limits(model)
    if not (low < target < high):
        raise ValueError(
            f"outside admissible cone: k/w_n = {target} not in phi'(({low}, {high}))"
        )
    tol = rtol * max(1.0, abs(target))
    beta = 0.0
    try:
        for _ in range(100):
            err = phi_deriv(model, 1, beta) - target
            if abs(err) <= tol:
                return beta
            step = err / phi_deriv(model, 2, beta)
            beta -= step
            if not math.isfinite(beta):
                break
    except OverflowError:
        pass
    # Newton failed to settle; bracket and bisect.
    lo, hi = -1.0, 1.0
    while phi_deriv(model, 1, lo) > target:
        lo *= 2.0
    while phi_deriv(model, 1, hi) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi_deriv(model, 1, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _require_deterministic(model: ModelSpec):
    if not model.deterministic_offspring:
        raise ValueError("Jabbour martingale undefined: offspring count is random")


def log_jabbour_normalizer(model: ModelSpec, n: int, beta) -> float:
    _require_deterministic(model)
    if n == 0:
        return 0.0
    m = m_value(model, beta)
    m0 = float(model.m0)
    ks = np.arange(n, dtype=float)
    return math.fsum(np.log1p(m / (1.0 + m0 * ks)))


def jabbour_normalizer(model: ModelSpec, n: int, beta) -> float:
    """alpha_n(beta) = prod_{k<n} (1 + m(beta) / (1 + m(0) k)), in log space."""
    return math.exp(log_jabbour_normalizer(model, n, beta))


# Stirling-series coefficients B_{2k} / (2k (2k-1)).
_STIRLING_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
)


def _log_ratio_large_n(n: int, z: float, c0: float, phi: float) -> float:
    """-phi log n + lgamma(z + n) - lgamma(c0 + n), cancellation-free.

    The naive difference of two log-gammas of size n log n costs ~ ulp(n log n)
    of absolute error; expanding the Stirling series of the difference keeps
    every term O(1).  Requires c0 + n >= 10.  Note z - c0 = phi.
    """
    a, b = z + n, c0 + n
    d = phi
    total = phi * math.log1p(c0 / n) + (a - 0.5) * math.log1p(d / b) - d
    for k, coef in enumerate(_STIRLING_COEF, start=1):
        total += coef * (a ** (1 - 2 * k) - b ** (1 - 2 * k))
    return total


def exact_mean_W(model: ModelSpec, n: int, beta: float) -> float:
    """E W_n(beta) for deterministic offspring counts:
    n^{-m/m0} * rising(z, n) / rising(1/m0, n) with z = (m(beta)+1)/m0,
    evaluated via log-gamma differences; carries e^{beta * start} when the
    walk is initiated away from zero.
    """
    _require_deterministic(model)
    if n < 1:
        raise ValueError("n must be >= 1")
    m = m_value(model, beta)
    m0 = float(model.m0)
    phi = m / m0
    z = (m + 1.0) / m0
    c0 = 1.0 / m0
    if n >= 10:
        core = _log_ratio_large_n(n, z, c0, phi)
    else:
        core = -phi * math.log(n) + lgamma(z + n) - lgamma(c0 + n)
    log_val = core - lgamma(z) + lgamma(c0) + beta * model.initial_position
    return math.exp(log_val)


def limit_mean_W(model: ModelSpec, beta: float) -> float:
    """lim_n E W_n(beta) = Gamma(1/m0) / Gamma((m(beta)+1)/m0), with the
    initial-position factor e^{beta * start}."""
    _require_deterministic(model)
    lo, hi = model.beta_range()
    if not (lo < beta < hi):
        raise ValueError(f"beta = {beta} outside admissible interval ({lo}, {hi})")
    m = m_value(model, beta)
    m0 = float(model.m0)
    return math.exp(
        lgamma(1.0 / m0) - lgamma((m + 1.0) / m0) + beta * model.initial_position
    )


def mean_cumulant(model: ModelSpec, j: int, beta: float) -> float:
    """Cumulants of the mean martingale limit:
    chi~_j(beta) = (d/dbeta)^j log E W_infty(beta)
                 = [j == 1] * start - (d/dbeta)^j log Gamma((m(beta)+1)/m0),
    computed by Faa di Bruno over polygamma values at z = (m(beta)+1)/m0.
    """
    _require_deterministic(model)
    if j < 1:
        raise ValueError("cumulant order must be >= 1")
    m0 = float(model.m0)
    z = (m_value(model, beta) + 1.0) / m0
    # z^(i) = kappa_i since z = phi(beta) + 1/m0.
    zder = [phi_deriv(model, i, beta) for i in range(1, j + 1)]
    total = 0.0
    for kk in range(1, j + 1):
        total += float(polygamma(kk - 1, z)) * bell_partial(j, kk, zder)
    shift = model.initial_position if j == 1 else 0
    return shift - total


def mean_chi_set(model: ModelSpec, beta: float, J: int) -> tuple:
    """(chi~_0, ..., chi~_J) with chi~_0 = log E W_infty(beta)."""
    return (math.log(limit_mean_W(model, beta)),) + tuple(
        mean_cumulant(model, j, beta) for j in range(1, J + 1)
    )


@dataclass(frozen=True)
class AssumptionReport:
    """Pass/fail per model assumption; `details` carries one line each."""

    results: Mapping[str, bool | None]
    details: Mapping[str, str]

    @property
    def all_ok(self) -> bool:
        return all(v is not False for v in self.results.values())


def check_assumptions(model: ModelSpec) -> AssumptionReport:
    nu = model.cluster.intensity
    results: dict = {}
    details: dict = {}

    b1 = any(k != 0 and v > 0 for k, v in nu.items())
    results["B1"] = b1
    details["B1"] = (
        "nonzero displacement has positive intensity"
        if b1
        else "all offspring displacements are zero"
    )

    nonempty = all(len(offsets) >= 1 for offsets, _ in model.cluster.atoms)
    not_single = any(len(offsets) >= 2 for offsets, _ in model.cluster.atoms)
    results["B2"] = nonempty and not_single
    details["B2"] = (
        "cluster nonempty and supercritical"
        if results["B2"]
        else "cluster may die out or never branch"
    )

    results["B3"] = True
    details["B3"] = "finite support: tilted intensity finite for all beta"

    support = [k for k, v in nu.items() if v > 0]
    g = 0
    for k in support:
        g = gcd(g, abs(k))
    if support and g == 1:
        results["B4"] = True
        details["B4"] = "intensity support generates Z (gcd 1)"
    else:
        results["B4"] = False
        a_star = g if g > 1 else None
        details["B4"] = (
            f"intensity concentrated on {a_star}Z; rescale displacements by {a_star}"
            if a_star
            else "intensity support is trivial"
        )

    results["B5"] = True
    details["B5"] = "trivially satisfied: finitely many atoms with finite support"

    return AssumptionReport(results=results, details=details)


# ---------------------------------------------------------------------------
# Builtin catalog


def bst() -> ModelSpec:
    """Binary search tree external profile: two offspring, both one deeper."""
    return ModelSpec("bst", ClusterLaw([((1, 1), 1)]))


def rrt() -> ModelSpec:
    """Random recursive tree profile: parent stays, child one deeper."""
    return ModelSpec("rrt", ClusterLaw([((0, 1), 1)]))


def d_ary(D: int = 3) -> ModelSpec:
    """D-ary recursive tree external profile: D offspring one level deeper."""
    if D < 2:
        raise ValueError("D must be >= 2")
    return ModelSpec(f"d_ary:{D}", ClusterLaw([((1,) * D, 1)]))


def port() -> ModelSpec:
    """Plane-oriented recursive tree external profile, started at one."""
    return ModelSpec("port", ClusterLaw([((0, 0, 1), 1)]), initial_position=1)


def p_oriented(p: int = 3) -> ModelSpec:
    """p-oriented tree external profile, started at one; p = 2 is PORT."""
    if p < 2:
        raise ValueError("p must be >= 2")
    return ModelSpec(f"p_oriented:{p}", ClusterLaw([((0,) * p + (1,), 1)]), initial_position=1)


def vertical_bst() -> ModelSpec:
    """Vertically projected BST profile: offspring at abscissa -1 and +1."""
    return ModelSpec("vertical_bst", ClusterLaw([((-1, 1), 1)]))


def custom(atoms: Sequence, name: str = "custom", initial_position: int = 0) -> ModelSpec:
    return ModelSpec(name, ClusterLaw(atoms), initial_position=initial_position)


BUILTIN_MODELS = {
    "bst": bst,
    "rrt": rrt,
    "d_ary": d_ary,
    "port": port,
    "p_oriented": p_oriented,
    "vertical_bst": vertical_bst,
}


def get_model(name: str) -> ModelSpec:
    """Resolve 'bst', 'd_ary:4', 'p_oriented:5', ... to a ModelSpec."""
    base, _, arg = name.partition(":")
    if base not in BUILTIN_MODELS:
        raise KeyError(f"unknown model {name!r}; builtins: {', '.join(BUILTIN_MODELS)}")
    factory = BUILTIN_MODELS[base]
    if arg:
        return factory(int(arg))
    return factory()


def load_model_file(path) -> ModelSpec:
    """Model definition file: JSON with fields name, atoms
    (list of {"offsets": [ints], "prob": "p/q"}), initial_position."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    unknown = set(obj) - {"name", "atoms", "initial_position"}
    if unknown:
        raise ValueError(f"unknown keys in model file: {sorted(unknown)}")
    atoms = [(tuple(a["offsets"]), _as_fraction(a["prob"])) for a in obj["atoms"]]
    return custom(
        atoms, name=obj.get("name", "custom"), initial_position=int(obj.get("initial_position", 0))
    )


def save_model_file(model: ModelSpec, path):
    obj = {
        "name": model.name,
        "atoms": [
            {"offsets": list(offsets), "prob": str(prob)}
            for offsets, prob in model.cluster.atoms
        ],
        "initial_position": model.initial_position,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def describe(model: ModelSpec) -> dict:
    """Summary used by the CLI: drift, variance, skew/kurtosis cumulants,
    admissible tilt interval and assumption checks."""
    lo, hi = model.beta_range()
    report = check_assumptions(model)
    return {
        "name": model.name,
        "m0": float(model.m0),
        "phi1": phi_deriv(model, 1, 0.0),
        "sigma2": phi_deriv(model, 2, 0.0),
        "kappa3": phi_deriv(model, 3, 0.0),
        "kappa4": phi_deriv(model, 4, 0.0),
        "beta_minus": lo,
        "beta_plus": hi,
        "initial_position": model.initial_position,
        "deterministic_offspring": model.deterministic_offspring,
        "assumptions": {k: report.results[k] for k in sorted(report.results)},
    }
