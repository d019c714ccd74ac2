"""Edgeworth correction terms, expansion evaluators and the Fourier oracle.

The correction polynomial of order j is obtained by evaluating the j-th
complete Bell polynomial at differential operators built from cumulants,
conjugating with the Gaussian density (which turns each derivative order k
into (-1)^k He_k(x)) and scaling by (-1)^j / j!.  All identities hold
exactly, so every routine here works over `Fraction` scalars as well as
floats; the Fourier-inversion check is the numerical cross-validation of
the same algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .algebra import DiffOperator, Polynomial, bell_eval, hermite_poly

TWO_PI = 2.0 * math.pi


class InsufficientCumulantsError(ValueError):
    pass


@dataclass(frozen=True)
class CumulantSet:
    """Cumulant data of a tilted profile at a fixed tilt `beta`.

    kappa[j] holds the j-th deterministic cumulant (j-th derivative of the
    normalizing exponent) for 1 <= j <= len(kappa)-1; kappa[0] may carry the
    exponent value itself and is never used by the operator algebra.
    chi[j] holds the j-th random cumulant (j-th log-derivative of the limit
    W at beta); chi[0] = log W.  sigma is sqrt(kappa[2]) and is accepted
    explicitly so exact-rational work can supply a rational square root.
    """

    beta: object
    kappa: tuple
    chi: tuple
    sigma: object

    @classmethod
    def build(cls, beta, kappa: Sequence, chi: Sequence = (), sigma=None) -> "CumulantSet":
        kappa = tuple(kappa)
        chi = tuple(chi)
        if len(kappa) < 3:
            raise InsufficientCumulantsError(
                "insufficient cumulants: need kappa at least up to order 2"
            )
        k2 = kappa[2]
        if not k2 > 0:
            raise ValueError(f"kappa_2 must be positive, got {k2}")
        if sigma is None:
            sigma = math.sqrt(float(k2))
        else:
            if isinstance(sigma, Fraction) and isinstance(k2, (Fraction, int)):
                if sigma * sigma != k2:
                    raise ValueError("sigma**2 != kappa_2 in exact mode")
            elif abs(float(sigma) ** 2 - float(k2)) > 1e-9 * max(1.0, abs(float(k2))):
                raise ValueError("sigma**2 != kappa_2 beyond tolerance")
        return cls(beta=beta, kappa=kappa, chi=chi, sigma=sigma)

    @property
    def mu(self):
        return self.kappa_order(1)

    @property
    def sigma2(self):
        return self.kappa_order(2)

    def kappa_order(self, j: int):
        if j < 0 or j >= len(self.kappa):
            raise InsufficientCumulantsError(
                f"insufficient cumulants: kappa_{j} not available (have up to {len(self.kappa) - 1})"
            )
        return self.kappa[j]

    def chi_order(self, j: int):
        if j == 0 and not self.chi:
            return 0
        if j < 0 or j >= len(self.chi):
            raise InsufficientCumulantsError(
                f"insufficient cumulants: chi_{j} not available (have up to {len(self.chi) - 1})"
            )
        return self.chi[j]

    def with_chi(self, chi: Sequence) -> "CumulantSet":
        return CumulantSet(beta=self.beta, kappa=self.kappa, chi=tuple(chi), sigma=self.sigma)


@dataclass(frozen=True)
class ComplexSeriesTerm:
    """Order-k coefficient function a_k(s) of the tilted characteristic series."""

    order: int
    fn: Callable[[float], complex] = field(repr=False)

    def __call__(self, s):
        return self.fn(s)


def build_operators(c: CumulantSet, J: int) -> list[DiffOperator]:
    """Operators D_1..D_J: kappa_{j+2}/((j+1)(j+2) sigma^{j+2}) at order j+2
    plus chi_j / sigma^j at order j.  Both orders are always populated."""
    ops = []
    s = c.sigma
    for j in range(1, J + 1):
        top = c.kappa_order(j + 2)
        low = c.chi_order(j)
        ops.append(
            DiffOperator(
                {
                    j + 2: top * _inv((j + 1) * (j + 2)) * _inv_pow(s, j + 2),
                    j: low * _inv_pow(s, j),
                }
            )
        )
    return ops


def _inv(n: int):
    return Fraction(1, n)


def _inv_pow(s, p: int):
    if isinstance(s, Fraction):
        return Fraction(1, 1) / s**p
    return 1.0 / float(s) ** p


def _hermite_map(op: DiffOperator) -> Polynomial:
    """Map sum_k c_k (d/dx)^k acting on exp(-x^2/2) to the polynomial
    sum_k c_k (-1)^k He_k(x) (Gaussian conjugation)."""
    acc = Polynomial.zero()
    for k, coeff in op.coeffs.items():
        if coeff == 0:
            continue
        sign = 1 if k % 2 == 0 else -1
        acc = acc + (sign * coeff) * hermite_poly(k)
    return acc


def edgeworth_term(j: int, c: CumulantSet) -> Polynomial:
    """Correction polynomial G_j(x) of degree <= 3j.

    G_j = (-1)^j / j! * exp(x^2/2) B_j(D_1..D_j) exp(-x^2/2), with the
    operators of `build_operators`; G_j(-x) = (-1)^j G_j(x).
    """
    if j < 0:
        raise ValueError("expansion order must be nonnegative")
    if j == 0:
        return Polynomial.one()
    ops = build_operators(c, j)
    bell = bell_eval(ops, one=DiffOperator.identity())
    poly = _hermite_map(bell)
    sign = 1 if j % 2 == 0 else -1
    return Fraction(sign, factorial(j)) * poly


def edgeworth_terms(r: int, c: CumulantSet) -> list[Polynomial]:
    return [edgeworth_term(j, c) for j in range(r + 1)]


def w_derivs_from_chi(W, chi: Sequence, j: int) -> list:
    """Derivatives W, W', ..., W^{(j)} from W and log-derivatives chi_1..chi_j
    via W^{(m)} = W * B_m(chi_1, ..., chi_m)."""
    out = [W]
    for m in range(1, j + 1):
        out.append(W * bell_eval([chi[i] for i in range(1, m + 1)]))
    return out


def f_term(j: int, c: CumulantSet, w_derivs: Sequence, rtol: float = 1e-9) -> Polynomial:
    """F_j = W * G_j built directly as a linear combination of W-derivatives.

    Uses the generating-function form: F_j is (-1)^j times the coefficient
    of y^j in exp{sum_k y^k kappa_{k+2} D^{k+2} / (k+2)!} * sum_m (yD)^m
    W^{(m)} / m!, with the formal variable D^p mapped to (-1)^p He_p(x).
    `w_derivs` = [W, W', ..., W^{(j)}] must be consistent with the chi
    values carried by `c` (W * chi_1 = W' and so on); mismatch raises.
    """
    if j < 0:
        raise ValueError("expansion order must be nonnegative")
    if len(w_derivs) < j + 1:
        raise ValueError(f"need W derivatives up to order {j}")
    _check_chi_consistency(c, w_derivs, j, rtol)

    # Truncated series in y with DiffOperator-valued coefficients; the
    # operator order stands for powers of the scaled derivative (1/sigma) d/dx,
    # so each order p carries sigma^{-p}.
    zero, one = DiffOperator.zero(), DiffOperator.identity()
    exp_series = [one] + [zero] * j
    if j >= 1:
        t = [zero] * (j + 1)
        for k in range(1, j + 1):
            t[k] = DiffOperator(
                {
                    k + 2: c.kappa_order(k + 2)
                    * Fraction(1, factorial(k + 2))
                    * _inv_pow(c.sigma, k + 2)
                }
            )
        power = [one] + [zero] * j
        fact = 1
        for m in range(1, j + 1):
            power = _series_mul(power, t, j)
            fact *= m
            exp_series = [a + Fraction(1, fact) * b for a, b in zip(exp_series, power)]
    w_series = [
        DiffOperator({m: w_derivs[m] * Fraction(1, factorial(m)) * _inv_pow(c.sigma, m)})
        for m in range(j + 1)
    ]
    product = _series_mul(exp_series, w_series, j)
    sign = 1 if j % 2 == 0 else -1
    return sign * _hermite_map(product[j])


def _series_mul(a: list, b: list, trunc: int) -> list:
    out = [DiffOperator.zero() for _ in range(trunc + 1)]
    for i, ai in enumerate(a):
        for k in range(trunc + 1 - i):
            term = ai * b[k]
            out[i + k] = out[i + k] + term
    return out


def _check_chi_consistency(c: CumulantSet, w_derivs: Sequence, j: int, rtol: float):
    exact = all(isinstance(v, (Fraction, int)) for v in w_derivs) and all(
        isinstance(v, (Fraction, int)) for v in c.chi
    )
    expected = w_derivs_from_chi(w_derivs[0], [c.chi_order(m) for m in range(j + 1)], j)
    for m in range(1, j + 1):
        got, want = w_derivs[m], expected[m]
        if exact:
            if got != want:
                raise ValueError(
                    f"inconsistent chi and W derivatives at order {m}: {got} != {want}"
                )
        elif abs(float(got) - float(want)) > rtol * max(1.0, abs(float(want))):
            raise ValueError(
                f"inconsistent chi and W derivatives at order {m}: {got} vs {want}"
            )


def expansion_value(r: int, c: CumulantSet, W, w_n, k, terms: Sequence[Polynomial] | None = None):
    """Order-r Edgeworth approximation of the tilted profile at level k.

    Returns W e^{-x^2/2} / (sigma sqrt(2 pi w_n)) * sum_{j<=r} G_j(x) w_n^{-j/2}
    with x = (k - kappa_1 w_n) / (sigma sqrt(w_n)); approximates
    e^{beta k - phi(beta) w_n} L_n(k).  `k` may be a scalar or an array.
    """
    if r < 0:
        raise ValueError("expansion order must be nonnegative")
    if not w_n > 0:
        raise ValueError(f"w_n must be positive, got {w_n}")
    if terms is None:
        terms = edgeworth_terms(r, c)
    mu, sigma = float(c.mu), float(c.sigma)
    k_arr = np.asarray(k, dtype=float)
    x = (k_arr - mu * w_n) / (sigma * math.sqrt(w_n))
    total = np.zeros_like(x)
    for j in range(r + 1):
        pj = terms[j]
        total = total + np.asarray(pj(x), dtype=float) / w_n ** (j / 2.0)
    out = float(W) * np.exp(-0.5 * x * x) / (sigma * math.sqrt(TWO_PI * w_n)) * total
    return float(out) if np.isscalar(k) or np.ndim(k) == 0 else out


def saddle_expansion_value(r: int, c: CumulantSet, W, w_n, k, rtol: float = 1e-8):
    """Expansion at the saddle point: W/(sigma sqrt(2 pi w_n)) *
    sum_{j<=r} G_{2j}(0) w_n^{-j}.  Requires kappa_1(beta) = k / w_n, i.e.
    the cumulant set must already be tilted to the saddle point of level k;
    only even terms enter since G_odd(0) = 0.
    """
    if not w_n > 0:
        raise ValueError(f"w_n must be positive, got {w_n}")
    if abs(float(c.mu) * w_n - k) > rtol * max(1.0, abs(float(k))):
        raise ValueError(
            f"not at saddle point: kappa_1 * w_n = {float(c.mu) * w_n} but k = {k}"
        )
    sigma = float(c.sigma)
    total = 0.0
    for j in range(r + 1):
        g = edgeworth_term(2 * j, c)
        total += float(g.coeff(0)) / w_n**j
    return float(W) * total / (sigma * math.sqrt(TWO_PI * w_n))


def char_fn_psi(levels, counts, c: CumulantSet, phi_value: float, w_n: float, s):
    """Characteristic function of the tilted, rescaled profile.

    psi_n(s) = e^{-phi w_n - i s mu w_n / (sigma sqrt(w_n))}
               * sum_k L_n(k) e^{k (beta + i s / (sigma sqrt(w_n)))},
    computed with the real part stabilized log-sum-exp style.  At s = 0 this
    equals the normalized Laplace transform W_n(beta).
    """
    levels = np.asarray(levels, dtype=float)
    counts = np.asarray(counts, dtype=float)
    mask = counts > 0
    levels, counts = levels[mask], counts[mask]
    beta, sigma, mu = float(c.beta), float(c.sigma), float(c.mu)
    log_w = beta * levels + np.log(counts)
    m = log_w.max() if len(log_w) else -math.inf
    s_arr = np.asarray(s, dtype=float)
    scale = s_arr / (sigma * math.sqrt(w_n))
    phase = np.exp(1j * np.multiply.outer(scale, levels))
    acc = (np.exp(log_w - m) * phase).sum(axis=-1)
    out = acc * np.exp(m - phi_value * w_n - 1j * s_arr * mu * w_n / (sigma * math.sqrt(w_n)))
    return complex(out) if np.ndim(s) == 0 else out


def a_series_value(c: CumulantSet, k: int, s):
    """a_k(s) = kappa_{k+2}/((k+2)(k+1)) (is/sigma)^{k+2} + chi_k (is/sigma)^k."""
    if k < 1:
        raise ValueError("series order must be >= 1")
    sigma = float(c.sigma)
    z = 1j * np.asarray(s, dtype=float) / sigma
    val = float(c.kappa_order(k + 2)) / ((k + 2) * (k + 1)) * z ** (k + 2) + float(
        c.chi_order(k)
    ) * z**k
    return complex(val) if np.ndim(s) == 0 else val


def a_series_term(c: CumulantSet, k: int) -> ComplexSeriesTerm:
    return ComplexSeriesTerm(order=k, fn=lambda s: a_series_value(c, k, s))


def v_partial_sum(r: int, c: CumulantSet, W, w_n: float, s):
    """Truncated characteristic-function expansion V_{r,n}(s) =
    W e^{-s^2/2} sum_{k<=r} B_k(a_1(s)..a_k(s)) / k! * w_n^{-k/2}."""
    if r < 0:
        raise ValueError("expansion order must be nonnegative")
    s_arr = np.asarray(s, dtype=complex)
    bells = _bell_series(c, r, s_arr)
    total = np.zeros_like(s_arr)
    for k in range(r + 1):
        total = total + bells[k] / factorial(k) * w_n ** (-k / 2.0)
    out = float(W) * np.exp(-0.5 * np.real(s_arr) ** 2) * total
    return complex(out) if np.ndim(s) == 0 else out


def _bell_series(c: CumulantSet, k_max: int, s: np.ndarray) -> list:
    """[B_0, ..., B_{k_max}] evaluated at (a_1(s), ..., a_k(s)), vectorized in s."""
    ones = np.ones_like(s, dtype=complex)
    a = [a_series_value(c, k, np.real(s)) for k in range(1, k_max + 1)]
    bells = [ones]
    for n in range(k_max):
        acc = np.zeros_like(s, dtype=complex)
        for k in range(n + 1):
            acc = acc + math.comb(n, k) * bells[n - k] * a[k]
        bells.append(acc)
    return bells


def gauss_legendre_panels(s_max: float, num_panels: int, panel_nodes: int):
    """Composite Gauss-Legendre nodes and weights on [-s_max, s_max]."""
    x, w = np.polynomial.legendre.leggauss(panel_nodes)
    edges = np.linspace(-s_max, s_max, num_panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def fourier_invert_check(
    k_max: int,
    c: CumulantSet,
    x_grid: Sequence[float],
    s_max: float = 12.0,
    num_panels: int = 64,
    panel_nodes: int = 32,
) -> float:
    """Numerically verify the inversion identity
    (1/k!) int B_k(a_1(s)..a_k(s)) e^{isx} e^{-s^2/2} ds
      = sqrt(2 pi) G_k(-x) e^{-x^2/2}
    for k <= k_max over `x_grid`; returns the maximal relative error.

    The error is relative wherever the closed form is significant; the
    denominator is floored at 1e-4 of the grid maximum per order, so exact
    zeros of G_k (e.g. odd orders at x = 0) compare roundoff against the
    overall scale instead of dividing by zero.
    """
    tail = math.exp(-0.5 * s_max**2) * (1.0 + s_max) ** (3 * k_max)
    if tail >= 1e-14:
        raise ValueError(
            f"quadrature truncation too coarse: e^(-S^2/2)(1+S)^(3k) = {tail:.2e} >= 1e-14"
        )
    s, w = gauss_legendre_panels(s_max, num_panels, panel_nodes)
    bells = _bell_series(c, k_max, s.astype(complex))
    gauss = np.exp(-0.5 * s**2)
    x_grid = np.asarray(list(x_grid), dtype=float)
    worst = 0.0
    for k in range(k_max + 1):
        g = edgeworth_term(k, c)
        closed = np.array(
            [math.sqrt(TWO_PI) * float(g(-x)) * math.exp(-0.5 * x * x) for x in x_grid]
        )
        integrand = bells[k] * gauss / factorial(k)
        numeric = np.array(
            [np.sum(w * integrand * np.exp(1j * s * x)) for x in x_grid]
        )
        floor = 1e-4 * max(np.abs(closed).max(), 1e-300)
        rel = np.abs(numeric - closed) / np.maximum(np.abs(closed), floor)
        worst = max(worst, float(rel.max()))
    return worst
