"""Schröder's functional equation and its derivative (Frobenius-Perron) form.

Two eigenvalue regimes live here and must not be confused:

* the measure-level derivative form  |lam| alpha(x) = |T'(x)| alpha(T(x)),
  whose positive integrable solution alpha with |lam| = r (number of monotone
  branches) is the invariant density;
* the local Koenigs linearization q(T(x)) = lam q(x) at a fixed point, where
  lam = T'(xbar) is the multiplier (4 for the logistic map at 0, not 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegenerateSolutionError, NotFixedPointError, ResonanceError
from .quadrature import integrate_on_domain

_EPS = 1e-300
_MASS_TOL = 1e-6


@dataclass(frozen=True)
class SchroederCandidate:
    """alpha plays the role of |q'|; lambda_abs is the claimed |lam|."""

    alpha: Callable
    lambda_abs: float
    q: Callable | None = None


@dataclass(frozen=True)
class KoenigsSeries:
    fixed_point: float
    multiplier: float
    coeffs: np.ndarray  # c_1 .. c_K, c_1 = 1

    @property
    def order(self):
        return len(self.coeffs)

    def __call__(self, x):
        y = np.asarray(x, dtype=float) - self.fixed_point
        return Polynomial(np.concatenate([[0.0], self.coeffs]))(y)


def _alpha_values(alpha, x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(alpha(np.asarray(x, dtype=float)), dtype=float)


def schroeder_residual(T, q, lam, grid, require_nonzero=True):
    """max over the grid of |lam q(x) - q(T(x))|.

    With ``require_nonzero`` a q vanishing on the whole grid (the trivial
    solution) is rejected instead of reported as a perfect fit.
    """
    x = np.asarray(grid, dtype=float)
    qx = np.asarray(q(x), dtype=float)
    if not np.any(qx != 0):
        if require_nonzero:
            raise DegenerateSolutionError("q vanishes on the grid (trivial solution)")
        return 0.0
    return float(np.max(np.abs(lam * qx - np.asarray(q(T(x)), dtype=float))))


def candidate_mass(cand, domain, breaks=()):
    """Total integral of alpha over the domain."""
    return integrate_on_domain(cand.alpha, domain, domain.hi, breaks)


def derivative_form_residual(T, cand, grid, check_mass=True):
    """max over the grid of | |lam| alpha(x) - |T'(x)| alpha(T(x)) | / alpha(x)."""
    if check_mass:
        mass = candidate_mass(cand, T.domain, T.breakpoints)
        if abs(mass - 1.0) > _MASS_TOL:
            raise DegenerateSolutionError(f"alpha must have unit integral, got {mass!r}")
    x = np.asarray(grid, dtype=float)
    ax = _alpha_values(cand.alpha, x)
    atx = _alpha_values(cand.alpha, T(x))
    res = np.abs(cand.lambda_abs * ax - np.abs(T.deriv(x)) * atx) / np.maximum(ax, _EPS)
    return float(np.max(res))


def branch_identity_check(T, cand, j, x):
    """Both sides of |lam| alpha(T_j^{-1}(x)) = |T'(T_j^{-1}(x))| alpha(x)."""
    xj = T.inverse_branch(j, x)
    lhs = cand.lambda_abs * _alpha_values(cand.alpha, xj)
    rhs = np.abs(T.deriv(xj)) * _alpha_values(cand.alpha, x)
    if np.ndim(x) == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def fp_aggregate(T, cand, x):
    """Sum over inverse branches of alpha(T_j^{-1}(x)) / |T'(T_j^{-1}(x))|.

    Equals (r / |lam|) alpha(x) for a solution of the derivative form, so alpha
    itself is returned back when |lam| = r.
    """
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for j in range(1, T.r + 1):
        xj = T.inverse_branch(j, x)
        total = total + _alpha_values(cand.alpha, xj) / np.abs(T.deriv(xj))
    return float(total) if scalar else total


def eigenvalue_estimate(T, alpha, grid):
    """(median, max - min) of |T'(x)| alpha(T(x)) / alpha(x) over the grid."""
    x = np.asarray(grid, dtype=float)
    ax = _alpha_values(alpha, x)
    lam = np.abs(T.deriv(x)) * _alpha_values(alpha, T(x)) / np.maximum(ax, _EPS)
    return float(np.median(lam)), float(np.max(lam) - np.min(lam))


def build_measure(cand, x, domain, breaks=()):
    """Normalized left-cumulative integral of alpha, i.e. the invariant measure of [lo, x]."""
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(domain.contains(xs)):
        raise ValueError(f"x outside {domain}")
    total = candidate_mass(cand, domain, breaks)
    if not total > 0:
        raise DegenerateSolutionError("alpha has zero total mass")
    out = np.array(
        [integrate_on_domain(cand.alpha, domain, min(max(v, domain.lo), domain.hi), breaks) / total for v in xs]
    )
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Koenigs local linearization
# ---------------------------------------------------------------------------


def _series_divide(num, den, order):
    out = np.zeros(order + 1)
    num = np.pad(num, (0, max(0, order + 1 - len(num))))[: order + 1]
    den = np.pad(den, (0, max(0, order + 1 - len(den))))[: order + 1]
    if den[0] == 0:
        raise ZeroDivisionError("denominator vanishes at the expansion point")
    for n in range(order + 1):
        out[n] = (num[n] - np.dot(den[1 : n + 1], out[:n][::-1])) / den[0]
    return out


def _fd_taylor(f, x0, order, h=1e-2, levels=4):
    """Taylor coefficients from central differences refined by Richardson extrapolation."""
    coeffs = [float(f(x0))]
    for n in range(1, order + 1):
        table = []
        for lvl in range(levels):
            step = h / 2**lvl
            ks = np.arange(n + 1)
            pts = x0 + (n / 2.0 - ks) * step
            w = np.array([(-1) ** k * math.comb(n, k) for k in ks], dtype=float)
            table.append(float(np.dot(w, [f(p) for p in pts])) / step**n)
        for j in range(1, levels):
            fac = 4.0**j
            table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        coeffs.append(table[0] / math.factorial(n))
    return np.array(coeffs)


def taylor_coefficients(T, x0, order, method="auto"):
    """Coefficients a_0..a_order of T(x0 + y) = sum a_n y^n.

    Exact for rational and piecewise-linear maps; finite differences with
    Richardson extrapolation otherwise (reliable only for the first few orders).
    """
    if method not in ("auto", "exact", "finite_difference"):
        raise ValueError(f"unknown method {method!r}")
    if method != "finite_difference":
        if getattr(T, "piecewise_linear", False):
            out = np.zeros(order + 1)
            out[0] = T(x0)
            out[1] = T.deriv(x0) if order >= 1 else 0.0
            return out
        rat = T.as_rational() if hasattr(T, "as_rational") else None
        if rat is not None:
            shift = Polynomial([x0, 1.0])
            num, den = rat[0](shift), rat[1](shift)
            return _series_divide(num.coef, den.coef, order)
        if method == "exact":
            raise ValueError("map has no exact Taylor expansion")
    f = T.f_scalar if hasattr(T, "f_scalar") else T
    return _fd_taylor(f, x0, order)


def _truncated_powers(a, order):
    """Rows P[m] = coefficients of (sum_{k>=1} a_k y^k)^m through degree order."""
    base = np.zeros(order + 1)
    base[1:] = a[1 : order + 1]
    powers = [np.zeros(order + 1) for _ in range(order + 1)]
    powers[0][0] = 1.0
    for m in range(1, order + 1):
        powers[m] = np.convolve(powers[m - 1], base)[: order + 1]
    return powers


def koenigs_series(T, xbar, order, method="auto"):
    """Local solution q(x) = sum c_n (x - xbar)^n, c_1 = 1, of q(T(x)) = lam q(x)."""
    a = taylor_coefficients(T, xbar, order, method)
    if abs(a[0] - xbar) > 1e-12 * max(1.0, abs(xbar)):
        raise NotFixedPointError(f"T({xbar!r}) = {a[0]!r} is not a fixed point")
    lam = float(a[1])
    if abs(lam) == 0.0 or abs(abs(lam) - 1.0) < 1e-14:
        raise ResonanceError(f"multiplier {lam!r} has modulus 0 or 1")
    powers = _truncated_powers(a, order)
    c = np.zeros(order + 1)
    c[1] = 1.0
    for n in range(2, order + 1):
        gap = lam - lam**n
        if abs(gap) <= 1e-14 * max(abs(lam), abs(lam**n)):
            raise ResonanceError(f"lam^{n} = lam for lam = {lam!r}")
        c[n] = sum(c[m] * powers[m][n] for m in range(1, n)) / gap
    return KoenigsSeries(float(xbar), lam, c[1:])


class ReciprocalChart:
    """A rational map seen in the coordinate w = 1/x, so that x = inf becomes w = 0."""

    piecewise_linear = False

    def __init__(self, T):
        rat = T.as_rational()
        if rat is None:
            raise ValueError(f"{T.family} is not rational; no reciprocal chart")
        num, den = rat
        deg = max(num.degree(), den.degree())
        # S(w) = 1 / T(1/w) = w^deg den(1/w) / (w^deg num(1/w))
        self.family = T.family
        self._num = Polynomial(np.pad(den.coef, (0, deg + 1 - den.coef.size))[::-1])
        self._den = Polynomial(np.pad(num.coef, (0, deg + 1 - num.coef.size))[::-1])

    def as_rational(self):
        return self._num, self._den

    def __call__(self, w):
        return self._num(w) / self._den(w)

    f_scalar = __call__


def composition_residual(T, series, method="auto"):
    """Coefficients of q_K(T(x)) - lam q_K(x) through degree K, from the Taylor data of T."""
    K = series.order
    a = taylor_coefficients(T, series.fixed_point, K, method)
    powers = _truncated_powers(a, K)
    c = np.concatenate([[0.0], series.coeffs])
    comp = sum(c[m] * powers[m] for m in range(1, K + 1))
    return comp - series.multiplier * c
