"""Quadrature for integrands with inverse-square-root or logarithmic endpoint singularities."""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import NonIntegrableError
from .maps import Compactification

DRIFT_TOL = 1e-6


def _smoothstep(a, b):
    """y(s) = a + (b - a)(3s^2 - 2s^3); y - a ~ s^2 near 0 and b - y ~ (1 - s)^2 near 1."""
    w = b - a

    def y(s):
        return a + w * s * s * (3.0 - 2.0 * s)

    def dy(s):
        return 6.0 * w * s * (1.0 - s)

    return y, dy


def integrate_piece(f, a, b, epsabs=1e-13, epsrel=1e-13):
    """int_a^b f with both ends treated as potentially singular (finite a, b).

    The quadratic end substitution turns 1/sqrt endpoint behaviour into a smooth
    integrand; the QAGS extrapolation takes care of residual logarithms.
    """
    if a == b:
        return 0.0
    y, dy = _smoothstep(a, b)
    # nodes that round onto an endpoint are moved one ulp inside
    inner_a, inner_b = np.nextafter(a, b), np.nextafter(b, a)

    def g(s):
        val = f(min(max(y(s), inner_a), inner_b))
        return float(val) * dy(s)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=400)
    if not math.isfinite(val) or err > DRIFT_TOL:
        raise NonIntegrableError(
            f"quadrature on [{a}, {b}] did not settle (estimate {val!r}, drift {err:.3g})"
        )
    return val


def integrate_pieces(f, edges):
    """Sum of integrate_piece over consecutive edges."""
    return math.fsum(integrate_piece(f, a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a)


def integrate_on_domain(f, domain, upper, breaks=()):
    """int_{domain.lo}^{upper} f, in compactified coordinates on unbounded domains.

    ``breaks`` are interior points where f is singular or kinked; the pieces
    between them are integrated separately.
    """
    if domain.bounded:
        g, to_c = f, (lambda v: v)
        lo = domain.lo
    else:
        chart = Compactification(domain)
        inner_lo = np.nextafter(domain.lo, math.inf)

        def g(u):
            with np.errstate(all="ignore"):
                return f(np.maximum(chart.from_u(u), inner_lo)) * chart.dx_du(u)

        def to_c(v):
            return float(chart.to_u(v))

        lo = 0.0
        # the real-line chart has a kink at 0
        if chart.kind == "real_line":
            breaks = tuple(breaks) + (0.0,)
    top = to_c(upper)
    inner = sorted({to_c(b) for b in breaks if lo < to_c(b) < top})
    return integrate_pieces(g, [lo, *inner, top])


_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


def cell_averages(f, lo, hi, n):
    """Mean of f over each of n equal cells of [lo, hi] by the 5-point Gauss rule."""
    width = (hi - lo) / n
    centers = lo + width * (np.arange(n) + 0.5)
    pts = centers[:, None] + 0.5 * width * _GL5_NODES[None, :]
    with np.errstate(all="ignore"):
        vals = np.asarray(f(pts), dtype=float)
    return 0.5 * (vals * _GL5_WEIGHTS[None, :]).sum(axis=1)
