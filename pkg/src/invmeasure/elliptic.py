"""Elliptic special functions on the real line.

Carlson's symmetric integral R_F, the complete integral K(m), Jacobi sn/cn/dn
by descending Landen (AGM) recursion, and the Weierstrass function with its
derivative and real inverse for invariants g2, g3 with three real roots.

The lattice-sum definition of the Weierstrass function converges too slowly
to be useful numerically, so it is evaluated through the Jacobi reduction

    P(x) = e3 + (e1 - e3) / sn^2(x * sqrt(e1 - e3) | m),   m = (e2 - e3)/(e1 - e3)

and inverted through R_F(u - e1, u - e2, u - e3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PoleError

# relative deviation at which the 7-term R_F series is below double rounding
_RF_TOL = 0.0025
_AGM_TOL = 4e-16
_AGM_MAX_STEPS = 64
POLE_GUARD = 1e-9


def _as_float_array(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    return [np.array(a) for a in arrs]


def carlson_rf(x, y, z):
    """Carlson's symmetric elliptic integral of the first kind.

    R_F(x, y, z) = 1/2 * int_0^inf dt / sqrt((t + x)(t + y)(t + z))

    Uses the duplication theorem until the arguments agree to 0.25 % and then
    the degree-7 Taylor series in the elementary symmetric functions.
    Accepts scalars or broadcastable arrays.
    """
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0
    x, y, z = _as_float_array(x, y, z)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(z))):
        raise DomainError("carlson_rf arguments must be finite")
    if np.any(x < 0) or np.any(y < 0) or np.any(z < 0):
        raise DomainError("carlson_rf arguments must be nonnegative")
    zeros = (x == 0).astype(int) + (y == 0) + (z == 0)
    if np.any(zeros >= 2):
        raise DomainError("carlson_rf: at most one argument may be zero")

    for _ in range(200):
        a = (x + y + z) / 3.0
        dev = np.max(np.abs(np.stack([a - x, a - y, a - z])), axis=0) / a
        if np.all(dev < _RF_TOL):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x = (x + lam) * 0.25
        y = (y + lam) * 0.25
        z = (z + lam) * 0.25
    a = (x + y + z) / 3.0
    dx = 1.0 - x / a
    dy = 1.0 - y / a
    dz = -(dx + dy)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    series = (
        1.0
        - e2 / 10.0
        + e3 / 14.0
        + e2 * e2 / 24.0
        - 3.0 * e2 * e3 / 44.0
        - 5.0 * e2**3 / 208.0
        + 3.0 * e3 * e3 / 104.0
        + e2 * e2 * e3 / 16.0
    )
    out = series / np.sqrt(a)
    return float(out) if scalar else out


def _check_parameter(m):
    if not (0.0 <= m < 1.0):
        raise DomainError(f"parameter m={m!r} must lie in [0, 1)")


def agm(a, b):
    for _ in range(_AGM_MAX_STEPS):
        if abs(a - b) <= _AGM_TOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_k(m):
    """Complete elliptic integral of the first kind K(m), parameter convention."""
    m = float(m)
    _check_parameter(m)
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))


def _landen_sequence(m):
    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(1.0 - m)
    while abs(c[-1]) > _AGM_TOL * a[-1] and len(a) < _AGM_MAX_STEPS:
        an, bn = a[-1], b
        a.append(0.5 * (an + bn))
        b = math.sqrt(an * bn)
        c.append(0.5 * (an - bn))
    return a, c


def jacobi_sncndn(u, m):
    """Return (sn, cn, dn) of u for parameter m in [0, 1).

    The argument is first reduced modulo the real period 4K(m); the amplitude is
    then recovered from phi_N = 2^N a_N u by the backward Landen recursion.
    """
    m = float(m)
    _check_parameter(m)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    quarter = complete_k(m)
    period = 4.0 * quarter
    u = u - period * np.round(u / period)

    a, c = _landen_sequence(m)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    phi_next = phi
    for i in range(n, 0, -1):
        phi_next = phi
        phi = 0.5 * (phi + np.arcsin(c[i] / a[i] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = cn / np.cos(phi_next - phi) if n > 0 else np.ones_like(sn)
    if scalar:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def jacobi_sn(u, m):
    """Jacobi elliptic sine sn(u | m)."""
    return jacobi_sncndn(u, m)[0]


def jacobi_sn_inv(s, m):
    """Inverse of sn on [0, K]: the incomplete integral F(arcsin s | m) for s in [0, 1]."""
    _check_parameter(float(m))
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > 1):
        raise DomainError("jacobi_sn_inv expects s in [0, 1]")
    s2 = s * s
    with np.errstate(invalid="ignore"):
        out = np.where(s == 0, 0.0, s * carlson_rf(1.0 - s2, 1.0 - m * s2, np.ones_like(s)))
    return float(out) if scalar else out


def discriminant(g2, g3):
    """Modular discriminant g2^3 - 27 g3^2 of 4s^3 - g2 s - g3."""
    return g2**3 - 27.0 * g3**2


def cubic_roots(g2, g3):
    """Real roots e1 >= e2 >= e3 of 4s^3 - g2 s - g3 = 0 (positive discriminant only)."""
    g2 = float(g2)
    g3 = float(g3)
    if discriminant(g2, g3) <= 0:
        raise DomainError(
            f"discriminant g2^3 - 27 g3^2 = {discriminant(g2, g3)!r} <= 0; "
            "only three distinct real roots are supported"
        )
    p = -g2 / 4.0
    q = -g3 / 4.0
    rad = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
    theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    roots = []
    for k in range(3):
        s = rad * math.cos(theta - 2.0 * math.pi * k / 3.0)
        f = 4.0 * s**3 - g2 * s - g3
        fp = 12.0 * s**2 - g2
        if fp != 0.0:
            s -= f / fp
        roots.append(s)
    e1, e2, e3 = sorted(roots, reverse=True)
    return e1, e2, e3


@dataclass(frozen=True)
class EllipticContext:
    """Invariants (g2, g3) of a real rectangular lattice with derived constants."""

    g2: float
    g3: float
    disc: float = field(init=False)
    e1: float = field(init=False)
    e2: float = field(init=False)
    e3: float = field(init=False)
    m: float = field(init=False)
    omega1: float = field(init=False)

    def __post_init__(self):
        e1, e2, e3 = cubic_roots(self.g2, self.g3)
        m = (e2 - e3) / (e1 - e3)
        object.__setattr__(self, "disc", discriminant(self.g2, self.g3))
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "e3", e3)
        object.__setattr__(self, "m", m)
        # AGM route; the R_F route through weierstrass_p_inv(e1) is the cross-check
        object.__setattr__(self, "omega1", complete_k(m) / math.sqrt(e1 - e3))

    @property
    def scale(self):
        return math.sqrt(self.e1 - self.e3)

    def cubic(self, s):
        return 4.0 * s**3 - self.g2 * s - self.g3


def _reduce(x, ctx):
    """Fold x into (0, omega1]; returns the folded value and the sign of P' there."""
    x = np.asarray(x, dtype=float)
    w = ctx.omega1
    t = np.mod(x, 2.0 * w)
    dist = np.minimum(t, 2.0 * w - t)
    if np.any(dist < POLE_GUARD * w):
        raise PoleError("Weierstrass function evaluated at a lattice pole")
    sign = np.where(t > w, -1.0, 1.0)
    return np.where(t > w, 2.0 * w - t, t), sign


def weierstrass_p(x, ctx):
    """Weierstrass P(x; g2, g3) for real x."""
    scalar = np.ndim(x) == 0
    t, _ = _reduce(x, ctx)
    sn = jacobi_sncndn(t * ctx.scale, ctx.m)[0]
    out = ctx.e3 + (ctx.e1 - ctx.e3) / (sn * sn)
    return float(out) if scalar else out


def weierstrass_p_prime(x, ctx):
    """Derivative P'(x); negative on (0, omega1) where P decreases, positive beyond."""
    scalar = np.ndim(x) == 0
    t, sign = _reduce(x, ctx)
    sn, cn, dn = jacobi_sncndn(t * ctx.scale, ctx.m)
    out = -2.0 * ctx.scale**3 * cn * dn / sn**3 * sign
    return float(out) if scalar else out


def weierstrass_p_inv(u, ctx):
    """Real inverse of P on (0, omega1]: int_u^inf ds / sqrt(4s^3 - g2 s - g3)."""
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if np.any(u < ctx.e1):
        raise DomainError(f"weierstrass_p_inv requires u >= e1 = {ctx.e1!r}")
    out = np.zeros_like(u)
    fin = np.isfinite(u)
    if np.any(fin):
        uf = u[fin]
        out[fin] = carlson_rf(uf - ctx.e1, uf - ctx.e2, uf - ctx.e3)
    return float(out) if scalar else out
