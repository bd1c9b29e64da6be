"""Catalog of piecewise-monotone maps of an interval or of the real line.

Every map exposes evaluation, its analytic derivative, the left-to-right list
of monotone branches, and the inverse of each branch.  Evaluation and
derivative accept scalars or numpy arrays.

Families
--------
renyi            x -> r x mod 1 on [0, 1]
nr               fold of r x mod 1 (alternating orientation) on [0, 1]; tent map for r = 2
logistic         4 x (1 - x) on [0, 1]
chebyshev        cos(r arccos x) on [-1, 1]
lattes           duplication map of the Weierstrass function on [e1, inf)
sn2              duplication map of sn^2 on [0, 1]
cauchy_doubling  (x^2 - 1) / (2x) on the real line
boole_lft        (a x + b) / (c x + d), ad - bc = 1, on the extended real line
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial

from .elliptic import EllipticContext
from .errors import (
    BreakpointError,
    DomainError,
    InvalidParameterError,
    OutOfImageError,
    SingularityError,
)

FAMILIES = (
    "renyi",
    "nr",
    "logistic",
    "chebyshev",
    "lattes",
    "sn2",
    "cauchy_doubling",
    "boole_lft",
)

# value returned by boole_lft at its pole
INFINITY = math.inf

_DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameterError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x, tol=_DOMAIN_TOL):
        x = np.asarray(x, dtype=float)
        scale = np.maximum(1.0, np.abs(np.where(np.isfinite(x), x, 0.0)))
        return (x >= self.lo - tol * scale) & (x <= self.hi + tol * scale)


def _is_scalar(x):
    return np.ndim(x) == 0


def _out(val, scalar):
    return float(val) if scalar else val


def _bracket_invert(f, lo, hi, y, increasing, deriv=None):
    """Vectorized bisection for f(x) = y on a monotone branch [lo, hi].

    An infinite ``hi`` is replaced by a per-point bracket grown by doubling.
    Finishes with one guarded Newton step.
    """
    y = np.asarray(y, dtype=float)
    a = np.full_like(y, lo)
    if math.isinf(hi):
        b = np.full_like(y, max(2.0 * abs(lo), 1.0) + lo)
        for _ in range(2100):
            fb = f(b)
            grow = (fb < y) if increasing else (fb > y)
            if not np.any(grow):
                break
            b = np.where(grow, lo + 2.0 * (b - lo), b)
    else:
        b = np.full_like(y, hi)
    for _ in range(2200):
        mid = a + 0.5 * (b - a)
        done = (mid <= a) | (mid >= b)
        if np.all(done):
            break
        with np.errstate(all="ignore"):
            fm = f(mid)
        left = (fm < y) if increasing else (fm > y)
        a = np.where(~done & left, mid, a)
        b = np.where(~done & ~left, mid, b)
    x = a + 0.5 * (b - a)
    if deriv is not None:
        with np.errstate(all="ignore"):
            fx = f(x)
            dfx = deriv(x)
            step = np.where(dfx != 0, (fx - y) / dfx, 0.0)
            cand = x - step
            ok = (cand >= np.minimum(a, b)) & (cand <= np.maximum(a, b)) & np.isfinite(cand)
            ok &= np.abs(f(np.where(ok, cand, x)) - y) <= np.abs(fx - y)
        x = np.where(ok, cand, x)
    return x


class IntervalMap:
    """Base class; subclasses provide ``_f``, ``_df`` and ``_inv``."""

    family: str = ""
    r: int = 1
    domain: Interval
    breakpoints: tuple = ()
    singularities: tuple = ()
    critical_values: tuple = ()
    piecewise_linear = False

    def __init__(self, params):
        self.params = MappingProxyType(dict(params))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"

    # -- structure ---------------------------------------------------------
    @property
    def branches(self):
        edges = (self.domain.lo, *self.breakpoints, self.domain.hi)
        return list(zip(edges[:-1], edges[1:]))

    def branch_sign(self, j):
        """+1 if branch j (1-based) is increasing, -1 if decreasing."""
        lo, hi = self.branches[j - 1]
        x = _branch_samples(lo, hi, 3)[1]
        return 1 if self._df(x) > 0 else -1

    def _check_singular(self, x):
        for s in self.singularities:
            if np.any(x == s):
                raise SingularityError(f"{self.family} is singular at x={s!r}")

    def _check_domain(self, x):
        if not np.all(self.domain.contains(x)):
            raise DomainError(f"point outside the domain of {self.family}: {self.domain}")

    # -- public operations -------------------------------------------------
    def __call__(self, x):
        scalar = _is_scalar(x)
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        self._check_singular(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(self._f(x), scalar)

    def deriv(self, x):
        scalar = _is_scalar(x)
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        self._check_singular(x)
        for bp in self.breakpoints:
            if np.any(x == bp):
                raise BreakpointError(f"{self.family}: derivative at branch boundary x={bp!r}")
        return _out(self._df(x), scalar)

    def inverse_branch(self, j, y):
        if not 1 <= j <= self.r:
            raise OutOfImageError(f"branch index {j} not in 1..{self.r}")
        scalar = _is_scalar(y)
        y = np.asarray(y, dtype=float)
        if not np.all(self.domain.contains(y)):
            raise OutOfImageError(f"value outside the image of branch {j} of {self.family}")
        for cv in self.critical_values:
            if np.any(y == cv):
                raise BreakpointError(f"{self.family}: {cv!r} is the image of a fold point")
        return _out(self._inv(j, y), scalar)

    def branch_index(self, x):
        """1-based branch containing x; boundary points go to the left branch."""
        return int(np.searchsorted(np.asarray(self.breakpoints, dtype=float), x, side="left")) + 1

    def as_rational(self):
        """(numerator, denominator) polynomials when the map is rational, else None."""
        return None

    def limit_at(self, sign):
        """Value of the map at +inf (sign=+1) or -inf (sign=-1) for unbounded domains."""
        raise DomainError(f"{self.family} has a bounded domain")

    # subclass hooks; the *_scalar variants serve the orbit loops and take a float
    def f_scalar(self, x):
        return float(self._f(x))

    def df_scalar(self, x):
        return float(self._df(x))

    def _f(self, x):
        raise NotImplementedError

    def _df(self, x):
        raise NotImplementedError

    def _inv(self, j, y):
        lo, hi = self.branches[j - 1]
        return _bracket_invert(self._f, lo, hi, y, self.branch_sign(j) > 0, self._df)


class Renyi(IntervalMap):
    family = "renyi"
    piecewise_linear = True

    def __init__(self, r):
        super().__init__({"r": r})
        self.r = r
        self.domain = Interval(0.0, 1.0)
        self.breakpoints = tuple(k / r for k in range(1, r))

    def _f(self, x):
        rx = self.r * x
        return rx - np.floor(rx)

    def _df(self, x):
        return np.full_like(np.asarray(x, dtype=float), float(self.r))

    def _inv(self, j, y):
        return (j - 1 + y) / self.r

    def f_scalar(self, x):
        rx = self.r * x
        return rx - math.floor(rx)

    def df_scalar(self, x):
        return float(self.r)


class NR(IntervalMap):
    """Fold of r x mod 1: {rx} when [rx] is even, 1 - {rx} when odd."""

    family = "nr"
    piecewise_linear = True

    def __init__(self, r):
        super().__init__({"r": r})
        self.r = r
        self.domain = Interval(0.0, 1.0)
        self.breakpoints = tuple(k / r for k in range(1, r))

    def _f(self, x):
        rx = self.r * x
        n = np.floor(rx)
        frac = rx - n
        return np.where(np.mod(n, 2) == 0, frac, 1.0 - frac)

    def _df(self, x):
        n = np.floor(self.r * np.asarray(x, dtype=float))
        return np.where(np.mod(n, 2) == 0, float(self.r), -float(self.r))

    def _inv(self, j, y):
        if (j - 1) % 2 == 0:
            return (j - 1 + y) / self.r
        return (j - y) / self.r

    def f_scalar(self, x):
        rx = self.r * x
        n = math.floor(rx)
        return rx - n if n % 2 == 0 else 1.0 - (rx - n)

    def df_scalar(self, x):
        return float(self.r) if math.floor(self.r * x) % 2 == 0 else -float(self.r)


class Logistic(IntervalMap):
    family = "logistic"
    r = 2
    breakpoints = (0.5,)
    critical_values = (1.0,)

    def __init__(self):
        super().__init__({})
        self.domain = Interval(0.0, 1.0)

    def _f(self, x):
        return 4.0 * x * (1.0 - x)

    def _df(self, x):
        return 4.0 - 8.0 * x

    f_scalar = _f
    df_scalar = _df

    def _inv(self, j, y):
        root = np.sqrt(1.0 - y)
        small = 0.5 * y / (1.0 + root)
        return small if j == 1 else 1.0 - small

    def as_rational(self):
        return Polynomial([0.0, 4.0, -4.0]), Polynomial([1.0])


class ChebyshevMap(IntervalMap):
    family = "chebyshev"

    def __init__(self, r):
        super().__init__({"r": r})
        self.r = r
        self.domain = Interval(-1.0, 1.0)
        self.breakpoints = tuple(math.cos(k * math.pi / r) for k in range(r - 1, 0, -1))
        self.critical_values = (-1.0, 1.0)

    def _f(self, x):
        t_prev, t = np.ones_like(x), x
        for _ in range(self.r - 1):
            t_prev, t = t, 2.0 * x * t - t_prev
        return t

    def _df(self, x):
        # T_r' = r U_{r-1}
        u_prev, u = np.ones_like(x), 2.0 * x
        if self.r == 1:
            return np.ones_like(x) * 1.0
        for _ in range(self.r - 2):
            u_prev, u = u, 2.0 * x * u - u_prev
        return self.r * u

    def f_scalar(self, x):
        t_prev, t = 1.0, x
        for _ in range(self.r - 1):
            t_prev, t = t, 2.0 * x * t - t_prev
        return t

    def df_scalar(self, x):
        if self.r == 1:
            return 1.0
        u_prev, u = 1.0, 2.0 * x
        for _ in range(self.r - 2):
            u_prev, u = u, 2.0 * x * u - u_prev
        return self.r * u

    def _inv(self, j, y):
        k = self.r - j
        acy = np.arccos(np.clip(y, -1.0, 1.0))
        angle = k * math.pi + acy if k % 2 == 0 else (k + 1) * math.pi - acy
        return np.cos(angle / self.r)

    def as_rational(self):
        return Chebyshev.basis(self.r).convert(kind=Polynomial), Polynomial([1.0])


class Lattes(IntervalMap):
    """Rational map T with P(2z) = T(P(z)) for the Weierstrass function P."""

    family = "lattes"
    r = 2

    def __init__(self, g2, g3):
        super().__init__({"g2": g2, "g3": g3})
        self.ctx = EllipticContext(float(g2), float(g3))
        g2, g3 = self.ctx.g2, self.ctx.g3
        self._num = Polynomial([(g2 / 4.0) ** 2, 2.0 * g3, g2 / 2.0, 0.0, 1.0])
        self._den = Polynomial([-g3, -g2, 0.0, 4.0])
        self._crit_poly = self._num.deriv() * self._den - self._num * self._den.deriv()
        self.domain = Interval(self.ctx.e1, math.inf, hi_open=True)
        self.singularities = (self.ctx.e1,)
        self.critical_values = (self.ctx.e1,)
        self.breakpoints = (self._critical_point(),)

    def _critical_point(self):
        from scipy.optimize import brentq

        e1 = self.ctx.e1
        lo = e1 + 1e-9 * max(1.0, abs(e1))
        hi = e1 + 1.0
        while self._crit_poly(hi) <= 0:
            hi = e1 + 2.0 * (hi - e1)
        return brentq(self._crit_poly, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    def _f(self, x):
        return self._num(x) / self._den(x)

    def _df(self, x):
        d = self._den(x)
        return self._crit_poly(x) / (d * d)

    def f_scalar(self, x):
        g2, g3 = self.ctx.g2, self.ctx.g3
        x2 = x * x
        return (x2 * x2 + 0.5 * g2 * x2 + 2.0 * g3 * x + 0.0625 * g2 * g2) / (4.0 * x2 * x - g2 * x - g3)

    def df_scalar(self, x):
        g2, g3 = self.ctx.g2, self.ctx.g3
        x2 = x * x
        num = x2 * x2 + 0.5 * g2 * x2 + 2.0 * g3 * x + 0.0625 * g2 * g2
        dnum = 4.0 * x2 * x + g2 * x + 2.0 * g3
        den = 4.0 * x2 * x - g2 * x - g3
        dden = 12.0 * x2 - g2
        return (dnum * den - num * dden) / (den * den)

    def limit_at(self, sign):
        return math.inf

    def as_rational(self):
        return self._num, self._den


class Sn2(IntervalMap):
    """4x(1-x)(1-k^2 x)/(1-k^2 x^2)^2, the doubling map of sn^2 with modulus k."""

    family = "sn2"
    r = 2
    critical_values = (1.0,)

    def __init__(self, kappa):
        super().__init__({"kappa": kappa})
        self.kappa = float(kappa)
        self.m = self.kappa**2
        m = self.m
        self._num = Polynomial([0.0, 4.0, -4.0 * (1.0 + m), 4.0 * m])
        self._den = Polynomial([1.0, 0.0, -m]) ** 2
        self._crit_poly = self._num.deriv() * self._den - self._num * self._den.deriv()
        self.domain = Interval(0.0, 1.0)
        # sn^2(K/2) = 1 / (1 + k')
        self.breakpoints = (1.0 / (1.0 + math.sqrt(1.0 - m)),)

    def _f(self, x):
        m = self.m
        q = 1.0 - m * x * x
        return 4.0 * x * (1.0 - x) * (1.0 - m * x) / (q * q)

    def _df(self, x):
        d = self._den(x)
        return self._crit_poly(x) / (d * d)

    def df_scalar(self, x):
        m = self.m
        num = 4.0 * x * (1.0 - x) * (1.0 - m * x)
        dnum = 4.0 - 8.0 * (1.0 + m) * x + 12.0 * m * x * x
        q = 1.0 - m * x * x
        # d/dx q^2 = -4 m x q
        return (dnum * q + 4.0 * m * x * num) / (q * q * q)

    f_scalar = _f

    def as_rational(self):
        return self._num, self._den


class CauchyDoubling(IntervalMap):
    family = "cauchy_doubling"
    r = 2
    breakpoints = (0.0,)
    singularities = (0.0,)

    def __init__(self):
        super().__init__({})
        self.domain = Interval(-math.inf, math.inf, True, True)

    def _f(self, x):
        return 0.5 * (x - 1.0 / x)

    def _df(self, x):
        return 0.5 * (1.0 + 1.0 / (x * x))

    f_scalar = _f
    df_scalar = _df

    def _inv(self, j, y):
        root = np.hypot(y, 1.0)
        pos = np.where(y >= 0, y + root, 1.0 / (root - y))
        return -1.0 / pos if j == 1 else pos

    def limit_at(self, sign):
        return sign * math.inf

    def as_rational(self):
        return Polynomial([-1.0, 0.0, 1.0]), Polynomial([0.0, 2.0])


class BooleLFT(IntervalMap):
    family = "boole_lft"
    r = 1

    def __init__(self, a, b, c, d):
        super().__init__({"a": a, "b": b, "c": c, "d": d})
        self.a, self.b, self.c, self.d = (float(v) for v in (a, b, c, d))
        self.domain = Interval(-math.inf, math.inf, True, True)
        self.pole = -self.d / self.c
        self.singularities = (self.pole,)

    def __call__(self, x):
        # the pole maps to the INFINITY sentinel instead of raising
        scalar = _is_scalar(x)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(self._f(x), scalar)

    def _f(self, x):
        den = self.c * x + self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (self.a * x + self.b) / den
        val = np.where(den == 0, INFINITY, val)
        return np.where(np.isinf(x), self.a / self.c, val)

    def _df(self, x):
        den = self.c * x + self.d
        return 1.0 / (den * den)

    def f_scalar(self, x):
        den = self.c * x + self.d
        if den == 0.0:
            return INFINITY
        return (self.a * x + self.b) / den

    df_scalar = _df

    def _inv(self, j, y):
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (self.d * y - self.b) / (self.a - self.c * y)
        x = np.where(self.a - self.c * y == 0, INFINITY, x)
        return np.where(np.isinf(y), self.pole, x)

    def inverse_branch(self, j, y):
        if j != 1:
            raise OutOfImageError("boole_lft has a single branch")
        scalar = _is_scalar(y)
        return _out(self._inv(1, np.asarray(y, dtype=float)), scalar)

    def limit_at(self, sign):
        return self.a / self.c

    def fixed_points(self):
        """(attracting, repelling) fixed points for a hyperbolic transformation."""
        tr = self.a + self.d
        disc = tr * tr - 4.0
        if disc <= 0:
            raise DomainError("boole_lft is not hyperbolic (|a + d| <= 2)")
        roots = [((self.a - self.d) + s * math.sqrt(disc)) / (2.0 * self.c) for s in (1.0, -1.0)]
        roots.sort(key=lambda p: abs(self._df(p)))
        return roots[0], roots[1]

    def as_rational(self):
        return Polynomial([self.b, self.a]), Polynomial([self.d, self.c])


def _positive_int(params, name, family):
    if name not in params:
        raise InvalidParameterError(f"{family}: missing parameter {name!r}")
    val = params[name]
    if isinstance(val, bool) or not float(val).is_integer() or int(val) < 1:
        raise InvalidParameterError(f"{family}: {name} must be a positive integer, got {val!r}")
    return int(val)


_PARAMS = {
    "renyi": {"r"},
    "nr": {"r"},
    "logistic": set(),
    "chebyshev": {"r"},
    "lattes": {"g2", "g3"},
    "sn2": {"kappa", "m"},
    "cauchy_doubling": set(),
    "boole_lft": {"a", "b", "c", "d"},
}


def make_map(family, **params):
    """Build a validated map instance.

    ``sn2`` takes either the modulus ``kappa`` or the parameter ``m = kappa**2``.
    """
    if family not in _PARAMS:
        raise InvalidParameterError(f"unknown family {family!r}; expected one of {FAMILIES}")
    unknown = set(params) - _PARAMS[family]
    if unknown:
        raise InvalidParameterError(f"{family}: unknown parameter(s) {sorted(unknown)}")

    if family in ("renyi", "nr", "chebyshev"):
        r = _positive_int(params, "r", family)
        if family in ("renyi", "nr") and r < 2:
            raise InvalidParameterError(f"{family}: r >= 2 required for an expanding map")
        inst = {"renyi": Renyi, "nr": NR, "chebyshev": ChebyshevMap}[family](r)
    elif family == "logistic":
        inst = Logistic()
    elif family == "lattes":
        for key in ("g2", "g3"):
            if key not in params:
                raise InvalidParameterError(f"lattes: missing parameter {key!r}")
        g2, g3 = float(params["g2"]), float(params["g3"])
        disc = g2**3 - 27.0 * g3**2
        if not disc > 0:
            raise InvalidParameterError(f"lattes: disc <= 0 (g2^3 - 27 g3^2 = {disc:g})")
        inst = Lattes(g2, g3)
    elif family == "sn2":
        if ("kappa" in params) == ("m" in params):
            raise InvalidParameterError("sn2: give exactly one of 'kappa' or 'm'")
        kappa = float(params["kappa"]) if "kappa" in params else math.sqrt(float(params["m"]))
        if not 0.0 < kappa < 1.0:
            raise InvalidParameterError(f"sn2: modulus kappa must lie in (0, 1), got {kappa!r}")
        inst = Sn2(kappa)
    elif family == "cauchy_doubling":
        inst = CauchyDoubling()
    else:
        missing = [k for k in "abcd" if k not in params]
        if missing:
            raise InvalidParameterError(f"boole_lft: missing parameter(s) {missing}")
        a, b, c, d = (float(params[k]) for k in "abcd")
        if c == 0:
            raise InvalidParameterError("boole_lft: c != 0 violated")
        if abs(a * d - b * c - 1.0) > 1e-12:
            raise InvalidParameterError(f"boole_lft: ad - bc = 1 violated (got {a * d - b * c!r})")
        inst = BooleLFT(a, b, c, d)
    _check_monotone_branches(inst)
    return inst


def _branch_samples(lo, hi, n=64):
    t = (np.arange(n) + 0.5) / n
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * t
    if math.isfinite(lo):
        return lo + t / (1.0 - t)
    if math.isfinite(hi):
        return hi - t[::-1] / (1.0 - t[::-1])
    return (2.0 * t - 1.0) / (1.0 - np.abs(2.0 * t - 1.0))


def _check_monotone_branches(inst):
    if inst.family == "boole_lft":
        pieces = [(-math.inf, inst.pole), (inst.pole, math.inf)]
    else:
        pieces = inst.branches
    for lo, hi in pieces:
        x = _branch_samples(lo, hi)
        with np.errstate(all="ignore"):
            sign = np.sign(inst._df(x))
        if not (np.all(sign > 0) or np.all(sign < 0)):
            raise InvalidParameterError(f"{inst.family}: branch [{lo}, {hi}] is not strictly monotone")


# ---------------------------------------------------------------------------
# compactification of unbounded domains onto [0, 1]
# ---------------------------------------------------------------------------


class Compactification:
    """Monotone change of variables u = phi(x) from an unbounded domain to [0, 1]."""

    def __init__(self, domain):
        if domain.bounded:
            raise DomainError("compactification requested for a bounded domain")
        if math.isfinite(domain.lo):
            self.kind = "half_line"
            self.a = domain.lo
        elif math.isinf(domain.lo) and math.isinf(domain.hi):
            self.kind = "real_line"
            self.a = 0.0
        else:
            raise DomainError("only [a, inf) and (-inf, inf) domains are supported")

    def to_u(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            if self.kind == "half_line":
                s = x - self.a
                u = s / (s + 1.0)
                return np.where(np.isposinf(x), 1.0, u)
            u = 0.5 + x / (2.0 * (1.0 + np.abs(x)))
            return np.where(np.isposinf(x), 1.0, np.where(np.isneginf(x), 0.0, u))

    def from_u(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "half_line":
                return np.where(u >= 1.0, np.inf, self.a + u / (1.0 - u))
            v = 2.0 * u - 1.0
            x = v / (1.0 - np.abs(v))
            return np.where(u >= 1.0, np.inf, np.where(u <= 0.0, -np.inf, x))

    def dx_du(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            if self.kind == "half_line":
                return 1.0 / (1.0 - u) ** 2
            v = 2.0 * u - 1.0
            return 2.0 / (1.0 - np.abs(v)) ** 2

    def du_dx(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "half_line":
            return 1.0 / (x - self.a + 1.0) ** 2
        return 1.0 / (2.0 * (1.0 + np.abs(x)) ** 2)


class CompactifiedMap(IntervalMap):
    """View of an unbounded-domain map in the coordinate u of a Compactification."""

    def __init__(self, base):
        super().__init__(base.params)
        self.base = base
        self.chart = Compactification(base.domain)
        self.family = base.family
        self.r = base.r
        self.domain = Interval(0.0, 1.0)
        self.breakpoints = tuple(float(self.chart.to_u(b)) for b in base.breakpoints)
        self.singularities = tuple(float(self.chart.to_u(s)) for s in base.singularities)
        self.critical_values = tuple(float(self.chart.to_u(c)) for c in base.critical_values)

    def __repr__(self):
        return f"CompactifiedMap({self.base!r})"

    def _base_f(self, x):
        with np.errstate(all="ignore"):
            y = self.base._f(x)
        y = np.where(np.isposinf(x), self.base.limit_at(1), y)
        if self.chart.kind == "real_line":
            y = np.where(np.isneginf(x), self.base.limit_at(-1), y)
        return y

    def _f(self, u):
        x = self.chart.from_u(u)
        return self.chart.to_u(self._base_f(x))

    def _df(self, u):
        x = self.chart.from_u(u)
        y = self._base_f(x)
        with np.errstate(all="ignore"):
            return self.chart.du_dx(y) * self.base._df(x) * self.chart.dx_du(u)

    def _inv(self, j, u):
        y = self.chart.from_u(u)
        return self.chart.to_u(self.base._inv(j, y))

    def branch_sign(self, j):
        return self.base.branch_sign(j)

    def pullback(self, rho):
        """Density in u-coordinates of a density rho given in x-coordinates."""

        def rho_u(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(all="ignore"):
                val = rho(self.chart.from_u(u)) * self.chart.dx_du(u)
            return val

        return rho_u


def compactify(inst):
    """Conjugate an unbounded-domain map onto [0, 1] by a fixed algebraic chart.

    The chart is deliberately unrelated to the map's own conjugating function,
    so numerical oracles built on it remain independent of the closed forms.
    """
    if isinstance(inst, CompactifiedMap):
        raise DomainError("map is already compactified")
    if inst.domain.bounded:
        raise DomainError(f"{inst.family} already has a bounded domain; nothing to compactify")
    return CompactifiedMap(inst)
