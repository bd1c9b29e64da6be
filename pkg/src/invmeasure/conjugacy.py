"""Conjugating functions, density transport and invariant measures.

For a map T with T(h(theta)) = h(S(theta)), S piecewise linear with uniform
invariant density, the invariant density of T is 1 / |h'(h^{-1}(x))| and the
cumulative measure from the left end of the domain is h^{-1}(x) (or
1 - h^{-1}(x) when h is decreasing).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import elliptic
from .errors import DomainError, NoConjugatorError
from .maps import IntervalMap, Interval, make_map

_EXCLUDE = 1e-12


@dataclass(frozen=True)
class ConjugacyPair:
    h: Callable
    h_inv: Callable
    h_prime: Callable
    base: IntervalMap
    target: IntervalMap

    @property
    def increasing(self):
        return self.h_prime(0.5) > 0


@dataclass(frozen=True)
class DensityModel:
    """Normalized closed-form invariant density ``norm * unnormalized(x)``."""

    family: str
    domain: Interval
    unnormalized: Callable
    norm: float
    cdf: Callable | None = None

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.norm * self.unnormalized(np.asarray(x, dtype=float))
        return float(val) if scalar else val


def _logistic_pair(T):
    half_pi = 0.5 * math.pi
    return ConjugacyPair(
        h=lambda t: np.sin(half_pi * np.asarray(t)) ** 2,
        h_inv=lambda x: np.arcsin(np.sqrt(np.asarray(x))) / half_pi,
        h_prime=lambda t: half_pi * np.sin(math.pi * np.asarray(t)),
        base=make_map("nr", r=2),
        target=T,
    )


def _chebyshev_pair(T):
    return ConjugacyPair(
        h=lambda t: np.cos(math.pi * np.asarray(t)),
        h_inv=lambda x: np.arccos(np.asarray(x)) / math.pi,
        h_prime=lambda t: -math.pi * np.sin(math.pi * np.asarray(t)),
        base=make_map("nr", r=T.r),
        target=T,
    )


def _sn2_pair(T):
    m = T.m
    K = elliptic.complete_k(m)

    def h(t):
        return elliptic.jacobi_sn(K * np.asarray(t, dtype=float), m) ** 2

    def h_prime(t):
        sn, cn, dn = elliptic.jacobi_sncndn(K * np.asarray(t, dtype=float), m)
        return 2.0 * K * sn * cn * dn

    def h_inv(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return elliptic.jacobi_sn_inv(np.sqrt(x), m) / K

    return ConjugacyPair(h, h_inv, h_prime, make_map("nr", r=2), T)


def _lattes_pair(T):
    ctx = T.ctx
    w = ctx.omega1
    return ConjugacyPair(
        h=lambda t: elliptic.weierstrass_p(w * np.asarray(t, dtype=float), ctx),
        h_inv=lambda x: elliptic.weierstrass_p_inv(x, ctx) / w,
        h_prime=lambda t: w * elliptic.weierstrass_p_prime(w * np.asarray(t, dtype=float), ctx),
        base=make_map("nr", r=2),
        target=T,
    )


def _cauchy_pair(T):
    def h(t):
        a = math.pi * np.asarray(t, dtype=float)
        return -np.cos(a) / np.sin(a)

    return ConjugacyPair(
        h=h,
        h_inv=lambda x: 0.5 + np.arctan(np.asarray(x, dtype=float)) / math.pi,
        h_prime=lambda t: math.pi / np.sin(math.pi * np.asarray(t, dtype=float)) ** 2,
        base=make_map("renyi", r=2),
        target=T,
    )


_PAIRS = {
    "logistic": _logistic_pair,
    "chebyshev": _chebyshev_pair,
    "sn2": _sn2_pair,
    "lattes": _lattes_pair,
    "cauchy_doubling": _cauchy_pair,
}


def conjugator(T):
    """Conjugating function h with T(h(theta)) = h(S(theta)) for a catalog map."""
    try:
        build = _PAIRS[T.family]
    except KeyError:
        raise NoConjugatorError(
            f"{T.family} has no catalog conjugator"
            + (" (it is its own piecewise-linear base)" if T.family in ("renyi", "nr") else "")
        ) from None
    return build(T)


def theta_grid(n, base, margin=0.0):
    """Midpoint grid on (0, 1) without the fold points k/r of the base map."""
    theta = (np.arange(n) + 0.5) / n
    keep = (theta > margin) & (theta < 1.0 - margin)
    for bp in base.breakpoints:
        keep &= np.abs(theta - bp) > max(margin, _EXCLUDE)
    return theta[keep]


def conjugacy_residual(pair, grid_size=1000, theta_range=None):
    """max |T(h(theta)) - h(S(theta))|, relative to |h(S(theta))| wherever that exceeds 1."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    if theta_range is None:
        theta = theta_grid(grid_size, pair.base)
    else:
        theta = np.linspace(theta_range[0], theta_range[1], grid_size)
        keep = (theta > _EXCLUDE) & (theta < 1.0 - _EXCLUDE)
        for bp in pair.base.breakpoints:
            keep &= np.abs(theta - bp) > _EXCLUDE
        theta = theta[keep]
    lhs = pair.target(pair.h(theta))
    rhs = pair.h(pair.base(theta))
    scale = np.maximum(1.0, np.abs(rhs))
    return float(np.max(np.abs(lhs - rhs) / scale))


# ---------------------------------------------------------------------------
# closed-form densities
# ---------------------------------------------------------------------------


def pushforward_density(pair):
    """Invariant density of the target map transported from the uniform base density."""
    T = pair.target
    fam = T.family
    if fam == "logistic":
        dens = DensityModel(fam, T.domain, lambda x: 1.0 / (math.pi * np.sqrt(x * (1.0 - x))), 1.0)
    elif fam == "chebyshev":
        dens = DensityModel(fam, T.domain, lambda x: 1.0 / (math.pi * np.sqrt((1.0 - x) * (1.0 + x))), 1.0)
    elif fam == "sn2":
        m = T.m
        dens = DensityModel(
            fam,
            T.domain,
            lambda x: 1.0 / np.sqrt(x * (1.0 - x) * (1.0 - m * x)),
            1.0 / (2.0 * elliptic.complete_k(m)),
        )
    elif fam == "lattes":
        ctx = T.ctx
        # factored cubic keeps accuracy next to e1
        dens = DensityModel(
            fam,
            T.domain,
            lambda x: 1.0 / np.sqrt(4.0 * (x - ctx.e1) * (x - ctx.e2) * (x - ctx.e3)),
            1.0 / ctx.omega1,
        )
    elif fam == "cauchy_doubling":
        dens = DensityModel(fam, T.domain, lambda x: 1.0 / (math.pi * (1.0 + x * x)), 1.0)
    else:
        raise NoConjugatorError(f"no closed-form pushforward for {fam}")
    return DensityModel(dens.family, dens.domain, dens.unnormalized, dens.norm, lambda x: measure_cdf(pair, x))


def transported_density(pair):
    """The generic transport 1 / |h'(h^{-1}(x))| without any family closed form."""

    def rho(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 1.0 / np.abs(pair.h_prime(pair.h_inv(x)))

    return rho


def _uniform_density(T):
    return DensityModel(
        T.family,
        T.domain,
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        1.0,
        lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0) * 1.0,
    )


def invariant_density(T):
    """Closed-form invariant density of any density-bearing catalog map."""
    if T.family in ("renyi", "nr"):
        return _uniform_density(T)
    if T.family == "boole_lft":
        raise NoConjugatorError(
            "boole_lft: a hyperbolic linear fractional map has an attracting fixed point, "
            "so no absolutely continuous invariant density is available"
        )
    return pushforward_density(conjugator(T))


def measure_cdf(pair, x):
    """Invariant measure of the part of the domain left of x."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if not np.all(pair.target.domain.contains(x)):
        raise DomainError(f"x outside the domain {pair.target.domain}")
    lo, hi = pair.target.domain.lo, pair.target.domain.hi
    x = np.clip(x, lo, hi)
    theta = pair.h_inv(x)
    mu = theta if pair.increasing else 1.0 - theta
    mu = np.clip(mu, 0.0, 1.0)
    return float(mu) if scalar else mu


def measure_grid(T, n=1000, margin=1e-4):
    """Evaluation points equispaced in the measure coordinate.

    Uses the conjugating function when there is one, so unbounded domains and
    endpoint singularities are sampled evenly; piecewise-linear maps get plain
    midpoints.  Points closer than ``margin`` (in x) to a finite domain end, a
    branch boundary or a singularity are dropped.
    """
    try:
        pair = conjugator(T)
    except NoConjugatorError:
        if not T.domain.bounded:
            raise
        x = T.domain.lo + (T.domain.hi - T.domain.lo) * (np.arange(n) + 0.5) / n
    else:
        x = np.sort(pair.h(theta_grid(n, pair.base)))
    avoid = [v for v in (T.domain.lo, T.domain.hi) if math.isfinite(v)]
    avoid += list(T.breakpoints) + list(T.singularities)
    keep = np.ones(x.shape, dtype=bool)
    for v in avoid:
        keep &= np.abs(x - v) > margin
    return x[keep]
