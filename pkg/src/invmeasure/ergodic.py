"""Orbits and Lyapunov exponents.

The exponent is estimated two ways: as a time average of ln|T'| along one
orbit, and as the space average of ln|T'| against a closed-form invariant
density.  For a map conjugate to an r-branch piecewise-linear map both give
ln r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .conjugacy import invariant_density
from .errors import DomainError, NonIntegrableError, TooManySkipsError
from .orbits import _Guard, exact_orbit, orbit, seed_point, uses_exact_orbit
from .quadrature import integrate_on_domain

SKIP_FRACTION = 1e-3


@dataclass(frozen=True)
class OrbitStats:
    n_steps: int
    burn_in: int
    seed: int | None
    lyapunov_sum: float
    final_x: float
    skipped: int = 0

    def __post_init__(self):
        if not (self.n_steps > self.burn_in >= 0):
            raise ValueError("need n_steps > burn_in >= 0")

    @property
    def counted(self):
        return self.n_steps - self.burn_in - self.skipped

    @property
    def lyapunov(self):
        return self.lyapunov_sum / self.counted


def iterate(T, x0, n, orbit=False):
    """x_n = T^n(x0), or the whole orbit x_0 .. x_n with ``orbit=True``.

    A Fraction x0 on renyi/nr is iterated exactly and Fractions are returned.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if isinstance(x0, Fraction) and uses_exact_orbit(T):
        pts = [x0]
        x = x0
        for _ in range(n):
            y = T.r * x
            whole = math.floor(y)
            frac = y - whole
            x = 1 - frac if (T.family == "nr" and whole % 2 == 1) else frac
            pts.append(x)
        return pts if orbit else x
    if not bool(T.domain.contains(float(x0))):
        raise DomainError(f"x0={float(x0)!r} outside {T.domain}")
    guard = _Guard(T)
    x = guard.fix(float(x0), 0)
    pts = [x]
    for i in range(1, n + 1):
        x = guard.fix(T.f_scalar(x), i)
        pts.append(x)
    return np.array(pts) if orbit else x


def _log_derivative_terms(T, xs):
    """ln|T'(x)| for each x, with breakpoints and critical points masked out."""
    skip = np.zeros(xs.shape, dtype=bool)
    for bp in T.breakpoints:
        skip |= xs == bp
    with np.errstate(all="ignore"):
        d = np.abs(np.asarray(T._df(np.where(skip, np.nan, xs)), dtype=float))
    skip |= ~(d > 0) | ~np.isfinite(d)
    return np.log(np.where(skip, 1.0, d)), skip


def birkhoff_stats(T, x0=None, n_steps=10**6, burn_in=1000, seed=0):
    """Accumulate ln|T'| along an orbit after ``burn_in`` discarded steps.

    Iterates on a breakpoint (where T' is undefined or zero) are skipped and
    counted; more than a 0.1% share raises TooManySkipsError.
    """
    if x0 is None:
        x0 = seed_point(T, seed)
    else:
        seed = None
    if uses_exact_orbit(T):
        xs, final = exact_orbit(T, x0, n_steps, burn_in)
        # slope is constant, and a breakpoint k/r is never reached exactly
        # because the orbit would then be fixed afterwards
        terms = np.full(xs.shape, math.log(T.r))
        skip = np.zeros(xs.shape, dtype=bool)
        final = float(final)
    else:
        xs, final = orbit(T, x0, n_steps, burn_in)
        terms, skip = _log_derivative_terms(T, xs)
    skipped = int(skip.sum())
    if skipped > SKIP_FRACTION * (n_steps - burn_in):
        raise TooManySkipsError(f"{skipped} of {n_steps - burn_in} iterates fell on breakpoints")
    total = math.fsum(terms[~skip])
    return OrbitStats(n_steps, burn_in, seed, total, final, skipped)


def lyapunov_birkhoff(T, x0=None, n_steps=10**6, burn_in=1000, seed=0):
    """Time average of ln|T'| along one orbit."""
    if n_steps - burn_in < 10**5:
        raise ValueError("at least 10^5 post-burn-in steps are required")
    return birkhoff_stats(T, x0, n_steps, burn_in, seed).lyapunov


def lyapunov_quadrature(T, rho=None):
    """Space average int ln|T'(x)| rho(x) dx against the invariant density.

    The integral is split at the breakpoints, where ln|T'| may have a
    logarithmic singularity, and taken in compactified coordinates on
    unbounded domains.
    """
    if rho is None:
        rho = invariant_density(T)

    def integrand(x):
        with np.errstate(all="ignore"):
            x = np.asarray(x, dtype=float)
            return np.log(np.abs(T._df(x))) * np.asarray(rho(x), dtype=float)

    val = integrate_on_domain(integrand, T.domain, T.domain.hi, T.breakpoints)
    if not math.isfinite(val):
        raise NonIntegrableError(f"ln|T'| rho is not integrable for {T.family}")
    return val

