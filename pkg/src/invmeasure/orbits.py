"""Orbit generation shared by the histogram oracle and the Lyapunov estimates.

Piecewise-linear maps with integer slope (renyi, nr) are iterated in exact
rational arithmetic: every double is a dyadic rational, so a floating-point
orbit of x -> 2x mod 1 reaches 0 after at most 53 steps.  Seeded starting
points for these maps are k/Q with Q a safe prime, which gives orbits of
period at least (Q - 1) / 2.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import DegenerateOrbitError, DomainError, OrbitEscapeError, SingularityError
from .maps import Compactification

# safe prime: (Q - 1) / 2 is prime as well
SAFE_PRIME = 4611686018427377339
DRIFT_GUARD = 1e-12
SINGULAR_GUARD = 1e-12


def uses_exact_orbit(T):
    return T.family in ("renyi", "nr") and getattr(T, "piecewise_linear", False)


def seed_point(T, seed):
    """Generic starting point drawn from the seeded generator.

    Returns a Fraction k/Q for renyi/nr, a float otherwise.
    """
    rng = np.random.default_rng(seed)
    if uses_exact_orbit(T):
        return Fraction(int(rng.integers(1, SAFE_PRIME)), SAFE_PRIME)
    # stay clear of the ends, where the lattes and boole maps are singular
    u = 0.05 + 0.9 * float(rng.random())
    if T.domain.bounded:
        return T.domain.lo + (T.domain.hi - T.domain.lo) * u
    return float(Compactification(T.domain).from_u(u))


def _check_start(T, x0):
    if not bool(T.domain.contains(float(x0))):
        raise DomainError(f"x0={float(x0)!r} outside the domain of {T.family}")


def _exact_step(r, fold, k, q):
    rk = r * k
    n, rem = divmod(rk, q)
    if fold and n % 2 == 1:
        return q - rem
    return rem


def exact_orbit(T, x0, n_steps, burn_in=0):
    """Iterates x_{burn_in+1} .. x_{n_steps} as floats, plus the exact final point.

    Raises DegenerateOrbitError when the orbit lands on a fixed point or the
    denominator of x0 is too small to support n_steps distinct iterates.
    """
    x0 = Fraction(x0)
    _check_start(T, x0)
    k, q = x0.numerator, x0.denominator
    if q <= n_steps:
        raise DegenerateOrbitError(
            f"x0 = {x0} has denominator {q}; its orbit has period < {q}, too short for {n_steps} steps"
        )
    r, fold = T.r, T.family == "nr"
    out = []
    append = out.append
    for i in range(n_steps):
        nxt = _exact_step(r, fold, k, q)
        if nxt == k:
            raise DegenerateOrbitError(
                f"orbit of {x0} reached the fixed point {Fraction(k, q)} after {i} steps"
            )
        k = nxt
        if i >= burn_in:
            append(k)
    xs = np.array(out, dtype=np.int64) / float(q) if q < 2**63 else np.array([k_ / q for k_ in out])
    return xs, Fraction(k, q)


class _Guard:
    """Drift re-projection and singularity detection for floating-point orbits."""

    def __init__(self, T):
        self.T = T
        self.lo, self.hi = T.domain.lo, T.domain.hi
        # singular points strictly inside the domain; an endpoint singularity is
        # only hit when an iterate lands on it exactly
        self.interior = [s for s in T.singularities if self.lo < s < self.hi]
        self.endpoints = [s for s in T.singularities if s in (self.lo, self.hi)]

    def fix(self, x, step):
        lo, hi = self.lo, self.hi
        if not (lo <= x <= hi):
            if not math.isfinite(x):
                raise OrbitEscapeError(f"{self.T.family}: iterate {step} is {x!r}")
            tol = DRIFT_GUARD * max(1.0, abs(x))
            if lo - tol <= x < lo:
                x = lo
            elif hi < x <= hi + tol:
                x = hi
            else:
                raise OrbitEscapeError(f"{self.T.family}: iterate {step} = {x!r} left {self.T.domain}")
        for s in self.interior:
            if abs(x - s) < SINGULAR_GUARD:
                raise SingularityError(f"{self.T.family}: iterate {step} = {x!r} hit the singularity {s!r}")
        for s in self.endpoints:
            if x == s:
                raise SingularityError(f"{self.T.family}: iterate {step} landed on the singular endpoint {s!r}")
        return x


def float_orbit(T, x0, n_steps, burn_in=0, check_fixed=True):
    """Iterates x_{burn_in+1} .. x_{n_steps} of a floating-point orbit.

    Landing exactly on a repelling fixed point (rounding artefact or a
    preperiodic seed) raises DegenerateOrbitError when ``check_fixed`` is set;
    convergence to an attracting fixed point is genuine dynamics and is kept.
    """
    x = float(x0)
    _check_start(T, x)
    guard = _Guard(T)
    x = guard.fix(x, 0)
    f, fix = T.f_scalar, guard.fix
    out = []
    append = out.append
    for i in range(1, n_steps + 1):
        nxt = fix(f(x), i)
        if check_fixed and nxt == x and abs(T.df_scalar(x)) >= 1.0:
            raise DegenerateOrbitError(
                f"{T.family}: orbit reached the repelling fixed point {x!r} after {i} steps"
            )
        x = nxt
        if i > burn_in:
            append(x)
    return np.array(out, dtype=float), x


def orbit(T, x0, n_steps, burn_in=0):
    """Post-burn-in iterates and final point, exact or floating-point as appropriate."""
    if n_steps <= burn_in:
        raise ValueError(f"n_steps={n_steps} must exceed burn_in={burn_in}")
    if uses_exact_orbit(T):
        return exact_orbit(T, x0, n_steps, burn_in)
    return float_orbit(T, x0, n_steps, burn_in)
