"""Numerical oracle for invariant densities, independent of the closed forms.

Frobenius-Perron residuals, Ulam's discretization of the transfer operator
with its stationary vector, orbit histograms and L1 distances between grid
densities.  Unbounded maps are handled in the coordinate of a fixed algebraic
compactification of their domain.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import DomainError, DomainMismatchError, NonConvergenceError
from .maps import Compactification, CompactifiedMap, compactify
from .orbits import orbit, seed_point
from .quadrature import cell_averages

_MASS_TOL = 1e-12
SINGULAR_SHIFT = 1e-9


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Piecewise-constant density on n equal cells of [lo, hi].

    When ``chart`` is set the cells live in the compactified coordinate u and
    ``values`` is a density in u.
    """

    lo: float
    hi: float
    values: np.ndarray
    chart: Compactification | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("values must be a non-empty 1-d array")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite and nonnegative")
        mass = math.fsum(vals * self.width)
        if abs(mass - 1.0) > _MASS_TOL:
            raise ValueError(f"grid density must have unit mass, got {mass!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_weights(cls, lo, hi, weights, chart=None):
        """Density whose cell masses are proportional to ``weights``."""
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0:
            raise ValueError("weights have zero total")
        n = w.size
        return cls(lo, hi, w / total * n / (hi - lo), chart)

    @property
    def n(self):
        return self.values.size

    @property
    def width(self):
        return (self.hi - self.lo) / np.asarray(self.values).size

    @property
    def edges(self):
        return np.linspace(self.lo, self.hi, self.n + 1)

    @property
    def centers(self):
        return self.lo + self.width * (np.arange(self.n) + 0.5)

    @property
    def masses(self):
        return self.values * self.width

    def same_grid(self, other):
        kind = self.chart.kind if self.chart is not None else None
        other_kind = other.chart.kind if other.chart is not None else None
        return (self.lo, self.hi, self.n, kind) == (other.lo, other.hi, other.n, other_kind)

    def coarsen(self, n):
        """Merge groups of adjacent cells into n cells (n must divide the cell count)."""
        if n <= 0 or self.n % n:
            raise ValueError(f"cannot coarsen {self.n} cells into {n}")
        masses = self.masses.reshape(n, self.n // n).sum(axis=1)
        return GridDensity.from_weights(self.lo, self.hi, masses, self.chart)

    def x_density(self):
        """(cell centres, density values) in the original x coordinate."""
        c = self.centers
        if self.chart is None:
            return c, self.values.copy()
        return self.chart.from_u(c), self.values * self.chart.du_dx(self.chart.from_u(c))


@dataclass(eq=False)
class UlamOperator:
    """Row-stochastic Ulam matrix P(i -> j) on n equal cells of [lo, hi]."""

    n: int
    rows: sparse.csr_matrix
    lo: float
    hi: float
    chart: Compactification | None = None
    stationary: GridDensity | None = None
    iterations: int | None = None
    samples_per_cell: int = 0
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def row_sums(self):
        return np.asarray(self.rows.sum(axis=1)).ravel()


def _view(T):
    if isinstance(T, CompactifiedMap) or T.domain.bounded:
        return T
    return compactify(T)


def fp_residual(T, rho, grid):
    """max over the grid of |rho(x) - sum_j rho(x_j) / |T'(x_j)||, x_j the branch preimages."""
    x = np.asarray(grid, dtype=float)
    total = np.zeros_like(x)
    for j in range(1, T.r + 1):
        xj = T.inverse_branch(j, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            total += np.asarray(rho(xj), dtype=float) / np.abs(T.deriv(xj))
    with np.errstate(invalid="ignore"):
        return float(np.max(np.abs(np.asarray(rho(x), dtype=float) - total)))


def _sample_points(lo, width, cells, k, jitter):
    # stratified: sample s of cell i lies in [i + s/k, i + (s + 1)/k) * width
    offs = (np.arange(k)[None, :] + jitter) / k
    return lo + width * (cells[:, None] + offs)


def _shift_off_singularities(x, singular, width):
    for s in singular:
        near = np.abs(x - s) < SINGULAR_SHIFT * width
        if np.any(near):
            x = np.where(near, np.where(x < s, s - SINGULAR_SHIFT * width, s + SINGULAR_SHIFT * width), x)
    return x


def _landing_cells(view, x, lo, hi, n):
    with np.errstate(all="ignore"):
        y = np.asarray(view._f(x), dtype=float)
    if np.any(np.isnan(y)):
        raise DomainError(f"{view.family}: map undefined at an Ulam sample point")
    width = (hi - lo) / n
    j = np.floor((np.clip(y, lo, hi) - lo) / width)
    return np.clip(j, 0, n - 1).astype(np.int64)


def ulam_matrix(T, n, samples_per_cell=64, seed=0, workers=1):
    """Ulam discretization of the transfer operator of T on n cells.

    Each cell gets ``samples_per_cell`` stratified, jittered sample points; the
    fraction of them landing in cell j is P(i -> j).  Unbounded maps are taken
    through ``compactify`` first.  Assembly may be split over ``workers``
    threads; the result does not depend on the split.
    """
    if n < 16:
        raise ValueError(f"n={n} cells; at least 16 required")
    if samples_per_cell < 32:
        raise ValueError(f"samples_per_cell={samples_per_cell}; at least 32 required")
    if workers < 1:
        raise ValueError("workers must be positive")
    view = _view(T)
    lo, hi = view.domain.lo, view.domain.hi
    width = (hi - lo) / n
    k = samples_per_cell
    jitter = np.random.default_rng(seed).random((n, k))
    singular = tuple(view.singularities)

    def assemble(cells):
        x = _sample_points(lo, width, cells, k, jitter[cells])
        x = _shift_off_singularities(x, singular, width)
        return _landing_cells(view, x.ravel(), lo, hi, n)

    chunks = np.array_split(np.arange(n), workers)
    if workers == 1:
        cols = [assemble(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(assemble, chunks))
    col = np.concatenate(cols)
    row = np.repeat(np.arange(n, dtype=np.int64), k)
    counts = sparse.coo_matrix((np.ones(col.size), (row, col)), shape=(n, n)).tocsr()
    counts.sum_duplicates()
    counts.sort_indices()
    sums = np.asarray(counts.sum(axis=1)).ravel()
    counts.data /= np.repeat(sums, np.diff(counts.indptr))
    chart = view.chart if isinstance(view, CompactifiedMap) else None
    return UlamOperator(n, counts, lo, hi, chart, samples_per_cell=k, seed=seed)


def stationary_density(op, tol=1e-12, max_iters=100_000):
    """Fixed point p = p P by power iteration from the uniform vector.

    Stops when the L1 change between successive iterates drops below ``tol``.
    The result is stored on ``op`` and returned.
    """
    pt = op.rows.T.tocsr()
    p = np.full(op.n, 1.0 / op.n)
    change = math.inf
    for it in range(1, max_iters + 1):
        nxt = pt @ p
        nxt /= math.fsum(nxt)
        change = float(np.abs(nxt - p).sum())
        p = nxt
        if change < tol:
            dens = GridDensity.from_weights(op.lo, op.hi, p, op.chart)
            op.stationary = dens
            op.iterations = it
            return dens
    raise NonConvergenceError(
        f"power iteration did not reach L1 change {tol:g} in {max_iters} iterations",
        last_change=change,
    )


def histogram_density(T, x0=None, n_steps=10**6, burn_in=1000, n_bins=256, seed=0):
    """Bin frequencies of one orbit, as a density on n_bins equal cells.

    Without ``x0`` a generic starting point is drawn from ``seed``.  Unbounded
    maps are binned in the compactified coordinate.
    """
    if n_steps - burn_in < 10**4:
        raise ValueError("at least 10^4 post-burn-in steps are required")
    if x0 is None:
        x0 = seed_point(T, seed)
    xs, _ = orbit(T, x0, n_steps, burn_in)
    if T.domain.bounded:
        lo, hi, chart, v = T.domain.lo, T.domain.hi, None, xs
    else:
        chart = Compactification(T.domain)
        lo, hi, v = 0.0, 1.0, chart.to_u(xs)
    idx = np.clip(np.floor((v - lo) / (hi - lo) * n_bins), 0, n_bins - 1).astype(np.int64)
    counts = np.bincount(idx, minlength=n_bins)
    return GridDensity.from_weights(lo, hi, counts, chart)


def l1_distance(a, b):
    """sum_i |a_i - b_i| * width over the cells of a.

    ``b`` is another GridDensity on the same grid or a callable density in the
    original x coordinate; a callable is averaged over each cell by the
    5-point Gauss rule (after transformation to u on compactified grids).
    """
    if isinstance(b, GridDensity):
        if not a.same_grid(b):
            raise DomainMismatchError(
                f"grids differ: [{a.lo}, {a.hi}] x {a.n} vs [{b.lo}, {b.hi}] x {b.n}"
            )
        bv = b.values
    elif callable(b):
        if a.chart is None:
            f = b
        else:
            chart = a.chart

            def f(u):
                x = chart.from_u(u)
                return np.asarray(b(x), dtype=float) * chart.dx_du(u)

        bv = cell_averages(f, a.lo, a.hi, a.n)
    else:
        raise TypeError("b must be a GridDensity or a callable")
    return math.fsum(np.abs(a.values - bv) * a.width)
