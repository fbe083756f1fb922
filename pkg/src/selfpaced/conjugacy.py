"""Grid-based concave conjugacy engine.

Functions here operate on SampledFunction objects: real-valued functions
tabulated on a strictly increasing grid, with the concave convention that a
value of -inf marks points outside the effective domain.  The effective
domain must be a contiguous run of grid points, so every object represents a
proper function whose domain is an interval.

The calculus implemented on top of that representation:

  * concave_conjugate  g*(l) = inf_v { v*l - g(v) }
  * sup_convolution    (f (+) g)(x) = sup { f(x1) + g(x2) : x1 + x2 = x }
  * biconjugate        g** (the upper-semicontinuous concave hull of g)
  * subdifferential    supergradient interval of a concave sampled function
  * support_function   inf of <v, l> over a halfspace {v : <v, k> >= b}
  * separable_conjugate  sum of per-coordinate 1-D conjugates

All evaluations are exact for the piecewise-linear interpolant of the
samples: infima of affine-in-v objectives over a polyhedral function are
attained at grid vertices, so the O(N*M) scans below incur no discretization
error beyond the interpolant itself.  Results are deterministic; no state is
shared between calls.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadGrid,
    DimensionMismatch,
    EmptyOverlap,
    NonProper,
    OutsideDomain,
)

NEG_INFINITY = -np.inf

# Output block size for the conjugate scans, keeps peak memory near 16 MB.
_BLOCK = 1024


# ==== grids ===================================================================


def unit_grid(n: int = 2049) -> np.ndarray:
    """Uniform grid on [0, 1] with n points."""
    return np.linspace(0.0, 1.0, n)


def loss_grid(lam: float = 1.0, n: int = 2049, span: float = 8.0) -> np.ndarray:
    """Uniform loss grid on [0, span * lam] with n points."""
    return np.linspace(0.0, span * lam, n)


def graded_unit_grid(n: int = 2049, cut: float = 0.05, lo: float = 1e-9) -> np.ndarray:
    """Grid on [0, 1] refined geometrically near 0.

    One point at 0, about n/4 points in geometric progression on [lo, cut),
    and the rest uniform on [cut, 1].  Penalties whose conjugate argmin decays
    exponentially toward v = 0 (entropy-like penalties at large losses) need
    the sub-uniform resolution near the origin; a uniform grid of the same
    size cannot place a point within ~1e-4 of such an argmin.
    """
    n_log = n // 4
    n_uni = n - n_log - 1
    log_part = np.geomspace(lo, cut, n_log, endpoint=False)
    uni_part = np.linspace(cut, 1.0, n_uni)
    return np.concatenate(([0.0], log_part, uni_part))


# ==== sampled functions =======================================================


@dataclass(frozen=True)
class SampledFunction:
    """A function tabulated on a strictly increasing grid.

    values[i] is the function value at grid[i]; NEG_INFINITY marks points
    outside the effective domain.  At least one value must be finite and the
    finite values must form a contiguous run, so the domain is an interval.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise BadGrid("grid must be 1-D with at least 2 points")
        if not np.all(np.diff(grid) > 0):
            raise BadGrid("grid must be strictly increasing")
        if values.shape != grid.shape:
            raise BadGrid(
                f"values shape {values.shape} does not match grid shape {grid.shape}"
            )
        if np.any(np.isnan(values)) or np.any(values == np.inf):
            raise NonProper("values must be finite or -inf")
        finite = np.isfinite(values)
        if not finite.any():
            raise NonProper("no finite value: function is identically -inf")
        idx = np.flatnonzero(finite)
        if idx[-1] - idx[0] + 1 != idx.size:
            raise NonProper("effective domain must be a contiguous grid interval")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        grid.flags.writeable = False
        values.flags.writeable = False

    # -- domain helpers --------------------------------------------------------

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def domain_indices(self) -> tuple[int, int]:
        idx = np.flatnonzero(self.finite_mask)
        return int(idx[0]), int(idx[-1])

    @property
    def lo(self) -> float:
        return float(self.grid[self.domain_indices[0]])

    @property
    def hi(self) -> float:
        return float(self.grid[self.domain_indices[1]])

    @property
    def max_step(self) -> float:
        return float(np.max(np.diff(self.grid)))

    def interp(self, x):
        """Piecewise-linear evaluation, -inf outside the effective domain."""
        xq = np.asarray(x, dtype=float)
        i0, i1 = self.domain_indices
        fg = self.grid[i0 : i1 + 1]
        fv = self.values[i0 : i1 + 1]
        if fg.size == 1:
            out = np.where(xq == fg[0], fv[0], NEG_INFINITY)
        else:
            out = np.interp(xq, fg, fv)
            out = np.where((xq < fg[0]) | (xq > fg[-1]), NEG_INFINITY, out)
        return float(out) if np.isscalar(x) else out

    # -- serialization ---------------------------------------------------------

    def to_csv(self, path) -> None:
        """Write as CSV with header ``x,value``; -inf is written literally."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,value\n")
            for x, v in zip(self.grid, self.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "SampledFunction":
        """Read a ``x,value`` CSV written by to_csv.

        Raises ValueError with a line-numbered diagnostic on malformed input.
        """
        grid, values = [], []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header] != ["x", "value"]:
                raise ValueError(f"{path}:1: expected header 'x,value', got {header}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
                try:
                    grid.append(float(row[0]))
                    values.append(float(row[1]))
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(np.array(grid), np.array(values))


def _finite_part(g: SampledFunction) -> tuple[np.ndarray, np.ndarray]:
    i0, i1 = g.domain_indices
    return g.grid[i0 : i1 + 1], g.values[i0 : i1 + 1]


# ==== conjugates ==============================================================


def _conjugate_scan(vs: np.ndarray, gs: np.ndarray, out_grid: np.ndarray) -> np.ndarray:
    """min over v of v*l - g(v), evaluated for each l in out_grid."""
    res = np.empty(out_grid.size)
    for start in range(0, out_grid.size, _BLOCK):
        blk = out_grid[start : start + _BLOCK]
        res[start : start + blk.size] = np.min(
            vs[:, None] * blk[None, :] - gs[:, None], axis=0
        )
    return res


def _conjugate_fast(vs: np.ndarray, gs: np.ndarray, out_grid: np.ndarray) -> np.ndarray:
    """Monotone two-pointer scan, valid only for concave inputs.

    For concave g the argmin of v*l - g(v) is non-increasing in l, so one
    pointer sweep over ascending l costs O(N + M) instead of O(N * M).
    """
    res = np.empty(out_grid.size)
    j = vs.size - 1
    for m, l in enumerate(out_grid):
        while j > 0 and vs[j - 1] * l - gs[j - 1] <= vs[j] * l - gs[j]:
            j -= 1
        res[m] = vs[j] * l - gs[j]
    return res


def concave_conjugate(
    g: SampledFunction, out_grid: np.ndarray, method: str = "scan"
) -> SampledFunction:
    """Concave conjugate g*(l) = inf_v { v*l - g(v) } on an explicit out grid.

    The infimum runs over the grid points of g's effective domain, which is
    exact for the piecewise-linear interpolant (the objective is affine in v,
    so the infimum over the interpolant is attained at a vertex).  The result
    is concave, and non-decreasing whenever g's domain lies in [0, inf).

    method="fast" uses the monotone two-pointer sweep; it agrees with the
    scan to machine precision for concave inputs and must not be used
    otherwise.
    """
    out_grid = np.asarray(out_grid, dtype=float)
    if out_grid.ndim != 1 or out_grid.size < 2 or not np.all(np.diff(out_grid) > 0):
        raise BadGrid("out_grid must be 1-D, strictly increasing, len >= 2")
    vs, gs = _finite_part(g)
    if method == "scan":
        vals = _conjugate_scan(vs, gs, out_grid)
    elif method == "fast":
        vals = _conjugate_fast(vs, gs, out_grid)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SampledFunction(out_grid, vals)


def conjugate_value(g: SampledFunction, l: float) -> float:
    """g*(l) at a single point (same scan as concave_conjugate)."""
    vs, gs = _finite_part(g)
    return float(np.min(vs * l - gs))


def biconjugate(g: SampledFunction) -> SampledFunction:
    """g** on g's own grid: the closed concave hull of the samples.

    The intermediate slope grid contains every secant slope of g's finite
    part.  For an input that is already concave, the Fenchel equality at
    those slopes makes the round trip exact up to rounding; for non-concave
    input the result is the concave hull.  Points outside g's domain stay
    at -inf (a bounded slope grid cannot reach the -inf limit itself).
    """
    xs, ys = _finite_part(g)
    i0, i1 = g.domain_indices
    out = np.full(g.grid.size, NEG_INFINITY)
    if xs.size == 1:
        out[i0] = ys[0]
        return SampledFunction(g.grid, out)
    secants = np.diff(ys) / np.diff(xs)
    smin, smax = float(secants.min()), float(secants.max())
    if smin == smax:
        mid = np.array([smin - 1.0, smin, smin + 1.0])
    else:
        mid = np.unique(
            np.concatenate([secants, np.linspace(smin, smax, g.grid.size)])
        )
    star = concave_conjugate(g, mid) if mid.size >= 2 else None
    vs, gs = _finite_part(star)
    out[i0 : i1 + 1] = _conjugate_scan(vs, gs, xs)
    return SampledFunction(g.grid, out)


def sup_convolution(
    f: SampledFunction, g: SampledFunction, out_grid: np.ndarray | None = None
) -> SampledFunction:
    """Supremal convolution sup { f(x1) + g(x2) : x1 + x2 = x } on out_grid.

    Splits are searched over both input grids with piecewise-linear
    evaluation of the partner function, which covers every vertex of the
    piecewise-linear objective: the result is the exact sup-convolution of
    the two interpolants at each output point inside the Minkowski sum of
    the domains.  Raises EmptyOverlap when no output point admits any
    feasible split.
    """
    if out_grid is None:
        lo, hi = f.lo + g.lo, f.hi + g.hi
        if hi > lo:
            out_grid = np.linspace(lo, hi, max(f.grid.size, g.grid.size))
        else:
            out_grid = np.array([lo - 1.0, lo, lo + 1.0])
    out_grid = np.asarray(out_grid, dtype=float)
    if out_grid.ndim != 1 or out_grid.size < 2 or not np.all(np.diff(out_grid) > 0):
        raise BadGrid("out_grid must be 1-D, strictly increasing, len >= 2")

    def one_pass(a: SampledFunction, b: SampledFunction) -> np.ndarray:
        ax, av = _finite_part(a)
        bx, bv = _finite_part(b)
        best = np.full(out_grid.size, NEG_INFINITY)
        for start in range(0, ax.size, _BLOCK):
            axb = ax[start : start + _BLOCK]
            avb = av[start : start + _BLOCK]
            q = out_grid[None, :] - axb[:, None]
            if bx.size == 1:
                bvals = np.where(q == bx[0], bv[0], NEG_INFINITY)
            else:
                bvals = np.interp(q, bx, bv)
                bvals = np.where((q < bx[0]) | (q > bx[-1]), NEG_INFINITY, bvals)
            cand = np.max(avb[:, None] + bvals, axis=0)
            best = np.maximum(best, cand)
        return best

    vals = np.maximum(one_pass(f, g), one_pass(g, f))
    if not np.isfinite(vals).any():
        raise EmptyOverlap("no feasible split at any output grid point")
    return SampledFunction(out_grid, vals)


def separable_conjugate(gs, l) -> float:
    """Sum of per-coordinate conjugates: sum_i g_i*(l_i)."""
    l = np.atleast_1d(np.asarray(l, dtype=float))
    if len(gs) != l.size:
        raise DimensionMismatch(f"{len(gs)} functions but {l.size} loss coordinates")
    return float(sum(conjugate_value(gi, li) for gi, li in zip(gs, l)))


# ==== subdifferentials ========================================================


@dataclass(frozen=True)
class SubgradientInterval:
    """Closed supergradient interval [lower, upper]; endpoints may be +-inf."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    def contains(self, s: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= s <= self.upper + tol


def subdifferential(g: SampledFunction, x: float) -> SubgradientInterval:
    """Supergradient interval of the piecewise-linear interpolant at x.

    For a concave input the interval is [right slope, left slope] from the
    neighbouring grid cells, extended to +-inf at the domain endpoints.
    Raises OutsideDomain when x is not in the closure of the domain.
    """
    xs, ys = _finite_part(g)
    span = g.grid[-1] - g.grid[0]
    tol = 1e-9 * max(1.0, abs(span))
    if x < xs[0] - tol or x > xs[-1] + tol:
        raise OutsideDomain(f"x={x} outside domain [{xs[0]}, {xs[-1]}]")
    if xs.size == 1:
        return SubgradientInterval(-np.inf, np.inf)

    j = int(np.clip(np.searchsorted(xs, x), 0, xs.size - 1))
    if j > 0 and abs(x - xs[j - 1]) <= tol:
        j -= 1
    secant = lambda i: (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
    if abs(x - xs[j]) <= tol:
        left = secant(j - 1) if j > 0 else np.inf
        right = secant(j) if j < xs.size - 1 else -np.inf
        return SubgradientInterval(float(right), float(left))
    s = secant(j - 1)  # x strictly inside cell (j-1, j)
    return SubgradientInterval(float(s), float(s))


# ==== halfspaces ==============================================================


@dataclass(frozen=True)
class Halfspace:
    """The set { v : <v, k> >= b }."""

    k: np.ndarray
    b: float = 0.0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        if k.ndim != 1 or not np.any(k != 0):
            raise ValueError("halfspace normal k must be a nonzero 1-D vector")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "b", float(self.b))
        k.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.k.size

    def contains(self, v, tol: float = 1e-9):
        v = np.asarray(v, dtype=float)
        return v @ self.k >= self.b - tol


def support_function(h: Halfspace, l, rel_tol: float = 1e-9) -> float:
    """inf of <v, l> over the halfspace { v : <v, k> >= b }.

    Finite only when l is a nonnegative multiple of k, in which case the
    infimum is beta * b for l = beta * k; otherwise the linear form is
    unbounded below on the halfspace and the value is -inf.
    """
    l = np.asarray(l, dtype=float)
    if l.shape != h.k.shape:
        raise DimensionMismatch(f"l has shape {l.shape}, k has shape {h.k.shape}")
    beta = float(l @ h.k) / float(h.k @ h.k)
    resid = l - beta * h.k
    scale = max(1.0, float(np.linalg.norm(l)))
    if np.linalg.norm(resid) <= rel_tol * scale and beta >= -rel_tol:
        return max(beta, 0.0) * h.b
    return NEG_INFINITY
