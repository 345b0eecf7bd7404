"""Closed-form hat functions and the lattice interpolant they generate.

Everything here is evaluated directly from the formulas, never through a
network, so it serves as the reference the constructed networks are
checked against.  Batched inputs are arrays of shape (N, n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

UNIT = "unit"            # declared support [0, 1]^n
SYMMETRIC = "symmetric"  # declared support [-1, 1]^n


def g1(x):
    """Tent function ``max(0, 1 - |x|)``."""
    return np.maximum(1.0 - np.abs(np.asarray(x, dtype=np.float64)), 0.0)


def gn(x):
    """Tensor-product tent: product of :func:`g1` over the last axis."""
    return np.prod(g1(x), axis=-1)


@dataclass(frozen=True)
class LatticeIndex:
    coords: tuple[int, ...]
    k: int
    half: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        lo = 0 if self.half else -self.k
        if any(c < lo or c > self.k for c in self.coords):
            raise ValueError(f"{self.coords} outside lattice [{lo}, {self.k}]^n")

    @property
    def point(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64) / self.k


def lattice_range(k: int, half: bool = False) -> range:
    return range(0 if half else -k, k + 1)


def lattice(n: int, k: int, half: bool = False) -> np.ndarray:
    """All lattice indices as an int array of shape ((2k+1)^n or (k+1)^n, n).

    Ordering is lexicographic with the last coordinate varying fastest.
    """
    axis = list(lattice_range(k, half))
    return np.array(list(itertools.product(axis, repeat=n)), dtype=np.int64).reshape(-1, n)


@dataclass(frozen=True)
class TargetFunction:
    name: str
    dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    deriv_bounds: tuple[float, ...]
    sup_bound: float
    support: str = UNIT
    derivative: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.deriv_bounds) != self.dim:
            raise ValueError("need one derivative bound per coordinate")
        if self.support not in (UNIT, SYMMETRIC):
            raise ValueError(f"unknown support {self.support!r}")

    def __call__(self, x) -> np.ndarray:
        """Evaluate on (N, dim) or a single point; zero outside the declared support."""
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        lo = 0.0 if self.support == UNIT else -1.0
        inside = np.all((pts >= lo) & (pts <= 1.0), axis=-1)
        out = np.zeros(pts.shape[0])
        if inside.any():
            out[inside] = self.evaluator(pts[inside])
        return out[0] if single else out

    @property
    def bounds(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.support == UNIT else (-1.0, 1.0)

    @property
    def max_deriv(self) -> float:
        return max(self.deriv_bounds)


def _active_cells(x: np.ndarray, k: int, half: bool):
    """Yield (index array (N, n), weight (N,)) for the 2^n hats that can be nonzero at x.

    When k*x_j is an integer the upper neighbour gets weight exactly 0, so
    no tie-breaking is needed.  Indices outside the lattice get weight 0.
    """
    kx = k * x
    base = np.floor(kx).astype(np.int64)
    lo = 0 if half else -k
    n = x.shape[-1]
    for offs in itertools.product((0, 1), repeat=n):
        idx = base + np.asarray(offs, dtype=np.int64)
        w = gn(kx - idx)
        valid = np.all((idx >= lo) & (idx <= k), axis=-1)
        yield idx, np.where(valid, w, 0.0)


def _as_points(x, n: int | None = None):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if n is not None and pts.shape[-1] != n:
        raise ValueError(f"point dimension {pts.shape[-1]} does not match {n}")
    return pts, single


def interpolant(f: TargetFunction, k: int, x, half: bool = False):
    """Lattice interpolant ``sum_i f(i/k) gn(kx - i)`` via active-cell enumeration."""
    pts, single = _as_points(x, f.dim)
    total = np.zeros(pts.shape[0])
    for idx, w in _active_cells(pts, k, half):
        nz = w != 0.0
        if nz.any():
            total[nz] += f(idx[nz] / k) * w[nz]
    return total[0] if single else total


def interpolant_naive(f: TargetFunction, k: int, x, half: bool = False):
    """Full lattice sum over every index; for checking :func:`interpolant`."""
    pts, single = _as_points(x, f.dim)
    idx = lattice(f.dim, k, half)
    fv = f(idx / k)
    w = gn(k * pts[:, None, :] - idx[None, :, :])
    out = w @ fv
    return out[0] if single else out


def partition_sum(n: int, k: int, x, half: bool = False):
    pts, single = _as_points(x, n)
    total = np.zeros(pts.shape[0])
    for _, w in _active_cells(pts, k, half):
        total += w
    return total[0] if single else total


def moment_sum(n: int, k: int, x, half: bool = False):
    """``sum_i sum_j |(i_j/k - x_j) gn(kx - i)|``, bounded by n/(2k) on the cube."""
    pts, single = _as_points(x, n)
    total = np.zeros(pts.shape[0])
    for idx, w in _active_cells(pts, k, half):
        total += np.abs(idx / k - pts).sum(axis=-1) * w
    return total[0] if single else total


def theorem1_bound(f: TargetFunction, k: int) -> float:
    return f.max_deriv * f.dim / (2.0 * k)


def theorem1_gap(f: TargetFunction, k: int, grid, half: bool = False) -> tuple[float, float]:
    """Sup over ``grid`` of |f - interpolant| together with max_j|d_j f| n / (2k)."""
    pts, _ = _as_points(grid, f.dim)
    gap = np.abs(f(pts) - interpolant(f, k, pts, half))
    return float(gap.max(initial=0.0)), theorem1_bound(f, k)
