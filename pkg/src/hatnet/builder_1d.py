"""Exact two-hidden-layer network for the one-dimensional lattice interpolant."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hat_basis import SYMMETRIC, TargetFunction, lattice_range
from .network_ir import NetworkIR, SparseAffine

# each hat is relu(t - 1) - 2 relu(t) + relu(t + 1); rows are emitted in the
# order (t - 1, t, t + 1) with t = kx - i
HAT_OFFSETS = (-1.0, 0.0, 1.0)
HAT_COEFFS = (1.0, -2.0, 1.0)


def make_hat_gadget() -> NetworkIR:
    first = SparseAffine.from_triplets(3, 1, [(r, 0, 1.0) for r in range(3)], HAT_OFFSETS)
    second = SparseAffine.from_triplets(1, 3, [(0, c, w) for c, w in enumerate(HAT_COEFFS)])
    return NetworkIR((first, second))


def hat_layers(n: int, k: int, half: bool = False) -> tuple[SparseAffine, SparseAffine]:
    """Layers mapping x in R^n to the hat values g1(k x_j - i), coordinate-major.

    Output unit ``j * len(lattice) + p`` holds g1(k x_j - i_p) where i_p is the
    p-th lattice offset in increasing order.
    """
    offsets = list(lattice_range(k, half))
    size = len(offsets)
    trip1, bias1, trip2 = [], [], []
    for j in range(n):
        for p, i in enumerate(offsets):
            unit = j * size + p
            for t, shift in enumerate(HAT_OFFSETS):
                row = 3 * unit + t
                trip1.append((row, j, float(k)))
                bias1.append(shift - i)
                trip2.append((unit, row, HAT_COEFFS[t]))
    first = SparseAffine.from_triplets(3 * n * size, n, trip1, bias1)
    second = SparseAffine.from_triplets(n * size, 3 * n * size, trip2)
    return first, second


def lattice_size(k: int, half: bool) -> int:
    return k + 1 if half else 2 * k + 1


def widths_1d(k: int, half: bool = False) -> tuple[int, ...]:
    c = lattice_size(k, half)
    return (1, 3 * c, c, 1)


def build_1d(f: TargetFunction, k: int, half: bool = False) -> NetworkIR:
    """Network with widths (1, 3c, c, 1) computing sum_i f(i/k) g1(kx - i) exactly, c = #lattice."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if f.dim != 1:
        raise ValueError(f"build_1d needs a one-dimensional function, got dim={f.dim}")
    if half and f.support == SYMMETRIC:
        raise ValueError("the half lattice needs a function supported on [0, 1]")
    first, second = hat_layers(1, k, half)
    nodes = np.array(list(lattice_range(k, half)), dtype=np.float64)
    weights = f(nodes[:, None] / k)
    trip = [(0, p, float(w)) for p, w in enumerate(weights) if w != 0.0]
    readout = SparseAffine.from_triplets(1, len(nodes), trip)
    return NetworkIR((first, second, readout))


@dataclass
class ConformanceReport:
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, good in self.checks.items() if not good]


def conformance_1d(net: NetworkIR, k: int, half: bool = False) -> ConformanceReport:
    rep = ConformanceReport()
    expected = widths_1d(k, half)
    rep.details["widths"] = net.widths
    rep.details["expected_widths"] = expected
    rep.checks["widths"] = net.widths == expected
    rep.checks["two_hidden_layers"] = net.depth == 2
    if net.depth == 2:
        first, second = net.layers[0], net.layers[1]
        rep.checks["layer1_fan_in_1"] = bool(np.all(first.fan_in() == 1))
        rep.checks["layer2_fan_in_3"] = bool(np.all(second.fan_in() == 3))
        pattern = second.vals.reshape(-1, 3) if second.nnz % 3 == 0 else None
        rep.checks["layer2_pattern"] = pattern is not None and bool(
            np.all(pattern == np.asarray(HAT_COEFFS)))
    return rep
