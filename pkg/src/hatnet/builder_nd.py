"""Full n-dimensional network: hat front end, one product block per lattice cell, readout.

Layout of the assembled network (c = lattice size per axis, C = c^n cells,
D = (m+5)*ceil(log2 n)):

    n -> 3nc -> nc -> 6nC (D times) -> C -> 1

Depth is D + 3 hidden layers.  Product blocks are padded with identity
layers and dead units so widths match this tuple exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .builder_1d import ConformanceReport, hat_layers, lattice_size
from .hat_basis import SYMMETRIC, TargetFunction, lattice
from .mult_net import MultSpec, make_mult
from .network_ir import NetworkIR, SparseAffine, chain, pad_hidden_widths, parallel


@dataclass(frozen=True)
class BuildSpec:
    n: int
    k: int
    m: int
    half: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n-dimensional builder needs n >= 2, got {self.n}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")

    @property
    def axis_size(self) -> int:
        return lattice_size(self.k, self.half)

    @property
    def cells(self) -> int:
        return self.axis_size ** self.n

    @property
    def product_depth(self) -> int:
        return (self.m + 5) * math.ceil(math.log2(self.n))

    @property
    def depth(self) -> int:
        return self.product_depth + 3

    @property
    def widths(self) -> tuple[int, ...]:
        n, c, C = self.n, self.axis_size, self.cells
        return (n, 3 * n * c, n * c) + (6 * n * C,) * self.product_depth + (C, 1)

    @property
    def cell_error_bound(self) -> float:
        return 3.0 ** self.n * 2.0 ** -self.m


def make_front(spec: BuildSpec) -> NetworkIR:
    """Two layers producing g1(k x_j - i) for each coordinate j and lattice offset i."""
    return NetworkIR(hat_layers(spec.n, spec.k, spec.half))


def cell_inputs(spec: BuildSpec) -> np.ndarray:
    """Front-output index read by each cell: row t lists the n hat units of cell t."""
    cells = lattice(spec.n, spec.k, spec.half)
    offset = 0 if spec.half else spec.k
    return np.arange(spec.n)[None, :] * spec.axis_size + (cells + offset)


def make_appid_bank(spec: BuildSpec) -> NetworkIR:
    """One product network per lattice cell, wired to that cell's n hat outputs."""
    block = make_mult(MultSpec(spec.n, spec.m))
    cols = cell_inputs(spec)
    bank = parallel([block] * spec.cells, spec.n * spec.axis_size, cols.tolist())
    return pad_hidden_widths(bank, [6 * spec.n * spec.cells] * spec.product_depth)


def make_readout(f: TargetFunction, spec: BuildSpec) -> SparseAffine:
    if f.dim != spec.n:
        raise ValueError(f"function has dimension {f.dim}, spec has n={spec.n}")
    weights = f(lattice(spec.n, spec.k, spec.half) / spec.k)
    nz = np.flatnonzero(weights)
    return SparseAffine(1, spec.cells, np.zeros(nz.size, dtype=np.int64), nz, weights[nz],
                        np.zeros(1))


def build_nd(f: TargetFunction, spec: BuildSpec) -> NetworkIR:
    if f.dim != spec.n:
        raise ValueError(f"function has dimension {f.dim}, spec has n={spec.n}")
    if f.support == SYMMETRIC:
        raise ValueError("the n-dimensional network targets functions supported on [0, 1]^n")
    net = chain(make_front(spec), make_appid_bank(spec), NetworkIR((make_readout(f, spec),)))
    if net.widths != spec.widths or net.depth != spec.depth:
        raise RuntimeError(f"built architecture {net.widths} does not match {spec.widths}")
    return net


def conformance_nd(net: NetworkIR, spec: BuildSpec) -> ConformanceReport:
    rep = ConformanceReport()
    rep.details["widths"] = net.widths
    rep.details["expected_widths"] = spec.widths
    rep.checks["widths"] = net.widths == spec.widths
    rep.checks["depth"] = net.depth == spec.depth
    if not rep.checks["widths"]:
        return rep
    first, second, bank_in = net.layers[0], net.layers[1], net.layers[2]
    rep.checks["front1_fan_in_1"] = bool(np.all(first.fan_in() == 1))
    rep.checks["front2_fan_in_3"] = bool(np.all(second.fan_in() == 3))
    rep.checks["cells_read_n_inputs"] = cells_read_own_inputs(bank_in, spec)
    rep.checks["readout_fan_in"] = int(net.layers[-1].fan_in().max()) <= spec.cells
    return rep


def cells_read_own_inputs(bank_first: SparseAffine, spec: BuildSpec) -> bool:
    """True if every product block's first layer reads exactly its cell's n hat outputs."""
    block_width = make_mult(MultSpec(spec.n, spec.m)).layers[0].out_dim
    expected = cell_inputs(spec)
    used = [set() for _ in range(spec.cells)]
    for r, c in zip(bank_first.rows, bank_first.cols):
        cell = int(r) // block_width
        if cell >= spec.cells:
            return False
        used[cell].add(int(c))
    return all(used[t] == set(expected[t].tolist()) for t in range(spec.cells))


def split_modules(net: NetworkIR, spec: BuildSpec) -> tuple[NetworkIR, NetworkIR, SparseAffine]:
    """Undo :func:`build_nd`'s chaining: (front, bank, readout)."""
    layers = net.layers
    return NetworkIR(layers[:2]), NetworkIR(layers[2:-1]), layers[-1]


def tight_bound(f: TargetFunction, spec: BuildSpec) -> float:
    """Error bound with the linear lattice factor (2k+1), or (k+1) on the half lattice."""
    return f.sup_bound * spec.cell_error_bound * spec.axis_size + _interp_term(f, spec)


def conservative_bound(f: TargetFunction, spec: BuildSpec) -> float:
    """Error bound counting every cell: factor (2k+1)^n, or (k+1)^n on the half lattice."""
    return f.sup_bound * spec.cell_error_bound * spec.cells + _interp_term(f, spec)


def _interp_term(f: TargetFunction, spec: BuildSpec) -> float:
    return f.max_deriv * spec.n / (2.0 * spec.k)
