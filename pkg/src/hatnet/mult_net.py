"""ReLU networks approximating products of numbers in [0, 1].

Squaring uses the sawtooth construction: with the tooth
``T(x) = 2 relu(x) - 4 relu(x - 1/2) + 2 relu(x - 1)`` and ``T_s`` its s-fold
composition, ``x - sum_{s<=m} T_s(x) / 4^s`` is the piecewise-linear
interpolant of x^2 on the grid of spacing 2^-m, so its error is at most
4^-(m+1).  Pairs are multiplied by polarization and r-fold products by a
binary tree of pairwise products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network_ir import (NetworkIR, SparseAffine, affine_net, compose, identity_net,
                         pad_depth, parallel)


@dataclass(frozen=True)
class MultSpec:
    r: int
    m: int

    def __post_init__(self):
        if self.r < 1 or self.m < 1:
            raise ValueError(f"need r >= 1 and m >= 1, got r={self.r}, m={self.m}")

    @property
    def rounds(self) -> int:
        return math.ceil(math.log2(self.r)) if self.r > 1 else 0

    @property
    def depth_budget(self) -> int:
        return (self.m + 5) * self.rounds

    @property
    def error_bound(self) -> float:
        return 3.0 ** self.r * 2.0 ** -self.m


def make_sq(m: int) -> NetworkIR:
    """Network with m hidden layers approximating x^2 on [0, 1] to within 4^-(m+1).

    Hidden layer s holds relu(T_{s-1}), relu(T_{s-1} - 1/2), relu(T_{s-1} - 1)
    and, from s = 2 on, the running partial sum (nonnegative, so relu keeps it).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    # layer 1 reads x; relu(x) doubles as the partial sum x - (empty sum)
    layers = [SparseAffine.from_triplets(3, 1, [(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0)],
                                         [0.0, -0.5, -1.0])]
    tooth = ((0, 2.0), (1, -4.0), (2, 2.0))
    sum_col = 0  # column holding the partial sum in the current hidden layer
    for s in range(1, m):
        # T_s = 2 h0 - 4 h1 + 2 h2 ; partial sum S_s = S_{s-1} - T_s / 4^s
        trip = []
        for row, shift in ((0, 0.0), (1, -0.5), (2, -1.0)):
            trip += [(row, c, w) for c, w in tooth]
        scale = 4.0 ** -s
        acc = {sum_col: 1.0}
        for c, w in tooth:
            acc[c] = acc.get(c, 0.0) - scale * w
        trip += [(3, c, w) for c, w in acc.items() if w != 0.0]
        in_dim = layers[-1].out_dim
        layers.append(SparseAffine.from_triplets(4, in_dim, trip, [0.0, -0.5, -1.0, 0.0]))
        sum_col = 3
    scale = 4.0 ** -m
    acc = {sum_col: 1.0}
    for c, w in tooth:
        acc[c] = acc.get(c, 0.0) - scale * w
    layers.append(SparseAffine.from_triplets(1, layers[-1].out_dim,
                                             [(0, c, w) for c, w in acc.items() if w != 0.0]))
    return NetworkIR(tuple(layers))


def _clip_net() -> NetworkIR:
    # relu(o) - relu(o - 1) = min(max(o, 0), 1)
    return NetworkIR((SparseAffine.from_triplets(2, 1, [(0, 0, 1.0), (1, 0, 1.0)], [0.0, -1.0]),
                      SparseAffine.from_triplets(1, 2, [(0, 0, 1.0), (0, 1, -1.0)])))


def make_mult2(m: int) -> NetworkIR:
    """Product of two numbers in [0, 1] via xy = 2((x+y)/2)^2 - x^2/2 - y^2/2, clipped to [0, 1].

    Depth m + 1, widths (2, 12, ..., 12, 2, 1); error at most 3 * 4^-(m+1).
    """
    sq = make_sq(m)
    inputs = affine_net(SparseAffine.from_triplets(
        3, 2, [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 1.0), (2, 1, 1.0)]))
    squares = compose(parallel([sq, sq, sq], 3, [[0], [1], [2]]), inputs)
    combine = affine_net(SparseAffine.from_triplets(1, 3, [(0, 0, 2.0), (0, 1, -0.5),
                                                           (0, 2, -0.5)]))
    return compose(_clip_net(), compose(combine, squares))


def mult_architecture(spec: MultSpec) -> tuple[int, ...]:
    """Width tuple (r, 6r, ..., 6r, 1) with (m+5)*ceil(log2 r) hidden layers."""
    if spec.r < 2:
        raise ValueError("the product architecture is defined for r >= 2")
    return (spec.r,) + (6 * spec.r,) * spec.depth_budget + (1,)


def make_mult(spec: MultSpec) -> NetworkIR:
    """r-fold product network on [0, 1]^r, padded to exactly the depth budget.

    Each tree round multiplies adjacent pairs with :func:`make_mult2`; an odd
    leftover is carried through identity layers.  For r = 1 the result is an
    identity network with the same depth as the r = 2 case.
    """
    r, m = spec.r, spec.m
    if r == 1:
        return identity_net(1, m + 5)
    pair = make_mult2(m)
    carry = identity_net(1, pair.depth)
    net = None
    width = r
    while width > 1:
        blocks, cols = [], []
        for a in range(0, width - 1, 2):
            blocks.append(pair)
            cols.append([a, a + 1])
        if width % 2:
            blocks.append(carry)
            cols.append([width - 1])
        level = parallel(blocks, width, cols)
        net = level if net is None else compose(level, net)
        width = len(blocks)
    net = pad_depth(net, spec.depth_budget)
    _check_architecture(net, spec)
    return net


def _check_architecture(net: NetworkIR, spec: MultSpec) -> None:
    if net.depth > spec.depth_budget:
        raise RuntimeError(f"product network depth {net.depth} exceeds {spec.depth_budget}")
    hidden = net.widths[1:-1]
    if hidden and max(hidden) > 6 * spec.r:
        raise RuntimeError(f"product network width {max(hidden)} exceeds {6 * spec.r}")


def sq_error_bound(m: int) -> float:
    return 4.0 ** -(m + 1)


def mult2_error_bound(m: int) -> float:
    return 3.0 * 4.0 ** -(m + 1)


def tree_error_bound(spec: MultSpec) -> float:
    """Error of the realized tree: each round adds one pairwise error and doubles the carried one."""
    return (2 ** spec.rounds - 1) * mult2_error_bound(spec.m)


def exact_product(x) -> np.ndarray:
    return np.prod(np.asarray(x, dtype=np.float64), axis=-1)
