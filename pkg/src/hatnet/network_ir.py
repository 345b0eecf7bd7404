"""Sparse affine layers and the ReLU network container.

A network is the alternating composition ``A_{L+1} . relu . A_L . ... . relu . A_1``
with no activation after the last affine map.  Each affine map keeps its
weights as sorted ``(row, col, weight)`` triplets plus a dense bias vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    """Raised when an input vector does not match a layer's fan-in."""


def relu(v):
    return np.maximum(np.asarray(v, dtype=np.float64), 0.0)


@dataclass(frozen=True, eq=False)
class SparseAffine:
    out_dim: int
    in_dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.out_dim < 1 or self.in_dim < 1:
            raise ValueError(f"layer dims must be >= 1, got {self.out_dim}x{self.in_dim}")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=np.float64)
        bias = np.asarray(self.bias, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ValueError("rows, cols and vals must be 1-D arrays of equal length")
        if bias.shape != (self.out_dim,):
            raise ValueError(f"bias has shape {bias.shape}, expected ({self.out_dim},)")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.out_dim:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.in_dim:
                raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1:
            dup = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if dup.any():
                at = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate entry at ({rows[at]}, {cols[at]})")
        for name, arr in (("rows", rows), ("cols", cols), ("vals", vals), ("bias", bias)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        csr = sp.csr_matrix((vals, (rows, cols)), shape=(self.out_dim, self.in_dim))
        csr.sort_indices()
        object.__setattr__(self, "_csr", csr)

    @classmethod
    def from_triplets(cls, out_dim: int, in_dim: int,
                      triplets: Iterable[tuple[int, int, float]],
                      bias: Sequence[float] | None = None) -> "SparseAffine":
        trip = list(triplets)
        if trip:
            r, c, w = zip(*trip)
        else:
            r, c, w = (), (), ()
        if bias is None:
            bias = np.zeros(out_dim)
        return cls(out_dim, in_dim, np.array(r, dtype=np.int64), np.array(c, dtype=np.int64),
                   np.array(w, dtype=np.float64), np.asarray(bias, dtype=np.float64))

    @classmethod
    def from_dense(cls, matrix, bias=None) -> "SparseAffine":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        r, c = np.nonzero(matrix)
        out_dim, in_dim = matrix.shape
        if bias is None:
            bias = np.zeros(out_dim)
        return cls(out_dim, in_dim, r, c, matrix[r, c], np.asarray(bias, dtype=np.float64))

    @classmethod
    def identity(cls, dim: int) -> "SparseAffine":
        idx = np.arange(dim)
        return cls(dim, dim, idx, idx, np.ones(dim), np.zeros(dim))

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    @property
    def triplets(self) -> list[tuple[int, int, float]]:
        return [(int(r), int(c), float(w)) for r, c, w in zip(self.rows, self.cols, self.vals)]

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._csr

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def fan_in(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.out_dim)

    def __eq__(self, other):
        if not isinstance(other, SparseAffine):
            return NotImplemented
        return (self.out_dim == other.out_dim and self.in_dim == other.in_dim
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.vals, other.vals)
                and np.array_equal(self.bias, other.bias))

    __hash__ = None

    def __repr__(self):
        return f"SparseAffine({self.out_dim}x{self.in_dim}, nnz={self.nnz})"


def apply_affine(layer: SparseAffine, x) -> np.ndarray:
    """Return ``W x + b`` for a single vector ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.in_dim,):
        raise DimensionError(f"input has length {x.shape[0] if x.ndim else 0}, "
                             f"layer expects {layer.in_dim}")
    return layer.matrix @ x + layer.bias


def _apply_batch(layer: SparseAffine, xt: np.ndarray) -> np.ndarray:
    # xt has shape (in_dim, batch); csr rows accumulate by ascending column
    return layer.matrix @ xt + layer.bias[:, None]


@dataclass(frozen=True, eq=False)
class NetworkIR:
    layers: tuple[SparseAffine, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one affine layer")
        for i in range(1, len(layers)):
            if layers[i].in_dim != layers[i - 1].out_dim:
                raise DimensionError(
                    f"layer {i} expects {layers[i].in_dim} inputs but layer {i - 1} "
                    f"produces {layers[i - 1].out_dim}")
        object.__setattr__(self, "layers", layers)

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.layers[0].in_dim,) + tuple(layer.out_dim for layer in self.layers)

    @property
    def depth(self) -> int:
        """Number of hidden layers L."""
        return len(self.layers) - 1

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def __eq__(self, other):
        if not isinstance(other, NetworkIR):
            return NotImplemented
        return len(self.layers) == len(other.layers) and all(
            a == b for a, b in zip(self.layers, other.layers))

    __hash__ = None

    def __call__(self, x):
        return forward_batch(self, x)

    def __repr__(self):
        return f"NetworkIR(L={self.depth}, widths={self.widths})"


@dataclass(frozen=True)
class EvalTrace:
    pre_activations: list[np.ndarray]
    post_activations: list[np.ndarray]
    output: np.ndarray


def forward_batch(net: NetworkIR, x) -> np.ndarray:
    """Evaluate ``net`` on a batch ``x`` of shape (N, in_dim); returns (N, out_dim).

    A 1-D ``x`` is treated as a single point and a 1-D result is returned.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    xt = x[:, None] if single else x.T
    if xt.shape[0] != net.in_dim:
        raise DimensionError(f"layer 0: input has dimension {xt.shape[0]}, "
                             f"network expects {net.in_dim}")
    h = xt
    last = len(net.layers) - 1
    for i, layer in enumerate(net.layers):
        h = _apply_batch(layer, h)
        if i < last:
            np.maximum(h, 0.0, out=h)
    return h[:, 0] if single else h.T


def forward(net: NetworkIR, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("forward takes a single point; use forward_batch for batches")
    return forward_batch(net, x)


def forward_traced(net: NetworkIR, x) -> EvalTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != net.in_dim:
        raise DimensionError(f"layer 0: input has shape {x.shape}, network expects ({net.in_dim},)")
    pre, post = [], []
    h = x[:, None]
    for layer in net.layers[:-1]:
        z = _apply_batch(layer, h)
        h = np.maximum(z, 0.0)
        pre.append(z[:, 0])
        post.append(h[:, 0])
    out = _apply_batch(net.layers[-1], h)[:, 0]
    return EvalTrace(pre, post, out)


@dataclass(frozen=True)
class ParamCount:
    nnz_total: int
    dense_total: int
    per_layer_fan_in_max: tuple[int, ...]
    bias_total: int


def count_params(net: NetworkIR) -> ParamCount:
    """Count stored weights against the dense weight count (biases reported separately)."""
    nnz = sum(layer.nnz for layer in net.layers)
    dense = sum(layer.out_dim * layer.in_dim for layer in net.layers)
    fan = tuple(int(layer.fan_in().max()) for layer in net.layers)
    bias = sum(layer.out_dim for layer in net.layers)
    return ParamCount(nnz, dense, fan, bias)


def dense_forward(net: NetworkIR, x) -> np.ndarray:
    """Reference evaluator using dense matrices, for the sparse/dense equivalence check."""
    h = np.asarray(x, dtype=np.float64)
    for i, layer in enumerate(net.layers):
        h = layer.to_dense() @ h + layer.bias
        if i < len(net.layers) - 1:
            h = np.maximum(h, 0.0)
    return h


# -- assembly helpers used by the builders ------------------------------------

def affine_net(layer: SparseAffine) -> NetworkIR:
    return NetworkIR((layer,))


def identity_net(dim: int, depth: int) -> NetworkIR:
    """Network with ``depth`` hidden layers that returns its input unchanged on x >= 0."""
    return NetworkIR(tuple(SparseAffine.identity(dim) for _ in range(depth + 1)))


def _multiply(outer: SparseAffine, inner: SparseAffine) -> SparseAffine:
    prod = (outer.matrix @ inner.matrix).tocoo()
    keep = prod.data != 0.0
    bias = outer.matrix @ inner.bias + outer.bias
    return SparseAffine(outer.out_dim, inner.in_dim, prod.row[keep], prod.col[keep],
                        prod.data[keep], bias)


def compose(outer: NetworkIR, inner: NetworkIR) -> NetworkIR:
    """``outer . inner`` with no activation in between (the two boundary affines merge)."""
    if outer.in_dim != inner.out_dim:
        raise DimensionError(f"cannot compose: outer expects {outer.in_dim}, "
                             f"inner produces {inner.out_dim}")
    merged = _multiply(outer.layers[0], inner.layers[-1])
    return NetworkIR(inner.layers[:-1] + (merged,) + outer.layers[1:])


def chain(*nets: NetworkIR) -> NetworkIR:
    """``nets[-1] . relu . ... . relu . nets[0]``: concatenate layer lists."""
    layers: tuple[SparseAffine, ...] = ()
    for net in nets:
        layers += net.layers
    return NetworkIR(layers)


def parallel(nets: Sequence[NetworkIR], in_dim: int,
             input_cols: Sequence[Sequence[int]]) -> NetworkIR:
    """Stack equal-depth networks side by side.

    Network ``t`` reads the input coordinates ``input_cols[t]``; outputs are
    concatenated in order.  Hidden units of different networks never mix.
    """
    depths = {net.depth for net in nets}
    if len(depths) != 1:
        raise ValueError(f"parallel networks must share a depth, got {sorted(depths)}")
    for net, cols in zip(nets, input_cols):
        if len(cols) != net.in_dim:
            raise DimensionError(f"input map of length {len(cols)} for a network "
                                 f"with {net.in_dim} inputs")
    layers = []
    for li in range(len(nets[0].layers)):
        rows, cols, vals, bias = [], [], [], []
        r_off = c_off = 0
        for net, sel in zip(nets, input_cols):
            layer = net.layers[li]
            rows.append(layer.rows + r_off)
            if li == 0:
                cols.append(np.asarray(sel, dtype=np.int64)[layer.cols])
            else:
                cols.append(layer.cols + c_off)
            vals.append(layer.vals)
            bias.append(layer.bias)
            r_off += layer.out_dim
            c_off += layer.in_dim
        layers.append(SparseAffine(r_off, in_dim if li == 0 else c_off,
                                   np.concatenate(rows), np.concatenate(cols),
                                   np.concatenate(vals), np.concatenate(bias)))
    return NetworkIR(tuple(layers))


def pad_depth(net: NetworkIR, depth: int) -> NetworkIR:
    """Append identity hidden layers until ``net`` has ``depth`` hidden layers.

    Only exact when the network output is nonnegative on the inputs of interest.
    """
    if depth < net.depth:
        raise ValueError(f"network already has {net.depth} hidden layers (> {depth})")
    extra = tuple(SparseAffine.identity(net.out_dim) for _ in range(depth - net.depth))
    return NetworkIR(net.layers + extra)


def pad_hidden_widths(net: NetworkIR, widths: Sequence[int]) -> NetworkIR:
    """Grow hidden layer ``i`` to ``widths[i]`` units by appending dead (all-zero) units."""
    if len(widths) != net.depth:
        raise ValueError(f"need {net.depth} hidden widths, got {len(widths)}")
    layers = list(net.layers)
    for i, w in enumerate(widths):
        cur = layers[i].out_dim
        if w < cur:
            raise ValueError(f"hidden layer {i} has width {cur} > requested {w}")
        if w == cur:
            continue
        a = layers[i]
        layers[i] = SparseAffine(w, a.in_dim, a.rows, a.cols, a.vals,
                                 np.concatenate([a.bias, np.zeros(w - cur)]))
        b = layers[i + 1]
        layers[i + 1] = SparseAffine(b.out_dim, w, b.rows, b.cols, b.vals, b.bias)
    return NetworkIR(tuple(layers))
