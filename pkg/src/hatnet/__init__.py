"""Explicit locally connected ReLU networks built from hat functions."""

from .builder_1d import build_1d, conformance_1d, make_hat_gadget
from .builder_nd import BuildSpec, build_nd, conformance_nd
from .functions import get_function, registry
from .hat_basis import TargetFunction, g1, gn, interpolant, moment_sum, partition_sum
from .mult_net import MultSpec, make_mult, make_mult2, make_sq
from .network_ir import NetworkIR, SparseAffine, count_params, forward, forward_batch

__all__ = [
    "BuildSpec", "MultSpec", "NetworkIR", "SparseAffine", "TargetFunction",
    "build_1d", "build_nd", "conformance_1d", "conformance_nd", "count_params",
    "forward", "forward_batch", "g1", "get_function", "gn", "interpolant",
    "make_hat_gadget", "make_mult", "make_mult2", "make_sq", "moment_sum",
    "partition_sum", "registry",
]
