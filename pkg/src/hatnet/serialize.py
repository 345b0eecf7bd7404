"""JSON and dense-CSV persistence for :class:`NetworkIR`.

JSON layout::

    {"widths": [...],
     "layers": [{"out_dim": o, "in_dim": i,
                 "triplets": [[row, col, w], ...],   # sorted by (row, col)
                 "bias": [...]}, ...]}

Floats are written with ``repr`` precision so a round trip is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .network_ir import NetworkIR, SparseAffine


class ModelFormatError(ValueError):
    """The file does not describe a valid network."""


def to_dict(net: NetworkIR) -> dict:
    return {
        "widths": list(net.widths),
        "layers": [
            {
                "out_dim": layer.out_dim,
                "in_dim": layer.in_dim,
                "triplets": [[r, c, w] for r, c, w in layer.triplets],
                "bias": [float(b) for b in layer.bias],
            }
            for layer in net.layers
        ],
    }


def from_dict(data: dict) -> NetworkIR:
    try:
        layers = []
        for spec in data["layers"]:
            trip = spec["triplets"]
            if any(len(t) != 3 for t in trip):
                raise ModelFormatError("each triplet needs exactly three entries")
            layers.append(SparseAffine.from_triplets(
                int(spec["out_dim"]), int(spec["in_dim"]),
                [(int(r), int(c), float(w)) for r, c, w in trip], spec["bias"]))
        net = NetworkIR(tuple(layers))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid network description: {exc}") from exc
    if "widths" in data and list(data["widths"]) != list(net.widths):
        raise ModelFormatError(f"declared widths {data['widths']} disagree with layers {net.widths}")
    return net


def dumps(net: NetworkIR) -> str:
    return json.dumps(to_dict(net))


def loads(text: str) -> NetworkIR:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError("top-level JSON value must be an object")
    return from_dict(data)


def save_json(net: NetworkIR, path) -> None:
    Path(path).write_text(dumps(net))


def load_json(path) -> NetworkIR:
    return loads(Path(path).read_text())


def save_dense_csv(net: NetworkIR, prefix) -> list[Path]:
    """Write one CSV per layer, each an (out_dim, in_dim + 1) matrix with the bias last."""
    prefix = Path(prefix)
    paths = []
    for i, layer in enumerate(net.layers):
        path = prefix.parent / f"{prefix.name}_layer{i}.csv"
        block = np.hstack([layer.to_dense(), layer.bias[:, None]])
        np.savetxt(path, block, delimiter=",", fmt="%.17g")
        paths.append(path)
    return paths
