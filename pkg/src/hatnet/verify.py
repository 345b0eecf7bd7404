"""Bound-checking suites, error reports and the depth/error rate study.

Random points come from numpy's PCG64 generator seeded explicitly, so every
report is reproducible.  Grid evaluation may be split across threads
(``HATNET_THREADS``); maxima are order independent, so reports do not
depend on the split.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import hat_basis as hb
from .builder_1d import build_1d
from .builder_nd import (BuildSpec, build_nd, conformance_nd, conservative_bound, tight_bound,
                         split_modules)
from .hat_basis import TargetFunction
from .mult_net import MultSpec, make_mult
from .network_ir import NetworkIR, chain, count_params, forward_batch

CHUNK = 4096


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def thread_count() -> int:
    return max(1, int(os.environ.get("HATNET_THREADS", "1")))


def tensor_grid(n: int, points: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    axis = np.linspace(lo, hi, points)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def grid_points_per_axis(n: int) -> int:
    return {1: 10001, 2: 101, 3: 41}.get(n, 11)


def default_grid(n: int, lo: float = 0.0, hi: float = 1.0, seed: int = 0,
                 random_points: int = 10_000) -> tuple[np.ndarray, str]:
    """Odd-sized tensor grid (hits cell midpoints) plus uniform random points."""
    per_axis = grid_points_per_axis(n)
    pts = [tensor_grid(n, per_axis, lo, hi)]
    if random_points:
        pts.append(make_rng(seed).uniform(lo, hi, size=(random_points, n)))
    desc = f"tensor {per_axis}^{n} on [{lo:g},{hi:g}]^{n} + {random_points} uniform (seed {seed})"
    return np.concatenate(pts), desc


def evaluate(net: NetworkIR, x: np.ndarray) -> np.ndarray:
    """Chunked batch evaluation, optionally threaded."""
    chunks = [x[i:i + CHUNK] for i in range(0, len(x), CHUNK)]
    workers = thread_count()
    if workers == 1 or len(chunks) == 1:
        parts = [forward_batch(net, c) for c in chunks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: forward_batch(net, c), chunks))
    return np.concatenate(parts)


def sup_error(net: NetworkIR, f: TargetFunction, grid: np.ndarray) -> float:
    return float(np.abs(evaluate(net, grid)[:, 0] - f(grid)).max())


@dataclass
class ErrorReport:
    function: str
    n: int
    k: int
    m: int | None
    half: bool
    sup_error: float
    tight_bound: float
    conservative_bound: float
    theorem1_bound: float
    grid: str
    nnz: int
    dense: int
    wall_time: float
    passes: dict[str, bool] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def theorem2_report(f: TargetFunction, spec: BuildSpec, grid: np.ndarray | None = None,
                    net: NetworkIR | None = None, seed: int = 0) -> ErrorReport:
    """Sup error of the n-D network on ``grid`` against the two readings of the bound."""
    start = time.perf_counter()
    if net is None:
        net = build_nd(f, spec)
    if grid is None:
        grid, desc = default_grid(f.dim, seed=seed)
    else:
        desc = f"{len(grid)} supplied points"
    err = sup_error(net, f, grid)
    counts = count_params(net)
    pb, cb = tight_bound(f, spec), conservative_bound(f, spec)
    t1 = hb.theorem1_bound(f, spec.k)
    return ErrorReport(f.name, f.dim, spec.k, spec.m, spec.half, err, pb, cb, t1, desc,
                       counts.nnz_total, counts.dense_total, time.perf_counter() - start,
                       {"tight": err <= pb + 1e-9, "conservative": err <= cb + 1e-9})


def report_1d(f: TargetFunction, k: int, half: bool = False, grid: np.ndarray | None = None,
              seed: int = 0) -> ErrorReport:
    start = time.perf_counter()
    net = build_1d(f, k, half)
    if grid is None:
        grid, desc = default_grid(1, *f.bounds, seed=seed)
    else:
        desc = f"{len(grid)} supplied points"
    err = sup_error(net, f, grid)
    t1 = hb.theorem1_bound(f, k)
    counts = count_params(net)
    return ErrorReport(f.name, 1, k, None, half, err, t1, t1, t1, desc, counts.nnz_total,
                       counts.dense_total, time.perf_counter() - start,
                       {"theorem1": err <= t1 + 1e-9})


# -- suites --------------------------------------------------------------------

@dataclass
class CheckRow:
    suite: str
    case: str
    quantity: str
    value: float
    bound: float
    passed: bool
    mandatory: bool = True


CSV_FIELDS = ["suite", "case", "quantity", "value", "bound", "passed", "mandatory"]


def rows_to_csv(rows, fields=CSV_FIELDS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[f]) for f in fields])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def lemma4_suite(n_values=(1, 2, 3, 4), k_values=(1, 2, 4, 8, 16), samples=10_000,
                 seed=0) -> list[CheckRow]:
    """Partition of unity and the first-moment bound on random points of [-1, 1]^n."""
    rows = []
    for n in n_values:
        for k in k_values:
            x = make_rng(seed + 1000 * n + k).uniform(-1.0, 1.0, size=(samples, n))
            dev = float(np.abs(hb.partition_sum(n, k, x) - 1.0).max())
            mom = float(hb.moment_sum(n, k, x).max())
            case = f"n={n},k={k}"
            rows.append(CheckRow("lemma4", case, "max|partition_sum-1|", dev, 1e-12, dev <= 1e-12))
            bound = n / (2.0 * k)
            rows.append(CheckRow("lemma4", case, "max moment_sum", mom, bound,
                                 mom <= bound + 1e-12))
    return rows


def theorem1_suite(functions, k_values=(1, 2, 4, 8, 16), seed=0) -> list[CheckRow]:
    rows = []
    for f in functions:
        grid, _ = default_grid(f.dim, *f.bounds, seed=seed,
                               random_points=2000 if f.dim > 2 else 10_000)
        for k in k_values:
            gap, bound = hb.theorem1_gap(f, k, grid)
            rows.append(CheckRow("theorem1", f"{f.name},k={k}", "sup|f-interp|", gap, bound,
                                 gap <= bound + 1e-9))
    return rows


def mult_suite(r_values=(2, 3, 4), m_values=(4, 6, 8, 10), samples=10_000,
               seed=0) -> list[CheckRow]:
    rows = []
    for r in r_values:
        for m in m_values:
            spec = MultSpec(r, m)
            net = make_mult(spec)
            x = make_rng(seed + 100 * r + m).uniform(0.0, 1.0, size=(samples, r))
            err = float(np.abs(evaluate(net, x)[:, 0] - x.prod(axis=1)).max())
            case = f"r={r},m={m}"
            rows.append(CheckRow("mult", case, "max|mult-prod|", err, spec.error_bound,
                                 err <= spec.error_bound))
            rows.append(CheckRow("mult", case, "depth", float(net.depth),
                                 float(spec.depth_budget), net.depth <= spec.depth_budget))
            width = max(net.widths[1:-1])
            rows.append(CheckRow("mult", case, "max_width", float(width), float(6 * r),
                                 width <= 6 * r))
    return rows


def appid_cell_errors(net: NetworkIR, spec: BuildSpec, x: np.ndarray) -> np.ndarray:
    """|cell output - gn(kx - i)| for every sample (rows) and cell (columns)."""
    front, bank, _ = split_modules(net, spec)
    cells = evaluate(chain(front, bank), x)
    idx = hb.lattice(spec.n, spec.k, spec.half)
    exact = hb.gn(spec.k * x[:, None, :] - idx[None, :, :])
    return np.abs(cells - exact)


def theorem2_suite(f: TargetFunction, spec: BuildSpec, seed=0, cell_samples=1000) -> list[CheckRow]:
    rows = []
    net = build_nd(f, spec)
    case = f"{f.name},n={spec.n},k={spec.k},m={spec.m}" + (",half" if spec.half else "")
    conf = conformance_nd(net, spec)
    for name, good in conf.checks.items():
        rows.append(CheckRow("theorem2", case, f"conformance:{name}", float(good), 1.0, good))
    x = make_rng(seed).uniform(0.0, 1.0, size=(cell_samples, spec.n))
    cell_err = float(appid_cell_errors(net, spec, x).max())
    rows.append(CheckRow("theorem2", case, "max cell error", cell_err, spec.cell_error_bound,
                         cell_err <= spec.cell_error_bound))
    rep = theorem2_report(f, spec, net=net, seed=seed)
    rows.append(CheckRow("theorem2", case, "sup error vs conservative bound", rep.sup_error,
                         rep.conservative_bound, rep.passes["conservative"]))
    rows.append(CheckRow("theorem2", case, "sup error vs tight bound", rep.sup_error,
                         rep.tight_bound, rep.passes["tight"], mandatory=False))
    return rows


# -- rate study ----------------------------------------------------------------

@dataclass
class RateRow:
    L: int
    k: int
    m: int | None
    sup_error: float
    tight_bound: float
    conservative_bound: float
    theorem1_bound: float


RATE_FIELDS = ["L", "k", "m", "sup_error", "tight_bound", "conservative_bound", "theorem1_bound"]


def coupled_k(n: int, m: int, m0: int, k0: int = 1) -> int:
    """k with k^2 proportional to 2^(L / ceil(log2 n)); L grows by ceil(log2 n) per unit of m."""
    return max(1, round(k0 * 2.0 ** ((m - m0) / 2.0)))


def rate_study(f: TargetFunction, m_values=(4, 6, 8, 10, 12), k_values=None, half=True,
               seed=0) -> list[RateRow]:
    """Sup error of the built network along a depth/width schedule.

    For n >= 2 and no explicit ``k_values``, k is coupled to depth so that
    k^2 ~ 2^(L/ceil(log2 n)).  For n = 1 the depth is fixed and ``k_values``
    (default 2, 4, 8, 16) is swept.
    """
    n = f.dim
    rows = []
    if n == 1:
        for k in (k_values or (2, 4, 8, 16)):
            rep = report_1d(f, k, half and f.support == hb.UNIT, seed=seed)
            rows.append(RateRow(2, k, None, rep.sup_error, rep.tight_bound,
                                rep.conservative_bound, rep.theorem1_bound))
        return rows
    grid, _ = default_grid(n, seed=seed)
    m_values = list(m_values)
    ks = list(k_values) if k_values else [coupled_k(n, m, m_values[0]) for m in m_values]
    if len(ks) != len(m_values):
        raise ValueError("need one k per m")
    for m, k in zip(m_values, ks):
        spec = BuildSpec(n, k, m, half)
        rep = theorem2_report(f, spec, grid=grid)
        rows.append(RateRow(spec.depth, k, m, rep.sup_error, rep.tight_bound,
                            rep.conservative_bound, rep.theorem1_bound))
    return rows


def fit_slope(x, y) -> float:
    """Least-squares slope of log2(y) against x."""
    return float(np.polyfit(np.asarray(x, dtype=float), np.log2(np.asarray(y, dtype=float)), 1)[0])


def rate_slope(rows: list[RateRow]) -> float:
    """Slope of log2(error) against L (n >= 2) or against log2 k (fixed depth)."""
    if len({r.L for r in rows}) == 1:
        return fit_slope([math.log2(r.k) for r in rows], [r.sup_error for r in rows])
    return fit_slope([r.L for r in rows], [r.sup_error for r in rows])


def expected_rate_slope(n: int) -> float:
    """-1/(2 ceil(log2 n)) per hidden layer for n >= 2; -1 per doubling of k for n = 1."""
    return -1.0 if n == 1 else -1.0 / (2 * math.ceil(math.log2(n)))
