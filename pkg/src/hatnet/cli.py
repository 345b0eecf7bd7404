"""Command-line interface: build, eval, verify, rate-study, export.

Exit codes: 0 success, 1 a mandatory bound failed, 2 usage error,
3 malformed model file, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import verify as vf
from .builder_1d import build_1d
from .builder_nd import BuildSpec, build_nd
from .functions import get_function, registry
from .network_ir import DimensionError, count_params, forward
from .serialize import ModelFormatError, load_json, save_dense_csv, save_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FORMAT, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _m_range(text: str) -> list[int]:
    """``a:b[:step]`` inclusive, or a comma list."""
    if ":" not in text:
        return _int_list(text)
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc
    step = parts[2] if len(parts) > 2 else 1
    return list(range(parts[0], parts[1] + 1, step))


def _lookup(name: str, n: int | None):
    try:
        return get_function(name, n)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc.args[0] if exc.args else exc)) from exc


def _build(f, n: int, k: int, m: int | None, half: bool):
    try:
        if n == 1:
            return build_1d(f, k, half)
        if m is None:
            raise UsageError("--m is required for n >= 2")
        return build_nd(f, BuildSpec(n, k, m, half))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_build(args) -> int:
    f = _lookup(args.fn, args.n)
    net = _build(f, f.dim, args.k, args.m, args.half)
    out = Path(args.out or f"{f.name}_k{args.k}" + (f"_m{args.m}" if f.dim > 1 else "") + ".json")
    try:
        save_json(net, out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    counts = count_params(net)
    print(f"wrote {out}")
    print(f"L={net.depth} widths={list(net.widths)}")
    print(f"nnz={counts.nnz_total} dense={counts.dense_total} "
          f"ratio={counts.nnz_total / counts.dense_total:.4g} "
          f"fan_in_max={list(counts.per_layer_fan_in_max)}")
    return EXIT_OK


def _load(path):
    try:
        return load_json(path)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc


def cmd_eval(args) -> int:
    net = _load(args.model)
    try:
        point = np.array([float(v) for v in args.point.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad point {args.point!r}") from exc
    try:
        out = forward(net, point)
    except DimensionError as exc:
        raise UsageError(str(exc)) from exc
    print(" ".join(repr(float(v)) for v in out))
    return EXIT_OK


def _verify_rows(args) -> list[vf.CheckRow]:
    suite, seed = args.suite, args.seed
    rows: list[vf.CheckRow] = []
    if suite in ("lemma4", "all"):
        rows += vf.lemma4_suite(n_values=[args.n] if args.n else (1, 2, 3, 4),
                                k_values=[args.k] if args.k else (1, 2, 4, 8, 16),
                                samples=args.samples or 10_000, seed=seed)
    if suite in ("theorem1", "all"):
        if args.fn:
            fns = [_lookup(args.fn, args.n)]
        else:
            fns = [f for n in ((args.n,) if args.n else (1, 2)) for f in registry(n)]
        rows += vf.theorem1_suite(fns, k_values=[args.k] if args.k else (1, 2, 4, 8, 16),
                                  seed=seed)
    if suite in ("mult", "all"):
        rows += vf.mult_suite(r_values=[args.r] if args.r else (2, 3, 4),
                              m_values=[args.m] if args.m else (4, 6, 8, 10),
                              samples=args.samples or 10_000, seed=seed)
    if suite in ("theorem2", "all"):
        f = _lookup(args.fn or "sine2", args.n if args.n and args.n > 1 else None)
        if f.dim < 2:
            raise UsageError("theorem2 suite needs n >= 2")
        try:
            spec = BuildSpec(f.dim, args.k or 1, args.m or 8, args.half)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows += vf.theorem2_suite(f, spec, seed=seed)
    return rows


def cmd_verify(args) -> int:
    rows = _verify_rows(args)
    text = vf.rows_to_csv(rows)
    _emit(text, args.out)
    failed = [r for r in rows if r.mandatory and not r.passed]
    info = [r for r in rows if not r.mandatory and not r.passed]
    print(f"{len(rows)} checks, {len(failed)} mandatory failures, "
          f"{len(info)} informational failures", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_rate_study(args) -> int:
    f = _lookup(args.fn, args.n)
    try:
        rows = vf.rate_study(f, m_values=args.m_range, k_values=args.k_schedule,
                             half=not args.full, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(vf.rows_to_csv(rows, vf.RATE_FIELDS), args.out)
    slope = vf.rate_slope(rows)
    axis = "log2 k" if f.dim == 1 else "L"
    print(f"fitted slope of log2(sup error) vs {axis}: {slope:.4f} "
          f"(reference {vf.expected_rate_slope(f.dim):.4f})", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    net = _load(args.model)
    out = Path(args.out)
    if args.format == "json":
        save_json(net, out)
        print(f"wrote {out}")
    else:
        for path in save_dense_csv(net, out):
            print(f"wrote {path}")
    return EXIT_OK


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hatnet", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a network and write it as JSON")
    b.add_argument("--fn", required=True, help="registry function, e.g. bump2 or parabola1")
    b.add_argument("--n", type=int, help="input dimension (must match the function)")
    b.add_argument("--k", type=int, required=True, help="lattice parameter")
    b.add_argument("--m", type=int, help="product accuracy parameter (n >= 2)")
    b.add_argument("--half", action="store_true", help="use the half lattice {0..k}")
    b.add_argument("--out", help="output JSON path")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="evaluate a saved network at a point")
    e.add_argument("model")
    e.add_argument("--point", required=True, help="comma-separated coordinates")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run bound suites and write a CSV report")
    v.add_argument("--suite", choices=["lemma4", "theorem1", "mult", "theorem2", "all"],
                   default="all")
    v.add_argument("--fn")
    v.add_argument("--n", type=int)
    v.add_argument("--k", type=int)
    v.add_argument("--m", type=int)
    v.add_argument("--r", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--half", action="store_true")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="CSV path (default stdout)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("rate-study", help="sup error along a depth/width schedule")
    r.add_argument("--fn", default="lacunary2")
    r.add_argument("--n", type=int)
    r.add_argument("--m-range", type=_m_range, default=[4, 6, 8, 10, 12],
                   help="m values, a:b[:step] or comma list")
    r.add_argument("--k-schedule", type=_int_list,
                   help="explicit k values (default: coupled k^2 ~ 2^(L/ceil(log2 n)); "
                        "2,4,8,16 for n=1)")
    r.add_argument("--full", action="store_true", help="use the full lattice {-k..k}")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_rate_study)

    x = sub.add_parser("export", help="re-export a saved network")
    x.add_argument("model")
    x.add_argument("--format", choices=["json", "dense-csv"], default="json")
    x.add_argument("--out", required=True, help="JSON path, or file prefix for dense-csv")
    x.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
