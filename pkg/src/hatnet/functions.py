"""Registry of compactly supported C^1 test functions with analytic bounds.

Names are a family plus an optional dimension suffix, e.g. ``bump2`` or
``parabola1``.  Every family is a product or sum of one-dimensional
profiles, so the derivative and sup bounds below are exact or simple
upper bounds derived by hand.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .hat_basis import SYMMETRIC, UNIT, TargetFunction

# number of octaves in the lacunary profile; must exceed log2 of the largest k studied
LACUNARY_TERMS = 10


def _parabola(x):
    return 4.0 * x * (1.0 - x)


def _parabola_d(x):
    return 4.0 - 8.0 * x


def _sine(x):
    return np.sin(np.pi * x) ** 2


def _sine_d(x):
    return np.pi * np.sin(2.0 * np.pi * x)


def _bump(x):
    return (4.0 * x * (1.0 - x)) ** 2


def _bump_d(x):
    return 32.0 * x * (1.0 - x) * (1.0 - 2.0 * x)


def _cosine(x):
    return np.cos(0.5 * np.pi * x) ** 2


def _cosine_d(x):
    return -0.5 * np.pi * np.sin(np.pi * x)


def _lacunary(x):
    out = np.zeros_like(x)
    for j in range(LACUNARY_TERMS):
        out += 2.0 ** -j * np.sin(np.pi * 2 ** j * x) ** 2
    return out


def _lacunary_d(x):
    out = np.zeros_like(x)
    for j in range(LACUNARY_TERMS):
        out += np.pi * np.sin(2.0 * np.pi * 2 ** j * x)
    return out


LACUNARY_SUP = 2.0 * (1.0 - 2.0 ** -LACUNARY_TERMS)


def _product(profile, dprofile, n):
    def f(x):
        return np.prod(profile(x), axis=-1)

    def grad(x):
        vals = profile(x)
        out = np.empty_like(x)
        for j in range(n):
            others = np.prod(np.delete(vals, j, axis=-1), axis=-1) if n > 1 else 1.0
            out[:, j] = dprofile(x[:, j]) * others
        return out

    return f, grad


def _lacunary_sum(n):
    """Sum over j of lacunary(x_j) times sine^2 in the remaining coordinates."""
    if n == 1:
        return (lambda x: _lacunary(x[:, 0])), (lambda x: _lacunary_d(x[:, :1]))

    def f(x):
        s = _sine(x)
        total = np.zeros(x.shape[0])
        for j in range(n):
            total += _lacunary(x[:, j]) * np.prod(np.delete(s, j, axis=-1), axis=-1)
        return total

    def grad(x):
        s, ds = _sine(x), _sine_d(x)
        lac, dlac = _lacunary(x), _lacunary_d(x)
        out = np.zeros_like(x)
        for j in range(n):
            for t in range(n):
                # d/dx_t of lac(x_j) * prod_{l != j} s(x_l)
                terms = [dlac[:, j] if t == j else lac[:, j]]
                for l in range(n):
                    if l != j:
                        terms.append(ds[:, l] if l == t else s[:, l])
                out[:, t] += np.prod(terms, axis=0)
        return out

    return f, grad


FAMILIES = ("zero", "parabola", "sine", "bump", "lacunary", "cosine")


def make_function(family: str, n: int) -> TargetFunction:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    name = f"{family}{n}"
    if family == "zero":
        return TargetFunction(name, n, lambda x: np.zeros(x.shape[0]), (0.0,) * n, 0.0, UNIT,
                              lambda x: np.zeros_like(x))
    if family == "parabola":
        f, g = _product(_parabola, _parabola_d, n)
        return TargetFunction(name, n, f, (4.0,) * n, 1.0, UNIT, g)
    if family == "sine":
        f, g = _product(_sine, _sine_d, n)
        return TargetFunction(name, n, f, (math.pi,) * n, 1.0, UNIT, g)
    if family == "bump":
        # max of |32 x(1-x)(1-2x)| is at 1-2x = 1/sqrt(3)
        f, g = _product(_bump, _bump_d, n)
        return TargetFunction(name, n, f, (16.0 / (3.0 * math.sqrt(3.0)),) * n, 1.0, UNIT, g)
    if family == "cosine":
        f, g = _product(_cosine, _cosine_d, n)
        return TargetFunction(name, n, f, (0.5 * math.pi,) * n, 1.0, SYMMETRIC, g)
    if family == "lacunary":
        f, g = _lacunary_sum(n)
        dbound = LACUNARY_TERMS * math.pi + (n - 1) * LACUNARY_SUP * math.pi
        return TargetFunction(name, n, f, (dbound,) * n, n * LACUNARY_SUP, UNIT, g)
    raise KeyError(f"unknown function family {family!r}; known: {', '.join(FAMILIES)}")


_NAME = re.compile(r"^([a-z]+?)(\d*)$")


def get_function(name: str, n: int | None = None) -> TargetFunction:
    """Look up ``name`` (``family`` or ``family<dim>``); ``n`` must agree with any suffix."""
    match = _NAME.match(name)
    if not match or match.group(1) not in FAMILIES:
        raise KeyError(f"unknown function {name!r}; known families: {', '.join(FAMILIES)}")
    family, suffix = match.groups()
    if suffix:
        dim = int(suffix)
        if n is not None and n != dim:
            raise ValueError(f"function {name!r} has dimension {dim}, but n={n} was requested")
    elif n is None:
        raise ValueError(f"function {name!r} needs an explicit dimension")
    else:
        dim = n
    return make_function(family, dim)


def registry(n: int, include_zero: bool = False) -> list[TargetFunction]:
    fams = [f for f in FAMILIES if f != "cosine" and (include_zero or f != "zero")]
    return [make_function(f, n) for f in fams] + [make_function("cosine", n)]


def check_target(f: TargetFunction, samples: int = 20000, seed: int = 0) -> dict:
    """Sample ``f`` to confirm its declared bounds and that it vanishes off its support."""
    rng = np.random.default_rng(seed)
    lo, hi = f.bounds
    x = rng.uniform(lo, hi, size=(samples, f.dim))
    sup = float(np.abs(f(x)).max())
    grad = f.derivative(x) if f.derivative is not None else _fd_gradient(f, x)
    dmax = np.abs(grad).max(axis=0)
    outside = rng.uniform(lo - 1.0, hi + 1.0, size=(samples, f.dim))
    mask = np.any((outside < lo) | (outside > hi), axis=-1)
    out_max = float(np.abs(f(outside[mask])).max(initial=0.0))
    return {
        "sup": sup,
        "sup_ok": sup <= f.sup_bound + 1e-9,
        "deriv": tuple(float(d) for d in dmax),
        "deriv_ok": bool(np.all(dmax <= np.asarray(f.deriv_bounds) + 1e-9)),
        "outside_max": out_max,
        "outside_ok": out_max == 0.0,
    }


def _fd_gradient(f: TargetFunction, x, h: float = 1e-6):
    out = np.empty_like(x)
    for j in range(f.dim):
        e = np.zeros(f.dim)
        e[j] = h
        out[:, j] = (f(x + e) - f(x - e)) / (2 * h)
    return out
