import math

import numpy as np
import pytest

from hatnet import verify as vf
from hatnet.builder_nd import BuildSpec
from hatnet.functions import get_function


def test_default_grid_shapes():
    grid, desc = vf.default_grid(2, seed=1)
    assert grid.shape == (101 * 101 + 10_000, 2)
    assert "101^2" in desc
    grid3, _ = vf.default_grid(3, random_points=0)
    assert grid3.shape == (41 ** 3, 3)
    # odd grid contains the midpoint
    assert np.any(np.all(grid == 0.5, axis=1))


def test_rng_reproducible():
    a = vf.make_rng(7).uniform(size=5)
    b = vf.make_rng(7).uniform(size=5)
    assert a.tobytes() == b.tobytes()


def test_threaded_evaluation_identical(monkeypatch):
    f = get_function("sine2")
    spec = BuildSpec(2, 2, 6)
    grid, _ = vf.default_grid(2)
    serial = vf.theorem2_report(f, spec, grid=grid)
    monkeypatch.setenv("HATNET_THREADS", "4")
    threaded = vf.theorem2_report(f, spec, grid=grid)
    assert serial.sup_error == threaded.sup_error


def test_report_fields_consistent():
    f = get_function("bump2")
    spec = BuildSpec(2, 1, 8, half=True)
    rep = vf.theorem2_report(f, spec)
    assert rep.sup_error >= 0
    assert rep.passes["tight"] == (rep.sup_error <= rep.tight_bound + 1e-9)
    assert rep.passes["conservative"] == (rep.sup_error <= rep.conservative_bound + 1e-9)
    # half lattice: factors (k+1) and (k+1)^n
    interp = f.max_deriv * 2 / 2
    assert rep.tight_bound == pytest.approx(9 * 2.0 ** -8 * 2 + interp)
    assert rep.conservative_bound == pytest.approx(9 * 2.0 ** -8 * 4 + interp)
    assert rep.nnz < rep.dense


def test_report_1d():
    rep = vf.report_1d(get_function("parabola1"), 8)
    assert rep.sup_error == pytest.approx(1 / 64, abs=1e-12)
    assert rep.passes["theorem1"]


def test_suites_pass_small():
    rows = (vf.lemma4_suite((1, 2), (1, 3), samples=300)
            + vf.mult_suite((2, 3), (4,), samples=500)
            + vf.theorem1_suite([get_function("sine1")], (2, 4)))
    assert rows and all(r.passed for r in rows)


def test_rows_to_csv_format():
    rows = [vf.CheckRow("s", "a,b", "q", 0.1, 1.0, True, False)]
    text = vf.rows_to_csv(rows)
    assert text.splitlines() == ["suite,case,quantity,value,bound,passed,mandatory",
                                 's,"a,b",q,0.1,1.0,true,false']


def test_coupled_k():
    assert [vf.coupled_k(2, m, 4) for m in (4, 6, 8, 10, 12)] == [1, 2, 4, 8, 16]


def test_fit_slope_exact():
    L = np.arange(5)
    assert vf.fit_slope(L, 2.0 ** (-0.5 * L)) == pytest.approx(-0.5)


def test_expected_slopes():
    assert vf.expected_rate_slope(2) == -0.5
    assert vf.expected_rate_slope(3) == -0.25
    assert vf.expected_rate_slope(1) == -1.0


def test_rate_study_fixed_k_plateaus_at_interpolation_floor():
    # k fixed, m growing: the error settles to the interpolation error
    f = get_function("sine2")
    rows = vf.rate_study(f, m_values=(4, 8, 12), k_values=(2, 2, 2))
    errs = [r.sup_error for r in rows]
    assert abs(errs[-1] - errs[-2]) < 1e-4
    assert all(r.sup_error <= r.conservative_bound for r in rows)


def test_rate_study_rejects_mismatched_schedule():
    with pytest.raises(ValueError):
        vf.rate_study(get_function("sine2"), m_values=(4, 6), k_values=(1,))
