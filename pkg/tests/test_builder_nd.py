import numpy as np
import pytest

from hatnet import hat_basis as hb
from hatnet.builder_nd import (BuildSpec, build_nd, cell_inputs, conformance_nd,
                               conservative_bound, make_appid_bank, make_front, make_readout,
                               tight_bound, split_modules)
from hatnet.functions import get_function
from hatnet.network_ir import NetworkIR, SparseAffine, chain, count_params, forward, forward_batch
from hatnet.verify import appid_cell_errors, theorem2_report


def test_front_examples():
    out = forward(make_front(BuildSpec(2, 1, 4)), [0.0, 0.0])
    np.testing.assert_array_equal(out, [0, 1, 0, 0, 1, 0])


@pytest.mark.parametrize("half", [False, True])
def test_front_matches_g1(half):
    spec = BuildSpec(2, 2, 4, half)
    x = np.random.default_rng(0).uniform(size=(500, 2))
    out = forward_batch(make_front(spec), x)
    offsets = np.array(list(hb.lattice_range(2, half)))
    expected = np.concatenate([hb.g1(2 * x[:, [j]] - offsets[None, :]) for j in range(2)], axis=1)
    np.testing.assert_allclose(out, expected, atol=1e-12)
    assert out.min() >= 0 and out.max() <= 1
    front = make_front(spec)
    assert np.all(front.layers[0].fan_in() == 1) and np.all(front.layers[1].fan_in() == 3)


def test_front_rejects_n1():
    with pytest.raises(ValueError):
        BuildSpec(1, 2, 4)


def test_appid_examples():
    spec = BuildSpec(2, 1, 8)
    net = chain(make_front(spec), make_appid_bank(spec))
    out = forward(net, [0.0, 0.0])
    cells = [tuple(c) for c in hb.lattice(2, 1)]
    assert abs(out[cells.index((0, 0))] - 1.0) <= 9 * 2.0 ** -8
    assert out[cells.index((1, 1))] <= 9 * 2.0 ** -8


def test_appid_wiring():
    spec = BuildSpec(3, 1, 2)
    bank = make_appid_bank(spec)
    assert bank.widths[0] == 3 * 3 and bank.widths[-1] == 27
    cols = cell_inputs(spec)
    # cell (i1, i2, i3) reads hat units (j, i_j)
    t = [tuple(c) for c in hb.lattice(3, 1)].index((-1, 0, 1))
    assert list(cols[t]) == [0, 4, 8]


@pytest.mark.parametrize("half", [False, True])
def test_appid_cell_error(half):
    spec = BuildSpec(2, 2, 6, half)
    f = get_function("sine2")
    net = build_nd(f, spec)
    x = np.random.default_rng(5).uniform(size=(500, 2))
    assert appid_cell_errors(net, spec, x).max() <= spec.cell_error_bound


def test_readout_weights():
    f = get_function("parabola2")
    ro = make_readout(f, BuildSpec(2, 1, 4, half=True))
    assert ro.nnz == 0
    ro = make_readout(f, BuildSpec(2, 2, 4, half=True))
    cells = [tuple(c) for c in hb.lattice(2, 2, half=True)]
    assert ro.to_dense()[0, cells.index((1, 1))] == 1.0
    assert ro.nnz == int(np.count_nonzero(f(hb.lattice(2, 2, half=True) / 2)))
    zero = make_readout(get_function("zero2"), BuildSpec(2, 3, 4))
    assert zero.nnz == 0


def test_widths_tuple():
    spec = BuildSpec(2, 1, 6)
    net = build_nd(get_function("bump2"), spec)
    assert net.widths == (2, 18, 6) + (108,) * 11 + (9, 1)
    assert net.depth == 14
    half = BuildSpec(2, 1, 6, half=True)
    assert build_nd(get_function("bump2"), half).widths == (2, 12, 4) + (48,) * 11 + (4, 1)


def test_three_dim_tuple():
    spec = BuildSpec(3, 1, 2)
    net = build_nd(get_function("sine3"), spec)
    assert net.depth == (2 + 5) * 2 + 3
    assert net.widths == (3, 27, 9) + (6 * 3 * 27,) * 14 + (27, 1)
    assert conformance_nd(net, spec).ok


def test_composition_consistency():
    spec = BuildSpec(2, 2, 6)
    f = get_function("bump2")
    net = build_nd(f, spec)
    front, bank, readout = make_front(spec), make_appid_bank(spec), make_readout(f, spec)
    x = np.random.default_rng(2).uniform(size=(300, 2))
    cells = np.maximum(forward_batch(bank, np.maximum(forward_batch(front, x), 0)), 0)
    manual = cells @ readout.to_dense()[0]
    np.testing.assert_allclose(forward_batch(net, x)[:, 0], manual, atol=1e-12)
    f2, b2, r2 = split_modules(net, spec)
    assert f2 == front and b2 == bank and r2 == readout


def test_readout_decomposition():
    spec = BuildSpec(2, 2, 8)
    f = get_function("sine2")
    net = build_nd(f, spec)
    front, bank, _ = split_modules(net, spec)
    x = np.random.default_rng(4).uniform(size=(300, 2))
    cells = forward_batch(chain(front, bank), x)
    weights = f(hb.lattice(2, 2) / 2)
    np.testing.assert_allclose(forward_batch(net, x)[:, 0], cells @ weights, atol=1e-12)


def test_end_to_end_conservative_bound():
    spec = BuildSpec(2, 2, 10)
    f = get_function("sine2")
    rep = theorem2_report(f, spec)
    assert rep.sup_error <= conservative_bound(f, spec) + 1e-9
    assert rep.passes["conservative"]
    assert rep.tight_bound == tight_bound(f, spec)


def test_zero_function_report():
    rep = theorem2_report(get_function("zero2"), BuildSpec(2, 2, 4))
    assert rep.sup_error == 0.0


def test_error_decreases_with_m_to_floor():
    # oracle floor: sup over the same grid of |f - interpolant|
    f = get_function("sine2")
    grid = np.random.default_rng(9).uniform(size=(4000, 2))
    floor = np.abs(f(grid) - hb.interpolant(f, 3, grid)).max()
    devs, errs = [], []
    for m in (4, 6, 8, 10, 12):
        net = build_nd(f, BuildSpec(2, 3, m))
        out = forward_batch(net, grid)[:, 0]
        devs.append(np.abs(out - hb.interpolant(f, 3, grid)).max())
        errs.append(np.abs(out - f(grid)).max())
    assert all(a > b for a, b in zip(devs, devs[1:]))
    assert abs(errs[-1] - floor) <= devs[-1]


def test_locality_ratio():
    spec = BuildSpec(2, 3, 6)
    net = build_nd(get_function("sine2"), spec)
    c = count_params(net)
    assert c.nnz_total / c.dense_total < 0.05
    rep = conformance_nd(net, spec)
    assert rep.ok, rep.failed()


def test_spec_mismatch_rejected():
    with pytest.raises(ValueError):
        build_nd(get_function("sine3"), BuildSpec(2, 1, 4))
    with pytest.raises(ValueError):
        build_nd(get_function("cosine2"), BuildSpec(2, 1, 4))


def test_conformance_detects_tampering():
    spec = BuildSpec(2, 1, 4)
    net = build_nd(get_function("sine2"), spec)
    assert not conformance_nd(net, BuildSpec(2, 2, 4)).ok
    bank_in = net.layers[2]
    cols = bank_in.cols.copy()
    cols[0] = (cols[0] + 1) % bank_in.in_dim
    rewired = SparseAffine(bank_in.out_dim, bank_in.in_dim, bank_in.rows, cols, bank_in.vals,
                           bank_in.bias)
    bad = NetworkIR(net.layers[:2] + (rewired,) + net.layers[3:])
    rep = conformance_nd(bad, spec)
    assert rep.failed() == ["cells_read_n_inputs"]
