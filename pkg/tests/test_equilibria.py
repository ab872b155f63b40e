import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finact.equilibria import (CENTER, COLLAPSED, CRITICAL, DEGENERATE, OSCILLATORY, SADDLE, STABLE_NODE,
                               STABLE_SPIRAL, classify, critical_check, equilibrium_residual, find_fixed_points,
                               jacobian_scalars, sweep_asymmetry)
from finact.errors import IncompleteScanError
from finact.model import SystemParams, table1_params

import oracles


def test_table1_three_fixed_points(p):
    rep = find_fixed_points(p)
    assert [fp.kind for fp in rep.fixed_points] == [SADDLE, CENTER, SADDLE]
    neg, ctr, pos = (fp.x_star for fp in rep.fixed_points)
    assert abs(ctr) < 1e-12
    assert pos == pytest.approx(oracles.SADDLE, abs=1e-12)
    assert neg == pytest.approx(-oracles.SADDLE, abs=1e-12)
    assert rep.regime == OSCILLATORY


def test_sorted_ascending(p):
    xs = [fp.x_star for fp in find_fixed_points(p).fixed_points]
    assert xs == sorted(xs)


def test_residual_near_zero_at_saddle(p):
    scale = p.k * p.x0 ** (2 * p.alpha + 1)
    assert abs(equilibrium_residual(3.48e-3, p)) < 1e-3 * scale
    assert abs(equilibrium_residual(oracles.SADDLE, p)) < 1e-12 * scale


def test_residual_matches_symmetric_polynomial(p):
    xs = np.linspace(-0.0099, 0.0099, 101)
    np.testing.assert_allclose(equilibrium_residual(xs, p), oracles.symmetric_fp_poly(xs), rtol=1e-9, atol=1e-24)


def test_residual_outside_domain(p):
    with pytest.raises(ValueError):
        equilibrium_residual(0.01, p)


def test_root_residuals_small(p):
    rep = find_fixed_points(p)
    scale = p.k * p.x0 ** (2 * p.alpha + 1)
    for fp in rep.fixed_points:
        assert abs(equilibrium_residual(fp.x_star, p)) < 1e-12 * scale


def test_det_origin_and_saddle(p):
    _, det0 = jacobian_scalars(0.0, p)
    _, dets = jacobian_scalars(oracles.SADDLE, p)
    assert det0 == pytest.approx(oracles.DET_ORIGIN, rel=1e-12)
    assert dets == pytest.approx(oracles.DET_SADDLE, rel=1e-10)


@pytest.mark.parametrize("x", [0.0, 0.002, -0.0035, 0.006])
def test_det_matches_finite_difference(x):
    p = SystemParams(c1=2e-9, c2=3.5e-9, k=439.3, x0=0.01)

    def accel(z):
        return 3.5e-9 / (z - 0.01) ** 4 - 2e-9 / (z + 0.01) ** 4 - 439.3 * z

    assert jacobian_scalars(x, p)[1] == pytest.approx(oracles.fd_det(accel, x), rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(gamma=st.floats(0.0, 100.0), x=st.floats(-0.009, 0.009))
def test_trace_is_minus_gamma(gamma, x):
    p = table1_params(gamma=gamma)
    tr, _ = jacobian_scalars(x, p)
    assert tr == -gamma


@pytest.mark.parametrize("gamma", [0.0, 4.19, 20.96, 60.0])
def test_positions_independent_of_gamma(gamma):
    base = [fp.x_star for fp in find_fixed_points(table1_params()).fixed_points]
    got = [fp.x_star for fp in find_fixed_points(table1_params(gamma=gamma)).fixed_points]
    assert got == base


def test_damped_classification():
    rep = find_fixed_points(table1_params(gamma=4.19))
    assert rep.center.kind == STABLE_SPIRAL
    rep = find_fixed_points(table1_params(gamma=60.0))
    assert rep.center.kind == STABLE_NODE
    assert [fp.kind for fp in rep.saddles] == [SADDLE, SADDLE]


def test_collapsed_regime():
    p = table1_params().with_(c1=8e-9, c2=8e-9)
    rep = find_fixed_points(p)
    assert rep.regime == COLLAPSED
    assert len(rep.fixed_points) == 1
    assert rep.fixed_points[0].kind == SADDLE


def test_critical_regime_and_degenerate_origin():
    k, x0 = 439.3, 0.01
    c = k * x0**5 / 8
    p = SystemParams(c1=c, c2=c, k=k, x0=x0)
    assert critical_check(p)[2] == CRITICAL
    assert classify(0.0, p).kind == DEGENERATE


def test_critical_band_edges():
    k, x0 = 439.3, 0.01
    cc = k * x0**5 / 8
    below = SystemParams(c1=cc * (1 - 1e-6), c2=cc * (1 - 1e-6), k=k, x0=x0)
    above = SystemParams(c1=cc * (1 + 1e-6), c2=cc * (1 + 1e-6), k=k, x0=x0)
    assert critical_check(below)[2] == OSCILLATORY
    assert critical_check(above)[2] == COLLAPSED


def test_classify_outside_domain(p):
    with pytest.raises(ValueError):
        classify(0.02, p)


def test_coarse_grid_raises():
    cc = 439.3 * 0.01**5 / 8
    # near the fold all three roots crowd into one cell of a coarse grid
    p = SystemParams(c1=0.99 * cc, c2=0.99 * cc, k=439.3, x0=0.01)
    with pytest.raises(IncompleteScanError):
        find_fixed_points(p, grid=16)
    assert len(find_fixed_points(p, grid=256).fixed_points) == 3
    with pytest.raises(IncompleteScanError):
        find_fixed_points(table1_params(), grid=2)


@pytest.mark.parametrize("grid", [3, 5, 7, 4096])
def test_root_on_grid_point_keeps_neighbours(grid):
    # odd grids put the origin exactly on a node
    xs = [fp.x_star for fp in find_fixed_points(table1_params(), grid=grid).fixed_points]
    assert len(xs) == 3
    assert xs[2] == pytest.approx(oracles.SADDLE, abs=1e-12)


def test_pure_spring():
    rep = find_fixed_points(SystemParams(c1=0.0, c2=0.0, k=439.3, x0=0.01))
    assert len(rep.fixed_points) == 1
    fp = rep.fixed_points[0]
    assert fp.kind == CENTER
    assert fp.det == 439.3


def test_residual_sign_toward_stronger_magnet():
    assert equilibrium_residual(0.0, SystemParams(c1=1e-9, c2=2e-9, k=439.3, x0=0.01)) > 0


def _grid_cases():
    # 10 x0 values by 5 fractions of the critical ratio: 50 oscillatory cases
    cases = []
    for x0 in np.linspace(0.005, 0.03, 10):
        for frac in (0.05, 0.2, 0.45, 0.7, 0.9):
            cases.append((float(x0), frac))
    return cases


@pytest.mark.parametrize("x0,frac", _grid_cases())
def test_oracle_equivalence_grid(x0, frac):
    k = 439.3
    c = frac * k * x0**5 / 8
    p = SystemParams(c1=c, c2=c, k=k, x0=x0)
    rep = find_fixed_points(p)
    want = oracles.bisection_roots(lambda z: oracles.symmetric_fp_poly(z, c=c, k=k, x0=x0),
                                   -x0 + 1e-6, x0 - 1e-6, n=20_001)
    got = [fp.x_star for fp in rep.fixed_points]
    assert len(got) == 3
    assert len(want) == 3
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-10)
    assert [fp.kind for fp in rep.fixed_points] == [SADDLE, CENTER, SADDLE]


@settings(max_examples=40, deadline=None)
@given(frac=st.floats(0.02, 0.98))
def test_roots_odd_symmetric(frac):
    k, x0 = 439.3, 0.01
    c = frac * k * x0**5 / 8
    rep = find_fixed_points(SystemParams(c1=c, c2=c, k=k, x0=x0))
    xs = [fp.x_star for fp in rep.fixed_points]
    assert len(xs) == 3
    assert xs[0] == pytest.approx(-xs[2], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(frac=st.floats(0.02, 3.0).filter(lambda f: abs(f - 1) > 1e-3))
def test_classification_dichotomy(frac):
    k, x0 = 439.3, 0.01
    c = frac * k * x0**5 / 8
    rep = find_fixed_points(SystemParams(c1=c, c2=c, k=k, x0=x0))
    origin = [fp for fp in rep.fixed_points if abs(fp.x_star) < 1e-12]
    assert len(origin) == 1
    assert origin[0].kind == (CENTER if frac < 1 else SADDLE)
    for fp in rep.fixed_points:
        if abs(fp.x_star) >= 1e-12:
            assert fp.kind == SADDLE


def test_asymmetry_sweep(p):
    c = p.c1
    rows = sweep_asymmetry(p, [0.0, 0.05 * c, 0.1 * c, 0.2 * c])
    assert abs(rows[0].center) < 1e-12
    assert rows[0].saddle_pos == pytest.approx(-rows[0].saddle_neg, abs=1e-12)
    centers = [r.center for r in rows]
    assert all(b > a for a, b in zip(centers, centers[1:]))
    for r in rows[1:]:
        assert r.saddle_pos - r.center < r.center - r.saddle_neg


def test_asymmetry_sweep_rejects_bad_input(p):
    with pytest.raises(ValueError):
        sweep_asymmetry(p, [2.5 * p.c1])
    with pytest.raises(ValueError):
        sweep_asymmetry(p.with_(c2=2 * p.c1), [0.0])


def test_report_to_dict(p):
    d = find_fixed_points(p).to_dict()
    assert d["regime"] == OSCILLATORY
    assert len(d["fixed_points"]) == 3
    assert d["critical_ratio"] == pytest.approx(p.x0**5 / 8)
