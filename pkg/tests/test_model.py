import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finact.errors import SingularityError, UnsupportedConfigurationError
from finact.model import (PhysicalParams, State, SystemParams, acceleration, magnetic_force, make_acceleration,
                          normalize, rhs, table1_params, total_energy)
from finact.sim import IntegratorConfig, integrate

import oracles


def test_magnetic_force_table1_value():
    assert magnetic_force(0.0, 0.01, 2.919e-9, 4) == pytest.approx(0.2919, rel=1e-12)


def test_magnetic_force_symmetric_cancels():
    c = 2.919e-9
    assert magnetic_force(0.0, 0.01, c) + magnetic_force(0.0, -0.01, c) == 0.0


def test_magnetic_force_attracts_toward_nearer_magnet():
    assert magnetic_force(0.005, 0.01, 1e-9) > 0
    assert magnetic_force(0.005, -0.01, 1e-9) < 0
    # negative constant repels
    assert magnetic_force(0.005, 0.01, -1e-9) < 0


@pytest.mark.parametrize("x", [0.01, 0.01 - 5e-7, 0.01 + 1e-7])
def test_magnetic_force_singularity_guard(x):
    with pytest.raises(SingularityError):
        magnetic_force(x, 0.01, 1e-9)


def test_magnetic_force_custom_guard():
    assert magnetic_force(0.0099, 0.01, 1e-9, eps=1e-6) > 0
    with pytest.raises(SingularityError):
        magnetic_force(0.0099, 0.01, 1e-9, eps=2e-4)


def test_rhs_origin_is_fixed(p):
    assert rhs(State(0.0, 0.0), p) == (0.0, 0.0)


def test_rhs_only_damping_at_origin():
    p = table1_params(gamma=20.96)
    dx, dv = rhs(State(0.0, 1.0), p)
    assert dx == 1.0
    assert dv == pytest.approx(-20.96, rel=1e-14)


def test_rhs_solenoid_pushes_same_way():
    p = table1_params(cs=3e-9)
    I = 0.02
    _, dv = rhs(State(0.0, 0.0), p, current=I)
    assert dv == pytest.approx(2 * 3e-9 * I / 0.01**4, rel=1e-12)


def test_fast_acceleration_matches_reference():
    p = table1_params(gamma=4.0, cs=2e-9)
    f = make_acceleration(p)
    for x, v, I, F in [(0.001, 0.3, 0.0, 0.0), (-0.0031, -0.2, 0.015, 0.1), (0.0095, 1.0, -0.01, -2.0)]:
        assert f(x, v, F, I) == pytest.approx(acceleration(x, v, p, I, F), rel=1e-12)


def test_asymmetric_rhs_matches_oracle():
    p = SystemParams(c1=2e-9, c2=3e-9, k=400.0, gamma=1.5, x0=0.01)
    for x, v in [(0.002, 0.1), (-0.004, -0.05)]:
        want = 3e-9 / (x - 0.01) ** 4 - 2e-9 / (x + 0.01) ** 4 - 400.0 * x - 1.5 * v
        assert rhs(State(x, v), p)[1] == pytest.approx(want, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(-0.0099, 0.0099), v=st.floats(-1, 1))
def test_odd_symmetry(x, v):
    p = table1_params()
    assert rhs(State(-x, -v), p)[1] == pytest.approx(-rhs(State(x, v), p)[1], rel=1e-12, abs=1e-15)


def test_energy_at_origin(p):
    assert total_energy(State(0.0, 0.0), p) == pytest.approx(-2 * p.c1 / (3 * p.x0**3), rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-0.009, 0.009))
def test_energy_gradient_is_minus_force(x):
    """dE/dx equals minus the conservative acceleration."""
    p = table1_params()
    h = 1e-8
    dEdx = (total_energy(State(x + h, 0.0), p) - total_energy(State(x - h, 0.0), p)) / (2 * h)
    a = rhs(State(x, 0.0), p)[1]
    assert dEdx == pytest.approx(-a, rel=1e-5, abs=1e-7)


def test_energy_conserved_on_orbit(p):
    traj = integrate(p, None, State(2e-3, 0.0), IntegratorConfig(max_time=5.0))
    e = np.array([total_energy(s, p) for s in traj.states])
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8
    # and agrees with the test-side formula
    assert e[100] == pytest.approx(oracles.energy(traj.x[100], traj.v[100]), rel=1e-12)


def test_energy_non_increasing_with_damping():
    p = table1_params(gamma=4.19)
    traj = integrate(p, None, State(3e-3, 0.0), IntegratorConfig(max_time=5.0))
    e = np.array([total_energy(s, p) for s in traj.states])
    assert np.all(np.diff(e) <= 1e-15 * abs(e[0]))
    assert e[-1] < e[0]


def test_energy_requires_alpha_4():
    p = table1_params(alpha=3)
    with pytest.raises(UnsupportedConfigurationError):
        total_energy(State(0.0, 0.0), p)


def test_normalize_table1():
    sp = normalize(PhysicalParams(C1=2.460e-10, C2=2.460e-10, K=37.03, Gamma=0.0, m=0.0843))
    assert sp.c1 == pytest.approx(2.919e-9, rel=5e-4)
    assert sp.k == pytest.approx(439.3, rel=5e-4)


def test_normalize_unit_mass_identity():
    pp = PhysicalParams(C1=1e-9, C2=2e-9, K=5.0, Gamma=0.3, m=1.0, x0=0.02, Cs=4e-9)
    sp = normalize(pp)
    assert (sp.c1, sp.c2, sp.k, sp.gamma, sp.x0, sp.cs) == (1e-9, 2e-9, 5.0, 0.3, 0.02, 4e-9)


@given(scale=st.floats(0.1, 10.0))
def test_normalize_linear(scale):
    base = PhysicalParams(C1=1e-9, C2=1e-9, K=5.0, Gamma=0.3, m=0.5)
    a = normalize(base)
    b = normalize(PhysicalParams(C1=scale * 1e-9, C2=1e-9, K=scale * 5.0, Gamma=0.3, m=0.5))
    assert b.c1 == pytest.approx(scale * a.c1, rel=1e-12)
    assert b.k == pytest.approx(scale * a.k, rel=1e-12)


@pytest.mark.parametrize("kw", [dict(x0=0.0), dict(k=-1.0), dict(gamma=-0.1), dict(alpha=0)])
def test_params_validation(kw):
    base = dict(c1=1e-9, c2=1e-9, k=400.0, gamma=0.0, x0=0.01)
    base.update(kw)
    with pytest.raises(ValueError):
        SystemParams(**base)


def test_physical_params_need_mass():
    with pytest.raises(ValueError):
        PhysicalParams(C1=1.0, C2=1.0, K=1.0, Gamma=0.0, m=0.0)


def test_table1_constants(p):
    assert (p.c1, p.c2, p.k, p.x0, p.alpha) == (2.919e-9, 2.919e-9, 439.3, 0.01, 4)
    assert (p.x1, p.x2) == (-0.01, 0.01)
    assert math.isclose(p.x0, oracles.X0)
