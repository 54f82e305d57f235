"""Steppers, implicit solves, step-size control, and the MMS harness."""

import numpy as np
import pytest

from kslab.errors import NumericalError
from kslab.grid import Grid, integrate, laplacian
from kslab.model import Params, f_eval, w_to_v
from kslab.solver import (
    ORIGINAL,
    TRANSFORMED,
    State,
    adaptive_dt,
    helmholtz_solve,
    mms_convergence,
    observed_orders,
    step_original,
    step_transformed,
)


@pytest.fixture
def p55():
    return Params(chi=0.5, beta=0.5)


# --- implicit solve -----------------------------------------------------------


def test_helmholtz_dct_residual():
    g = Grid(24, 17, 1.0, 1.4)
    rhs = np.random.default_rng(0).normal(size=g.shape)
    x = helmholtz_solve(g, rhs, 3e-3)
    res = x - 3e-3 * laplacian(g, x) - rhs
    assert np.abs(res).max() < 1e-12


def test_helmholtz_cg_matches_dct():
    g = Grid(12, 12, 1.0, 1.0)
    rhs = np.random.default_rng(1).normal(size=g.shape)
    a = helmholtz_solve(g, rhs, 1e-2, method="dct")
    b = helmholtz_solve(g, rhs, 1e-2, method="cg")
    assert np.abs(a - b).max() < 1e-10


def test_helmholtz_cg_iteration_cap():
    g = Grid(16, 16, 1.0, 1.0)
    rhs = np.random.default_rng(2).normal(size=g.shape)
    with pytest.raises(NumericalError):
        helmholtz_solve(g, rhs, 1.0, method="cg", maxiter=2)


def test_helmholtz_preserves_mean():
    g = Grid(32, 32, 1.0, 1.0)
    rhs = np.abs(np.random.default_rng(3).normal(size=g.shape))
    x = helmholtz_solve(g, rhs, 5e-3)
    assert abs(integrate(g, x) - integrate(g, rhs)) < 1e-13 * integrate(g, rhs)


# --- transformed stepper --------------------------------------------------------


def test_uniform_u_reaction_only(p55):
    # u constant, w = 0: u unchanged, w rises by exactly dt*f(c) in one step
    g = Grid(8, 8, 1.0, 1.0)
    c, dt = 2.0, 1e-3
    s = State(u=g.full(c), w=g.zeros(), t=0.0, formulation=TRANSFORMED)
    s1, rep = step_transformed(s, p55, g, dt)
    assert np.abs(s1.u - c).max() < 1e-13
    assert np.abs(s1.w - dt * f_eval(c, p55)).max() < 1e-15
    assert rep.positivity_clip_mass == 0.0


def test_vacuum_state_is_stationary(p55):
    g = Grid(8, 8, 1.0, 1.0)
    s = State(u=g.zeros(), w=g.full(3.0), t=0.0, formulation=TRANSFORMED)
    for _ in range(5):
        s, _ = step_transformed(s, p55, g, 1e-2)
    assert np.abs(s.u).max() < 1e-14
    assert np.abs(s.w - 3.0).max() < 1e-12


def test_explicit_submode_matches_hand_oracle(p55):
    g = Grid(3, 3, 3.0, 3.0)  # h = 1
    rng = np.random.default_rng(4)
    u = rng.uniform(0.5, 2.0, (3, 3))
    w = rng.uniform(0.0, 1.0, (3, 3))
    dt, chi = 1e-3, p55.chi

    def face_grads(f):
        gx = np.zeros((3, 4))
        gy = np.zeros((4, 3))
        for j in range(3):
            for i in (1, 2):
                gx[j, i] = f[j, i] - f[j, i - 1]
        for j in (1, 2):
            for i in range(3):
                gy[j, i] = f[j, i] - f[j - 1, i]
        return gx, gy

    gx, gy = face_grads(w)
    ux, uy = face_grads(u)
    exp_u = np.zeros((3, 3))
    exp_w = np.zeros((3, 3))
    for j in range(3):
        for i in range(3):
            lap_u = ux[j, i + 1] - ux[j, i] + uy[j + 1, i] - uy[j, i]
            lap_w = gx[j, i + 1] - gx[j, i] + gy[j + 1, i] - gy[j, i]
            adv = chi * (
                (0.5 * (u[j, i + 1] if i < 2 else 0) + 0.5 * u[j, i]) * gx[j, i + 1]
                - (0.5 * (u[j, i - 1] if i > 0 else 0) + 0.5 * u[j, i]) * gx[j, i]
                + (0.5 * (u[j + 1, i] if j < 2 else 0) + 0.5 * u[j, i]) * gy[j + 1, i]
                - (0.5 * (u[j - 1, i] if j > 0 else 0) + 0.5 * u[j, i]) * gy[j, i]
            )
            xs = [gx[j, k] ** 2 for k in (i, i + 1) if 1 <= k <= 2]
            ys = [gy[k, i] ** 2 for k in (j, j + 1) if 1 <= k <= 2]
            gradw_sq = sum(xs) / len(xs) + sum(ys) / len(ys)
            exp_u[j, i] = u[j, i] + dt * (lap_u + adv)
            exp_w[j, i] = w[j, i] + dt * (lap_w - gradw_sq + u[j, i] ** 0.5)

    s = State(u=u, w=w, t=0.0, formulation=TRANSFORMED)
    s1, _ = step_transformed(s, p55, g, dt, explicit_diffusion=True)
    assert np.allclose(s1.u, exp_u, atol=1e-14)
    assert np.allclose(s1.w, exp_w, atol=1e-14)


def test_mass_conservation_and_w_floor(p55):
    g = Grid(32, 32, 1.0, 1.0)
    x, y = g.cell_centers()
    u = np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.02)
    u *= 1.0 / integrate(g, u)
    s = State(u=u, w=g.zeros(), t=0.0, formulation=TRANSFORMED)
    m0 = integrate(g, s.u)
    for _ in range(300):
        s, _ = step_transformed(s, p55, g, 5e-4, mass_target=m0)
    assert abs(integrate(g, s.u) - m0) / m0 < 1e-13
    assert s.u.min() > -1e-13
    assert s.w.min() > -1e-13


def test_positivity_error_on_reckless_step(p55):
    g = Grid(16, 16, 1.0, 1.0)
    x, _ = g.cell_centers()
    u = np.where(x < 0.5, 1.0, 0.0)  # sharp front
    w = 40.0 * x  # strong drift
    s = State(u=u, w=w, t=0.0, formulation=TRANSFORMED)
    with pytest.raises(NumericalError):
        for _ in range(50):
            s, _ = step_transformed(s, p55, g, 5e-2)


# --- original stepper -----------------------------------------------------------


def test_original_pure_heat(p55):
    g = Grid(8, 8, 1.0, 1.0)
    s = State(u=g.zeros(), w=g.full(1.0), t=0.0, formulation=ORIGINAL)
    s1, _ = step_original(s, p55, g, 1e-2)
    assert np.abs(s1.w - 1.0).max() < 1e-13
    assert np.abs(s1.u).max() < 1e-14


def test_original_exponential_decay_exact(p55):
    g = Grid(8, 8, 1.0, 1.0)
    c, dt, n = 4.0, 1e-2, 20
    s = State(u=g.full(c), w=g.full(1.0), t=0.0, formulation=ORIGINAL)
    for _ in range(n):
        s, _ = step_original(s, p55, g, dt)
    expected = np.exp(-f_eval(c, p55) * n * dt)
    assert np.abs(s.w - expected).max() < 1e-12
    assert np.abs(s.u - c).max() < 1e-12


def test_original_signal_bounds(p55):
    g = Grid(24, 24, 1.0, 1.0)
    x, y = g.cell_centers()
    u = np.exp(-((x - 0.4) ** 2 + (y - 0.6) ** 2) / 0.02)
    u *= 0.5 / integrate(g, u)
    v0 = 0.8 + 0.2 * np.cos(np.pi * x) * np.cos(np.pi * y)
    v0 *= p55.v0_max / v0.max()
    s = State(u=u, w=v0, t=0.0, formulation=ORIGINAL)
    for _ in range(200):
        s, _ = step_original(s, p55, g, 1e-3)
    assert s.w.max() <= p55.v0_max + 1e-13
    assert s.w.min() > 0.0


def test_original_positivity_error_when_v_crushed():
    p = Params(chi=0.5, beta=0.5)
    g = Grid(8, 8, 1.0, 1.0)
    s = State(u=g.full(1e6), w=g.full(1.0), t=0.0, formulation=ORIGINAL)
    with pytest.raises(NumericalError):
        step_original(s, p, g, 1.0, decay="euler")


# --- step-size control -----------------------------------------------------------


def test_adaptive_dt_constant_signal(p55):
    g = Grid(8, 8, 1.0, 1.0)
    s = State(u=g.full(1.0), w=g.full(2.0), t=0.0, formulation=TRANSFORMED)
    assert adaptive_dt(s, p55, g, dt_max=0.05) == 0.05


def test_adaptive_dt_formula(p55):
    g = Grid(100, 100, 1.0, 1.0)  # h = 0.01
    x, _ = g.cell_centers()
    s = State(u=g.full(1.0), w=10.0 * x, t=0.0, formulation=TRANSFORMED)
    dt = adaptive_dt(s, p55, g, dt_max=1.0, safety=0.4)
    assert np.isclose(dt, 0.4 * 0.01 / (0.5 * 10.0))


def test_adaptive_dt_halves_with_doubled_chi():
    g = Grid(50, 50, 1.0, 1.0)
    x, _ = g.cell_centers()
    s = State(u=g.full(1.0), w=3.0 * x, t=0.0, formulation=TRANSFORMED)
    d1 = adaptive_dt(s, Params(chi=0.3, beta=0.5), g, dt_max=1.0)
    d2 = adaptive_dt(s, Params(chi=0.6, beta=0.5), g, dt_max=1.0)
    assert np.isclose(d1, 2.0 * d2)


# --- formulation consistency (coarse check; the fine study is in acceptance) ----


def test_formulations_agree_on_v(p55):
    g = Grid(24, 24, 1.0, 1.0)
    x, y = g.cell_centers()
    u0 = np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.04)
    u0 *= 1.0 / integrate(g, u0)
    v0 = 0.75 + 0.25 * np.cos(np.pi * x) * np.cos(np.pi * y)
    v0 *= 1.0 / v0.max()
    w0 = -np.log(v0)
    dt, n = 1e-3, 100

    st = State(u=u0.copy(), w=w0, t=0.0, formulation=TRANSFORMED)
    so = State(u=u0.copy(), w=v0, t=0.0, formulation=ORIGINAL)
    for _ in range(n):
        st, _ = step_transformed(st, p55, g, dt)
        so, _ = step_original(so, p55, g, dt)
    v_from_w = w_to_v(np.maximum(st.w, 0.0), p55)
    assert np.abs(so.w - v_from_w).max() < 5e-3  # O(dt + h^2) ballpark


# --- manufactured solutions -------------------------------------------------------


def test_mms_rejects_thin_study():
    with pytest.raises(ValueError):
        mms_convergence("diffusion", levels=2)


def test_mms_diffusion_second_order():
    table = mms_convergence("diffusion", levels=3, nx0=16, t_end=0.05, steps0=5)
    errs = [e for _, e in table]
    assert errs[0] > errs[1] > errs[2]
    assert min(observed_orders(table)) > 1.9


def test_mms_transformed_order():
    table = mms_convergence("transformed", levels=3, nx0=8, t_end=0.05, steps0=5)
    errs = [e for _, e in table]
    assert errs[0] > errs[1] > errs[2]
    assert min(observed_orders(table)) > 1.7
