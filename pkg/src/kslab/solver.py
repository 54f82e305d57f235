"""Time integration of the cell/signal system on a rectangular grid.

Both formulations are integrated with the same IMEX splitting: diffusion
is backward Euler (one Helmholtz solve per field per step), the drift
flux, the quadratic gradient term, and the consumption reaction are
explicit. The implicit solves are done either by a cosine-transform
direct solve, which diagonalizes the zero-flux 5-point stencil exactly,
or by matrix-free conjugate gradients.

The transformed formulation evolves (u, w); the original evolves (u, v)
with the signal decay applied as an exact exponential factor per step,
which preserves 0 < v <= v0_max without any step-size condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import fft as _fft

from . import grid as _grid
from . import model as _model
from .errors import NumericalError
from .grid import FluxField, Grid

POSITIVITY_TOL = 1e-13

TRANSFORMED = "transformed"
ORIGINAL = "original"

Forcing = Callable[[Grid, float], np.ndarray]


@dataclass
class State:
    """Fields at one time.

    u is the cell density. In the transformed formulation w holds the
    nonnegative transformed signal; in the original formulation the same
    slot holds the signal v itself (0 < v <= v0_max).
    """

    u: np.ndarray
    w: np.ndarray
    t: float
    formulation: str = TRANSFORMED

    def __post_init__(self):
        if self.formulation not in (TRANSFORMED, ORIGINAL):
            raise ValueError(f"unknown formulation {self.formulation!r}")


@dataclass(frozen=True)
class StepReport:
    dt_used: float
    positivity_clip_mass: float
    max_cfl: float


@lru_cache(maxsize=16)
def _dct_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of -laplacian on the DCT-II basis, shape (ny, nx)."""
    lamx = (2.0 / grid.hx**2) * (1.0 - np.cos(np.pi * np.arange(grid.nx) / grid.nx))
    lamy = (2.0 / grid.hy**2) * (1.0 - np.cos(np.pi * np.arange(grid.ny) / grid.ny))
    return lamy[:, None] + lamx[None, :]


def helmholtz_solve(
    grid: Grid,
    rhs: np.ndarray,
    coef: float,
    method: str = "dct",
    tol: float = 1e-12,
    maxiter: int = 5000,
) -> np.ndarray:
    """Solve (I - coef * laplacian) x = rhs with zero-flux boundaries.

    method "dct" is a direct diagonal solve in the cosine basis (exact for
    this stencil); "cg" is matrix-free conjugate gradients iterated to a
    relative residual of tol, raising NumericalError at the iteration cap.
    """
    if coef < 0:
        raise ValueError("helmholtz_solve needs coef >= 0")
    if method == "dct":
        lam = _dct_eigenvalues(grid)
        spec = _fft.dctn(rhs, type=2, norm="ortho")
        spec /= 1.0 + coef * lam
        return _fft.idctn(spec, type=2, norm="ortho")
    if method == "cg":
        return _cg_solve(grid, rhs, coef, tol, maxiter)
    raise ValueError(f"unknown helmholtz method {method!r}")


def _cg_solve(grid: Grid, rhs: np.ndarray, coef: float, tol: float, maxiter: int) -> np.ndarray:
    def apply(x):
        return x - coef * _grid.laplacian(grid, x)

    b_norm = float(np.sqrt((rhs * rhs).sum()))
    if b_norm == 0.0:
        return np.zeros_like(rhs)
    x = rhs.copy()  # warm start: identity part dominates for small coef
    r = rhs - apply(x)
    p = r.copy()
    rs = float((r * r).sum())
    for _ in range(maxiter):
        if np.sqrt(rs) <= tol * b_norm:
            return x
        ap = apply(p)
        alpha = rs / float((p * ap).sum())
        x += alpha * p
        r -= alpha * ap
        rs_new = float((r * r).sum())
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NumericalError(f"helmholtz cg did not reach tol={tol} within {maxiter} iterations")


def _project_mass(grid: Grid, f: np.ndarray, target: float) -> np.ndarray:
    """Pin the mean mode: shift f by a constant so integrate(f) == target.

    The implicit solve preserves the mean mode exactly in exact
    arithmetic; this removes the transform/summation round-off so the
    conserved mass cannot drift over long runs.
    """
    f += (target - _grid.integrate(grid, f)) / grid.area
    return f


def _max_face_gradient(g: FluxField) -> float:
    mx = float(np.max(np.abs(g.x))) if g.x.size else 0.0
    my = float(np.max(np.abs(g.y))) if g.y.size else 0.0
    return max(mx, my)


def _check_u_positivity(u: np.ndarray) -> None:
    umin = float(u.min())
    if umin < -POSITIVITY_TOL:
        raise NumericalError(
            f"cell density dropped to {umin:.3e}; reduce dt (or enable upwind fluxes)"
        )


def step_transformed(
    state: State,
    params: _model.Params,
    grid: Grid,
    dt: float,
    *,
    upwind: bool = False,
    method: str = "dct",
    explicit_diffusion: bool = False,
    forcing_u: Forcing | None = None,
    forcing_w: Forcing | None = None,
    mass_target: float | None = None,
) -> tuple[State, StepReport]:
    """One IMEX step of the transformed system.

    u gains the conservative drift divergence explicitly and diffuses
    implicitly; w gains -|grad w|^2 + f(u) explicitly and diffuses
    implicitly. mass_target, when given, is what integrate(u) is pinned
    to after the solve (defaults to the mass of the right-hand side,
    which the exact solve would preserve anyway). explicit_diffusion
    replaces the implicit solves by forward Euler, for oracle tests.
    """
    if state.formulation != TRANSFORMED:
        raise ValueError("step_transformed needs a transformed-formulation state")
    if dt <= 0:
        raise ValueError("dt must be positive")
    u, w = state.u, state.w
    t_new = state.t + dt

    g_w = _grid.face_gradient(grid, w)
    drift = _grid.div_chemotaxis_flux(grid, u, w, params.chi, upwind=upwind, faces=g_w)
    rhs_u = u + dt * drift
    if forcing_u is not None:
        rhs_u = rhs_u + dt * forcing_u(grid, t_new)

    gradw_sq = _grid.cell_gradient_sq(grid, w, faces=g_w)
    reaction = _model.f_eval(np.maximum(u, 0.0), params)
    rhs_w = w + dt * (reaction - gradw_sq)
    if forcing_w is not None:
        rhs_w = rhs_w + dt * forcing_w(grid, t_new)

    if explicit_diffusion:
        u_new = rhs_u + dt * _grid.laplacian(grid, u)
        w_new = rhs_w + dt * _grid.laplacian(grid, w)
    else:
        target = _grid.integrate(grid, rhs_u) if mass_target is None else mass_target
        u_new = _project_mass(grid, helmholtz_solve(grid, rhs_u, dt, method=method), target)
        w_new = helmholtz_solve(grid, rhs_w, dt, method=method)

    _check_u_positivity(u_new)
    max_cfl = params.chi * _max_face_gradient(g_w) * dt / min(grid.hx, grid.hy)
    report = StepReport(dt_used=dt, positivity_clip_mass=0.0, max_cfl=max_cfl)
    return State(u=u_new, w=w_new, t=t_new, formulation=TRANSFORMED), report


def step_original(
    state: State,
    params: _model.Params,
    grid: Grid,
    dt: float,
    *,
    upwind: bool = False,
    method: str = "dct",
    decay: str = "exponential",
    explicit_diffusion: bool = False,
    forcing_u: Forcing | None = None,
    forcing_v: Forcing | None = None,
    mass_target: float | None = None,
) -> tuple[State, StepReport]:
    """One IMEX step of the original system (state.w holds v).

    The signal decays by the exact factor exp(-f(u) dt) after its implicit
    diffusion (decay="euler" uses the explicit product instead), so
    0 < v <= v0_max is preserved unconditionally. The drift flux
    chi*(u/v)*grad(v) is assembled per face from arithmetic means.
    """
    if state.formulation != ORIGINAL:
        raise ValueError("step_original needs an original-formulation state")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if decay not in ("exponential", "euler"):
        raise ValueError(f"unknown decay submode {decay!r}")
    u, v = state.u, state.w
    vmin = float(v.min())
    if vmin <= 0.0:
        raise NumericalError(f"signal v hit {vmin:.3e}; the singular drift is undefined")
    t_new = state.t + dt

    g_v = _grid.face_gradient(grid, v)
    # face flux chi * u_face * (dv/dn) / v_face; same stencil family as the
    # transformed drift with dw/dn ~ -(dv/dn)/v_face.
    fx = np.zeros_like(g_v.x)
    fy = np.zeros_like(g_v.y)
    if upwind:
        # drift velocity is +chi*grad(v)/v: flow from the high-v side.
        ux = np.where(g_v.x[:, 1:-1] > 0, u[:, :-1], u[:, 1:])
        uy = np.where(g_v.y[1:-1, :] > 0, u[:-1, :], u[1:, :])
    else:
        ux = 0.5 * (u[:, 1:] + u[:, :-1])
        uy = 0.5 * (u[1:, :] + u[:-1, :])
    fx[:, 1:-1] = params.chi * ux * g_v.x[:, 1:-1] / (0.5 * (v[:, 1:] + v[:, :-1]))
    fy[1:-1, :] = params.chi * uy * g_v.y[1:-1, :] / (0.5 * (v[1:, :] + v[:-1, :]))
    drift = _grid.div_flux(grid, FluxField(fx, fy))

    rhs_u = u - dt * drift
    if forcing_u is not None:
        rhs_u = rhs_u + dt * forcing_u(grid, t_new)
    rhs_v = v if forcing_v is None else v + dt * forcing_v(grid, t_new)

    if explicit_diffusion:
        u_new = rhs_u + dt * _grid.laplacian(grid, u)
        v_star = rhs_v + dt * _grid.laplacian(grid, v)
    else:
        target = _grid.integrate(grid, rhs_u) if mass_target is None else mass_target
        u_new = _project_mass(grid, helmholtz_solve(grid, rhs_u, dt, method=method), target)
        v_star = helmholtz_solve(grid, rhs_v, dt, method=method)

    consumption = _model.f_eval(np.maximum(u, 0.0), params)
    if decay == "exponential":
        v_new = v_star * np.exp(-consumption * dt)
    else:
        v_new = v_star * (1.0 - consumption * dt)

    _check_u_positivity(u_new)
    if float(v_new.min()) <= 0.0:
        raise NumericalError("signal v lost positivity; dt is too large for this data")

    speed = _max_face_gradient(g_v) / vmin
    max_cfl = params.chi * speed * dt / min(grid.hx, grid.hy)
    report = StepReport(dt_used=dt, positivity_clip_mass=0.0, max_cfl=max_cfl)
    return State(u=u_new, w=v_new, t=t_new, formulation=ORIGINAL), report


def adaptive_dt(
    state: State,
    params: _model.Params,
    grid: Grid,
    dt_max: float,
    safety: float = 0.4,
    eps_speed: float = 1e-12,
) -> float:
    """CFL-style bound safety*min(h)/max(chi*max|grad w|, eps), capped at dt_max."""
    if state.formulation == TRANSFORMED:
        g = _grid.face_gradient(grid, state.w)
        speed = params.chi * _max_face_gradient(g)
    else:
        v = state.w
        g = _grid.face_gradient(grid, v)
        speed = params.chi * _max_face_gradient(g) / float(v.min())
    dt = safety * min(grid.hx, grid.hy) / max(speed, eps_speed)
    return float(min(dt, dt_max))


def step(state: State, params: _model.Params, grid: Grid, dt: float, **kwargs) -> tuple[State, StepReport]:
    """Dispatch on the state's formulation."""
    if state.formulation == TRANSFORMED:
        return step_transformed(state, params, grid, dt, **kwargs)
    return step_original(state, params, grid, dt, **kwargs)


# ---------------------------------------------------------------------------
# Manufactured-solution verification harness
# ---------------------------------------------------------------------------


class _Manufactured:
    """Separable reference solution A + B*g(t)*cos(pi x/lx)*cos(pi y/ly)."""

    def __init__(self, grid: Grid, a: float, b: float, rate: float):
        self.a, self.b, self.rate = a, b, rate
        x, y = grid.cell_centers()
        self.kx = np.pi / grid.lx
        self.ky = np.pi / grid.ly
        self.cos = np.cos(self.kx * x) * np.cos(self.ky * y)
        self.sinx_cosy = np.sin(self.kx * x) * np.cos(self.ky * y)
        self.cosx_siny = np.cos(self.kx * x) * np.sin(self.ky * y)
        self.lam = self.kx**2 + self.ky**2

    def g(self, t: float) -> float:
        return float(np.exp(-self.rate * t))

    def value(self, t: float) -> np.ndarray:
        return self.a + self.b * self.g(t) * self.cos

    def dt(self, t: float) -> np.ndarray:
        return -self.rate * self.b * self.g(t) * self.cos

    def lap(self, t: float) -> np.ndarray:
        return -self.lam * self.b * self.g(t) * self.cos

    def grad(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        c = self.b * self.g(t)
        return (-c * self.kx * self.sinx_cosy, -c * self.ky * self.cosx_siny)


def _transformed_sources(uref: _Manufactured, wref: _Manufactured, params: _model.Params):
    def grad_dot(t):
        ux, uy = uref.grad(t)
        wx, wy = wref.grad(t)
        return ux * wx + uy * wy

    def s_u(grid: Grid, t: float) -> np.ndarray:
        # u_t - lap(u) - chi*div(u grad w), with div(u grad w) = grad u.grad w + u lap w
        return uref.dt(t) - uref.lap(t) - params.chi * (grad_dot(t) + uref.value(t) * wref.lap(t))

    def s_w(grid: Grid, t: float) -> np.ndarray:
        wx, wy = wref.grad(t)
        return wref.dt(t) - wref.lap(t) + (wx**2 + wy**2) - _model.f_eval(uref.value(t), params)

    return s_u, s_w


def mms_convergence(
    system: str = "transformed",
    levels: int = 3,
    nx0: int = 16,
    t_end: float = 0.1,
    steps0: int = 10,
    params: _model.Params | None = None,
    method: str = "dct",
) -> list[tuple[float, float]]:
    """Manufactured-solution refinement study; returns [(h, max error)].

    Each level halves h and quarters dt (dt proportional to h^2), so a
    second-order-in-space scheme shows log2(e_h / e_{h/2}) near 2.
    system selects what is exercised: "diffusion" (heat operator only),
    "transformed" (full u-w system), or "original" (full u-v system).
    """
    if levels < 3:
        raise ValueError("mms_convergence needs at least 3 levels")
    if params is None:
        params = _model.Params(chi=0.5, beta=0.5)
    out: list[tuple[float, float]] = []
    for lev in range(levels):
        nx = nx0 * 2**lev
        grid = Grid(nx, nx, 1.0, 1.0)
        n_steps = steps0 * 4**lev
        dt = t_end / n_steps
        uref = _Manufactured(grid, a=2.0, b=0.5, rate=1.0)

        if system == "diffusion":
            u = uref.value(0.0)
            for n in range(n_steps):
                t_new = (n + 1) * dt
                src = uref.dt(t_new) - uref.lap(t_new)
                u = helmholtz_solve(grid, u + dt * src, dt, method=method)
            err = float(np.max(np.abs(u - uref.value(t_end))))
        elif system == "transformed":
            wref = _Manufactured(grid, a=1.0, b=0.4, rate=0.5)
            s_u, s_w = _transformed_sources(uref, wref, params)
            st = State(u=uref.value(0.0), w=wref.value(0.0), t=0.0, formulation=TRANSFORMED)
            for _ in range(n_steps):
                st, _rep = step_transformed(
                    st, params, grid, dt, method=method, forcing_u=s_u, forcing_w=s_w
                )
            err = max(
                float(np.max(np.abs(st.u - uref.value(t_end)))),
                float(np.max(np.abs(st.w - wref.value(t_end)))),
            )
        elif system == "original":
            wref = _Manufactured(grid, a=1.0, b=0.4, rate=0.5)
            s_u, s_w = _transformed_sources(uref, wref, params)

            def w_to_v_ref(t: float) -> np.ndarray:
                return params.v0_max * np.exp(-wref.value(t))

            def s_v(grid_: Grid, t: float) -> np.ndarray:
                # v = v0_max e^{-w} turns the w-equation source into -v*s_w
                return -w_to_v_ref(t) * s_w(grid_, t)

            st = State(u=uref.value(0.0), w=w_to_v_ref(0.0), t=0.0, formulation=ORIGINAL)
            for _ in range(n_steps):
                st, _rep = step_original(
                    st, params, grid, dt, method=method, forcing_u=s_u, forcing_v=s_v
                )
            err = max(
                float(np.max(np.abs(st.u - uref.value(t_end)))),
                float(np.max(np.abs(st.w - w_to_v_ref(t_end)))),
            )
        else:
            raise ValueError(f"unknown mms system {system!r}")
        out.append((grid.hx, err))
    return out


def observed_orders(table: list[tuple[float, float]]) -> list[float]:
    """log2 error ratios between consecutive refinement levels."""
    return [float(np.log2(e0 / e1)) for (_, e0), (_, e1) in zip(table, table[1:])]
