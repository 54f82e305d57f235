"""Grid construction, discrete operators, quadrature, and snapshot IO.

Hand oracles here are independent index-by-index loops over cells and
faces; they never call the vectorized implementations they check.
"""

import numpy as np
import pytest

from kslab.grid import (
    FluxField,
    Grid,
    cell_gradient_sq,
    div_chemotaxis_flux,
    face_gradient,
    grad_lp_norm,
    integrate,
    laplacian,
    read_snapshot,
    write_snapshot,
)


# --- independent oracles ----------------------------------------------------


def oracle_face_gradient(grid, f):
    gx = np.zeros((grid.ny, grid.nx + 1))
    gy = np.zeros((grid.ny + 1, grid.nx))
    for j in range(grid.ny):
        for i in range(1, grid.nx):
            gx[j, i] = (f[j, i] - f[j, i - 1]) / grid.hx
    for j in range(1, grid.ny):
        for i in range(grid.nx):
            gy[j, i] = (f[j, i] - f[j - 1, i]) / grid.hy
    return gx, gy


def oracle_laplacian(grid, f):
    gx, gy = oracle_face_gradient(grid, f)
    out = np.zeros(grid.shape)
    for j in range(grid.ny):
        for i in range(grid.nx):
            out[j, i] = (gx[j, i + 1] - gx[j, i]) / grid.hx + (gy[j + 1, i] - gy[j, i]) / grid.hy
    return out


def oracle_chemo_div(grid, u, w, chi):
    gx, gy = oracle_face_gradient(grid, w)
    fx = np.zeros_like(gx)
    fy = np.zeros_like(gy)
    for j in range(grid.ny):
        for i in range(1, grid.nx):
            fx[j, i] = chi * 0.5 * (u[j, i] + u[j, i - 1]) * gx[j, i]
    for j in range(1, grid.ny):
        for i in range(grid.nx):
            fy[j, i] = chi * 0.5 * (u[j, i] + u[j - 1, i]) * gy[j, i]
    out = np.zeros(grid.shape)
    for j in range(grid.ny):
        for i in range(grid.nx):
            out[j, i] = (fx[j, i + 1] - fx[j, i]) / grid.hx + (fy[j + 1, i] - fy[j, i]) / grid.hy
    return out


def oracle_gradient_sq(grid, f):
    """Per direction: mean of squared interior-face gradients next to the cell."""
    gx, gy = oracle_face_gradient(grid, f)
    out = np.zeros(grid.shape)
    for j in range(grid.ny):
        for i in range(grid.nx):
            xs = [gx[j, k] ** 2 for k in (i, i + 1) if 1 <= k <= grid.nx - 1]
            ys = [gy[k, i] ** 2 for k in (j, j + 1) if 1 <= k <= grid.ny - 1]
            out[j, i] = sum(xs) / len(xs) + sum(ys) / len(ys)
    return out


# --- construction -----------------------------------------------------------


def test_build_square():
    g = Grid(4, 4, 1.0, 1.0)
    assert g.hx == g.hy == 0.25
    assert g.area == 1.0


def test_build_rectangle():
    g = Grid(3, 5, 2.0, 1.0)
    assert np.isclose(g.hx, 2.0 / 3.0)
    assert np.isclose(g.hy, 0.2)
    assert g.area == 2.0
    assert np.isclose(g.area, g.nx * g.ny * g.hx * g.hy)


@pytest.mark.parametrize("nx,ny,lx,ly", [(2, 4, 1.0, 1.0), (4, 2, 1.0, 1.0), (4, 4, 0.0, 1.0), (4, 4, 1.0, -1.0)])
def test_build_rejects_bad_dims(nx, ny, lx, ly):
    with pytest.raises(ValueError):
        Grid(nx, ny, lx, ly)


# --- laplacian --------------------------------------------------------------


def test_laplacian_constant_is_zero():
    g = Grid(5, 7, 2.0, 3.0)
    assert np.allclose(laplacian(g, g.full(3.7)), 0.0)


def test_laplacian_spike_3x3():
    # unit spike at the center, h = 1: center -4, edge neighbors +1, corners 0
    g = Grid(3, 3, 3.0, 3.0)
    f = g.zeros()
    f[1, 1] = 1.0
    lap = laplacian(g, f)
    expected = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
    assert np.allclose(lap, expected)


def test_laplacian_cosine_eigenfield():
    g = Grid(24, 16, 1.5, 1.0)
    x, _ = g.cell_centers()
    f = np.cos(np.pi * x / g.lx)
    lam_h = (2.0 / g.hx**2) * (1.0 - np.cos(np.pi * g.hx / g.lx))
    assert np.allclose(laplacian(g, f), -lam_h * f, atol=1e-12)


def test_laplacian_matches_oracle():
    g = Grid(5, 4, 1.3, 0.7)
    f = np.random.default_rng(1).normal(size=g.shape)
    assert np.allclose(laplacian(g, f), oracle_laplacian(g, f), atol=1e-13)


def test_laplacian_zero_sum_and_linearity():
    g = Grid(17, 11, 1.0, 2.0)
    rng = np.random.default_rng(2)
    for _ in range(5):
        f = rng.normal(size=g.shape)
        tol = 1e-13 * np.abs(f).max() * g.area
        assert abs(integrate(g, laplacian(g, f))) <= tol
    f1, f2 = rng.normal(size=g.shape), rng.normal(size=g.shape)
    assert np.allclose(laplacian(g, 2.0 * f1 - 3.0 * f2), 2.0 * laplacian(g, f1) - 3.0 * laplacian(g, f2))


def test_laplacian_reflection_symmetry():
    g = Grid(12, 12, 1.0, 1.0)
    f = np.random.default_rng(3).normal(size=g.shape)
    assert np.allclose(laplacian(g, f[:, ::-1]), laplacian(g, f)[:, ::-1])
    assert np.allclose(laplacian(g, f[::-1, :]), laplacian(g, f)[::-1, :])


# --- face gradient ----------------------------------------------------------


def test_face_gradient_constant():
    g = Grid(4, 4, 1.0, 1.0)
    flux = face_gradient(g, g.full(2.0))
    assert np.allclose(flux.x, 0.0) and np.allclose(flux.y, 0.0)


def test_face_gradient_linear():
    g = Grid(8, 5, 1.0, 1.0)
    x, _ = g.cell_centers()
    flux = face_gradient(g, x)
    assert np.allclose(flux.x[:, 1:-1], 1.0)
    assert np.allclose(flux.x[:, 0], 0.0) and np.allclose(flux.x[:, -1], 0.0)
    assert np.allclose(flux.y, 0.0)


def test_face_gradient_matches_oracle():
    g = Grid(3, 3, 1.0, 1.0)
    f = np.random.default_rng(4).normal(size=g.shape)
    gx, gy = oracle_face_gradient(g, f)
    flux = face_gradient(g, f)
    assert np.allclose(flux.x, gx) and np.allclose(flux.y, gy)


# --- drift divergence -------------------------------------------------------


def test_chemo_flux_zero_for_constant_w():
    g = Grid(6, 6, 1.0, 1.0)
    u = np.random.default_rng(5).uniform(0.1, 2.0, g.shape)
    assert np.allclose(div_chemotaxis_flux(g, u, g.full(4.0), 0.7), 0.0)


def test_chemo_flux_constant_u_factors():
    g = Grid(9, 7, 1.0, 1.3)
    w = np.random.default_rng(6).normal(size=g.shape)
    c, chi = 1.7, 0.45
    out = div_chemotaxis_flux(g, g.full(c), w, chi)
    assert np.allclose(out, chi * c * laplacian(g, w), atol=1e-12)


def test_chemo_flux_matches_hand_oracle():
    g = Grid(3, 3, 1.0, 1.0)
    rng = np.random.default_rng(7)
    u = rng.uniform(0.0, 2.0, g.shape)
    w = rng.normal(size=g.shape)
    assert np.allclose(div_chemotaxis_flux(g, u, w, 0.6), oracle_chemo_div(g, u, w, 0.6), atol=1e-13)


@pytest.mark.parametrize("upwind", [False, True])
def test_chemo_flux_zero_sum(upwind):
    g = Grid(13, 9, 1.0, 2.0)
    rng = np.random.default_rng(8)
    for _ in range(4):
        u = rng.uniform(0.0, 3.0, g.shape)
        w = rng.normal(size=g.shape)
        out = div_chemotaxis_flux(g, u, w, 0.8, upwind=upwind)
        tol = 1e-13 * max(np.abs(u).max(), np.abs(w).max(), 1.0) * g.area / min(g.hx, g.hy)
        assert abs(integrate(g, out)) <= tol


def test_chemo_flux_linear_in_u():
    g = Grid(6, 6, 1.0, 1.0)
    rng = np.random.default_rng(9)
    u1, u2 = rng.uniform(0, 1, g.shape), rng.uniform(0, 1, g.shape)
    w = rng.normal(size=g.shape)
    lhs = div_chemotaxis_flux(g, 2.0 * u1 + 0.5 * u2, w, 0.9)
    rhs = 2.0 * div_chemotaxis_flux(g, u1, w, 0.9) + 0.5 * div_chemotaxis_flux(g, u2, w, 0.9)
    assert np.allclose(lhs, rhs)


def test_chemo_flux_upwind_constant_u_matches_central():
    g = Grid(7, 7, 1.0, 1.0)
    w = np.random.default_rng(10).normal(size=g.shape)
    a = div_chemotaxis_flux(g, g.full(1.3), w, 0.5, upwind=True)
    b = div_chemotaxis_flux(g, g.full(1.3), w, 0.5, upwind=False)
    assert np.allclose(a, b)


# --- quadrature -------------------------------------------------------------


def test_integrate_constants():
    assert np.isclose(integrate(Grid(7, 3, 1.0, 1.0), np.ones((3, 7))), 1.0)
    g = Grid(6, 4, 2.0, 0.5)
    assert np.isclose(integrate(g, g.full(3.0)), 3.0)


def test_integrate_linear_exact():
    # midpoint rule integrates linears exactly at any resolution
    for nx in (3, 10, 37):
        g = Grid(nx, 5, 1.0, 1.0)
        x, _ = g.cell_centers()
        assert abs(integrate(g, x) - 0.5) < 1e-14


def test_grad_lp_norm_constant():
    g = Grid(5, 5, 1.0, 1.0)
    for p in (1.0, 2.0, 4.0):
        assert grad_lp_norm(g, g.full(9.0), p) == 0.0


def test_grad_lp_norm_linear_fields():
    g = Grid(16, 16, 1.0, 1.0)
    x, y = g.cell_centers()
    # |grad| = 1 everywhere for f = x: every cell sees only unit face gradients
    assert np.isclose(grad_lp_norm(g, x, 2.0), 1.0, atol=1e-13)
    # f = x + y: |grad|^2 = 2 per cell, integral of 2^2 = 4
    assert np.isclose(grad_lp_norm(g, x + y, 4.0), 4.0, atol=1e-13)


def test_gradient_sq_matches_oracle():
    g = Grid(6, 5, 1.1, 0.9)
    f = np.random.default_rng(11).normal(size=g.shape)
    assert np.allclose(cell_gradient_sq(g, f), oracle_gradient_sq(g, f), atol=1e-13)
    for p in (2.0, 4.0):
        assert np.isclose(grad_lp_norm(g, f, p), integrate(g, oracle_gradient_sq(g, f) ** (p / 2)))


def test_grad_lp_norm_rejects_small_p():
    g = Grid(4, 4, 1.0, 1.0)
    with pytest.raises(ValueError):
        grad_lp_norm(g, g.zeros(), 0.5)


def test_grad_lp_norm_converges_for_smooth_field():
    # integral of |grad cos(pi x)|^2 on the unit square is pi^2/2
    errs = []
    for nx in (16, 64, 128):
        g = Grid(nx, nx, 1.0, 1.0)
        x, _ = g.cell_centers()
        errs.append(abs(grad_lp_norm(g, np.cos(np.pi * x), 2.0) - np.pi**2 / 2.0))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < errs[0] / 10.0


# --- snapshots --------------------------------------------------------------


def test_snapshot_roundtrip(tmp_path):
    g = Grid(5, 4, 1.25, 0.75)
    f = np.random.default_rng(12).normal(size=g.shape)
    path = tmp_path / "field.cplf"
    write_snapshot(path, g, f)
    g2, f2 = read_snapshot(path)
    assert g2 == g
    assert np.array_equal(f, f2)
    header = path.read_bytes().split(b"\n", 1)[0].decode()
    assert header.startswith("CPLF1 5 4 ")


def test_snapshot_rejects_garbage(tmp_path):
    path = tmp_path / "bad.cplf"
    path.write_bytes(b"NOPE 3 3 1.0 1.0\n" + b"\x00" * 72)
    with pytest.raises(ValueError):
        read_snapshot(path)
    path2 = tmp_path / "short.cplf"
    path2.write_bytes(b"CPLF1 3 3 1.0 1.0\n" + b"\x00" * 10)
    with pytest.raises(ValueError):
        read_snapshot(path2)
