"""Cell-centered rectangular grid with zero-flux boundaries.

A scalar field is a float64 array of shape (ny, nx), row-major: row j holds
the nx cell values at height y_j. All discrete operators use the 5-point
flux form with mirror ghost cells, so every boundary face carries exactly
zero flux and the discrete divergence theorem holds to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SNAPSHOT_MAGIC = "CPLF1"


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered mesh on the rectangle [0, lx] x [0, ly].

    nx, ny are cell counts per axis (at least 3 so stencils have interior
    cells); hx, hy the cell widths; area the domain measure.
    """

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3, got nx={self.nx}, ny={self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f"grid needs lx, ly > 0, got lx={self.lx}, ly={self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid arrays X, Y of cell-center coordinates, shape (ny, nx)."""
        xs = (np.arange(self.nx) + 0.5) * self.hx
        ys = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(xs, ys)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))


class FluxField(NamedTuple):
    """Face values: x has shape (ny, nx+1), y has shape (ny+1, nx).

    Entries on boundary faces are identically zero (zero-flux boundary).
    """

    x: np.ndarray
    y: np.ndarray


def _check_field(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {grid.shape}")
    return f


def face_gradient(grid: Grid, f: np.ndarray) -> FluxField:
    """Two-point gradient on interior faces; boundary faces are zero."""
    f = _check_field(grid, f)
    gx = np.zeros((grid.ny, grid.nx + 1))
    gy = np.zeros((grid.ny + 1, grid.nx))
    gx[:, 1:-1] = (f[:, 1:] - f[:, :-1]) / grid.hx
    gy[1:-1, :] = (f[1:, :] - f[:-1, :]) / grid.hy
    return FluxField(gx, gy)


def div_flux(grid: Grid, flux: FluxField) -> np.ndarray:
    """Discrete divergence of a face flux field, one value per cell."""
    return (flux.x[:, 1:] - flux.x[:, :-1]) / grid.hx + (flux.y[1:, :] - flux.y[:-1, :]) / grid.hy


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    """5-point flux-form Laplacian with zero-flux boundary faces.

    The cell-area-weighted sum of the output telescopes to zero up to
    round-off for any finite field.
    """
    return div_flux(grid, face_gradient(grid, f))


def div_chemotaxis_flux(
    grid: Grid,
    u: np.ndarray,
    w: np.ndarray,
    chi: float,
    upwind: bool = False,
    faces: FluxField | None = None,
) -> np.ndarray:
    """Conservative divergence of the drift flux chi * u * grad(w).

    The face value of u is the arithmetic mean of the adjacent cells
    (second order); with upwind=True it is taken from the cell the drift
    velocity -chi*grad(w) leaves, which is more robust near steep w.
    A precomputed face_gradient(grid, w) can be passed as faces.
    """
    u = _check_field(grid, u)
    g = face_gradient(grid, w) if faces is None else faces
    fx = np.zeros_like(g.x)
    fy = np.zeros_like(g.y)
    if upwind:
        # velocity at a face is -chi * g; flow from the low-w side.
        fx[:, 1:-1] = chi * g.x[:, 1:-1] * np.where(g.x[:, 1:-1] > 0, u[:, 1:], u[:, :-1])
        fy[1:-1, :] = chi * g.y[1:-1, :] * np.where(g.y[1:-1, :] > 0, u[1:, :], u[:-1, :])
    else:
        fx[:, 1:-1] = chi * g.x[:, 1:-1] * 0.5 * (u[:, 1:] + u[:, :-1])
        fy[1:-1, :] = chi * g.y[1:-1, :] * 0.5 * (u[1:, :] + u[:-1, :])
    return div_flux(grid, FluxField(fx, fy))


def integrate(grid: Grid, f: np.ndarray) -> float:
    """Midpoint quadrature: sum of cell values times cell area."""
    return float(_check_field(grid, f).sum() * grid.cell_area)


def cell_gradient_sq(grid: Grid, f: np.ndarray, faces: FluxField | None = None) -> np.ndarray:
    """Squared gradient magnitude reconstructed at cell centers.

    Per direction, the squared interior-face gradients adjacent to a cell
    are averaged; boundary cells use their single interior face. Boundary
    faces are excluded: including their imposed zeros would bias the norm
    of fields that are not flux-free (e.g. f = x) and drop the quadrature
    to first order.
    """
    g = face_gradient(grid, f) if faces is None else faces
    gx2 = g.x[:, 1:-1] ** 2
    gy2 = g.y[1:-1, :] ** 2
    cx = np.empty(grid.shape)
    cy = np.empty(grid.shape)
    cx[:, 1:-1] = 0.5 * (gx2[:, :-1] + gx2[:, 1:])
    cx[:, 0] = gx2[:, 0]
    cx[:, -1] = gx2[:, -1]
    cy[1:-1, :] = 0.5 * (gy2[:-1, :] + gy2[1:, :])
    cy[0, :] = gy2[0, :]
    cy[-1, :] = gy2[-1, :]
    return cx + cy


def grad_lp_norm(grid: Grid, f: np.ndarray, p: float) -> float:
    """Integral of |grad f|^p from the cell-centered reconstruction."""
    if p < 1:
        raise ValueError(f"grad_lp_norm needs p >= 1, got {p}")
    return integrate(grid, cell_gradient_sq(grid, f) ** (p / 2.0))


def write_snapshot(path, grid: Grid, f: np.ndarray) -> None:
    """Write a field snapshot: text header line, then little-endian float64.

    Header: 'CPLF1 nx ny lx ly'; payload is nx*ny values, row-major.
    """
    f = _check_field(grid, f)
    header = f"{SNAPSHOT_MAGIC} {grid.nx} {grid.ny} {grid.lx!r} {grid.ly!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[Grid, np.ndarray]:
    """Read a CPLF1 snapshot; returns the grid and the field."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 5 or header[0] != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a {SNAPSHOT_MAGIC} snapshot")
        nx, ny = int(header[1]), int(header[2])
        lx, ly = float(header[3]), float(header[4])
        grid = Grid(nx, ny, lx, ly)
        payload = fh.read(8 * nx * ny)
        if len(payload) != 8 * nx * ny:
            raise ValueError(f"{path}: truncated snapshot payload")
        f = np.frombuffer(payload, dtype="<f8").reshape(ny, nx).copy()
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{path}: snapshot contains non-finite values")
    return grid, f
