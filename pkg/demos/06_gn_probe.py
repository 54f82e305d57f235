"""Empirically probing the interpolation constant.

The smallness thresholds depend on an interpolation constant the theory
never pins down numerically. The probe evaluates inequality ratios over
a battery of flux-free cosine fields, giving an empirical lower bound
that is stable under grid refinement; a safety factor then turns it into
the working constant.
"""

import numpy as np

from kslab.diagnostics import gn_probe, single_cosine_ladyzhenskaya_ratio
from kslab.grid import Grid

print("== probe values across grids (seed 0, 40 samples) ==")
print("grid     interpolation(4;2,2)  L3-form     gradient-biharmonic")
for nx in (32, 64, 128):
    grid = Grid(nx, nx, 1.0, 1.0)
    vals = [gn_probe(grid, 40, mode, seed=0) for mode in ("ineq_4_2_2", "ineq_L3", "ladyzhenskaya")]
    print(f"{nx:4d}^2   {vals[0]:.6f}              {vals[1]:.6f}    {vals[2]:.6f}")

print()
print("== single-cosine ratio vs its continuum value ==")
target = 3.0 / (2.0 * np.pi**2)
print(f"continuum: {target:.8f}")
for nx in (16, 32, 64, 128):
    r = single_cosine_ladyzhenskaya_ratio(Grid(nx, nx, 1.0, 1.0))
    print(f"{nx:4d}^2:   {r:.8f}   (error {abs(r - target):.2e})")
