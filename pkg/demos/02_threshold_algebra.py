"""Closed-form threshold algebra.

For each sensitivity chi the admissible coupling weights a form an open
window around 1/2 whose endpoints satisfy a_minus + a_plus = 1 and
a_minus * a_plus = chi^2/4; the dissipation coefficient c0 is positive
exactly inside. The smallness report then turns a working interpolation
constant into concrete mass and energy thresholds.
"""

import numpy as np

from kslab.model import Params, a_window, c0_of, threshold_boundedness

print("chi     a_minus  a_plus   c0(a=1/2)")
for chi in (0.1, 0.3, 0.5, 0.6, 0.8, 0.95):
    lo, hi = a_window(chi)
    print(f"{chi:4.2f}    {lo:.4f}   {hi:.4f}   {c0_of(chi, 0.5):.4f}")

print()
print("== smallness report (chi = 0.5, beta = 0.5, unit square, cgn = 0.23) ==")
p = Params(chi=0.5, beta=0.5, domain_area=1.0)
cgn = 0.23
m_upper = 9.0 / (17.0 * 32.0 * cgn)
for mass in (1e-5, 1e-3, 0.1, 1.0):
    rep = threshold_boundedness(mass, p, cgn=cgn, M=0.5 * m_upper)
    sat = "satisfiable" if rep.g_threshold > 0 else "unsatisfiable at this mass"
    print(f"mass {mass:7.0e}: G-threshold {rep.g_threshold:+.4f} ({sat}), "
          f"mass bound {rep.m_star_bound:.3e}")
print(f"admissible energy budget window: (0, {m_upper:.4f})")
