"""Model constants, the consumption law and its primitives, the v <-> w
transformation, and the closed-form smallness thresholds.

The consumption rate f is either the power law f(s) = s^beta or a tabulated
curve; both must stay inside the envelopes 0 <= f(s) <= s^beta and
0 <= f'(s) <= beta*s^(beta-1), which is what every estimate monitored by
the diagnostics relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError


@dataclass(frozen=True)
class ConsumptionTable:
    """Tabulated consumption law with monotone-cubic interpolation.

    Loaded from a two-column CSV (s, f(s)) with strictly increasing s.
    Beyond the last knot f is held constant (so f' = 0 there).
    """

    s: np.ndarray
    f: np.ndarray

    @classmethod
    def from_csv(cls, path) -> "ConsumptionTable":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        if data.shape[1] != 2:
            raise ConfigError(f"f_table {path}: expected two columns (s, f)")
        s, f = data[:, 0], data[:, 1]
        if s[0] < 0:
            raise ConfigError(f"f_table {path}: s values must be >= 0")
        if np.any(np.diff(s) <= 0):
            raise ConfigError(f"f_table {path}: s values must be strictly increasing")
        return cls(s=s, f=f)

    def interpolator(self) -> PchipInterpolator:
        s, f = self.s, self.f
        if s[0] > 0.0:
            s = np.concatenate([[0.0], s])
            f = np.concatenate([[0.0], f])
        return PchipInterpolator(s, f, extrapolate=False)

    def validate_envelopes(self, beta: float, n_check: int = 2000) -> None:
        """Hard config error if the table leaves the admissible envelopes."""
        interp = self.interpolator()
        s = np.linspace(0.0, float(self.s[-1]), n_check)[1:]
        fv = interp(s)
        tol = 1e-9 * max(1.0, float(np.max(self.f)))
        if np.any(fv < -tol) or np.any(fv > s**beta + tol):
            raise ConfigError("f_table violates 0 <= f(s) <= s^beta")
        fp = interp.derivative()(s)
        if np.any(fp < -tol) or np.any(fp > beta * s ** (beta - 1.0) + tol):
            raise ConfigError("f_table violates 0 <= f'(s) <= beta*s^(beta-1)")


@dataclass(frozen=True)
class Params:
    """Model constants.

    chi: drift sensitivity, in (0,1). beta: consumption exponent, in (0,1).
    v0_max: sup of the initial signal. domain_area: measure of the rectangle.
    fprime_floor: below this s, f' is evaluated at the floor instead (the
    power law's derivative blows up at 0; the solver never consumes f', so
    the clamp only affects diagnostics).
    """

    chi: float
    beta: float
    f_variant: str = "power"
    v0_max: float = 1.0
    domain_area: float = 1.0
    f_table: ConsumptionTable | None = None
    fprime_floor: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.chi < 1.0):
            raise ConfigError(f"chi must be in (0,1), got {self.chi}")
        if not (0.0 < self.beta < 1.0):
            raise ConfigError(f"beta must be in (0,1), got {self.beta}")
        if not (self.v0_max > 0.0):
            raise ConfigError(f"v0_max must be positive, got {self.v0_max}")
        if not (self.domain_area > 0.0):
            raise ConfigError(f"domain_area must be positive, got {self.domain_area}")
        if self.f_variant not in ("power", "custom"):
            raise ConfigError(f"unknown f_variant {self.f_variant!r}")
        if self.f_variant == "custom":
            if self.f_table is None:
                raise ConfigError("f_variant 'custom' requires f_table")
            self.f_table.validate_envelopes(self.beta)


def f_eval(s, p: Params):
    """Consumption rate f(s) for s >= 0; f(0) = 0.

    Accepts scalars or arrays. Always satisfies 0 <= f(s) <= s^beta.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("f_eval needs s >= 0")
    if p.f_variant == "power":
        out = s**p.beta
    else:
        interp = p.f_table.interpolator()
        s_end = float(p.f_table.s[-1])
        out = np.where(s > s_end, float(p.f_table.f[-1]), interp(np.minimum(s, s_end)))
        out = np.where(s == 0.0, 0.0, out)
    return out if out.ndim else float(out)


def fprime_eval(s, p: Params, return_clamped: bool = False):
    """Derivative f'(s) for s > 0, nonnegative.

    For beta < 1 the power law's derivative is singular at 0, so inputs
    below p.fprime_floor are evaluated at the floor. With
    return_clamped=True also returns a boolean mask of clamped entries.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("fprime_eval needs s >= 0")
    clamped = s < p.fprime_floor
    sc = np.maximum(s, p.fprime_floor)
    if p.f_variant == "power":
        out = p.beta * sc ** (p.beta - 1.0)
    else:
        interp = p.f_table.interpolator().derivative()
        s_end = float(p.f_table.s[-1])
        out = np.maximum(np.where(sc > s_end, 0.0, interp(np.minimum(sc, s_end))), 0.0)
    if not out.ndim:
        out = float(out)
        clamped = bool(clamped)
    if return_clamped:
        return out, clamped
    return out


def H_eval(xi, p: Params):
    """Second primitive of sigma -> f'(sigma)/(chi*sigma), nonpositive.

    For the power law this is the closed form -xi^beta / (chi*(1-beta)).
    For tabulated f it is computed by nested quadrature of the defining
    double integral, with f' = 0 beyond the table range.
    """
    if p.beta >= 1.0:
        raise ValueError("H_eval requires beta < 1")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("H_eval needs xi >= 0")
    if p.f_variant == "power":
        out = -(xi**p.beta) / (p.chi * (1.0 - p.beta))
        return out if out.ndim else float(out)
    return _h_tabulated(xi, p)


def _h_tabulated(xi: np.ndarray, p: Params):
    # Inner integral I(s) = int_s^s_end f'(sig)/sig dsig (f' vanishes beyond
    # the table). The pchip derivative is bounded, so I has at worst a log
    # singularity at 0; geometric nodes resolve it. H(xi) is then the
    # cumulative outer trapezoid of -I/chi evaluated by interpolation.
    deriv = p.f_table.interpolator().derivative()
    s_end = float(p.f_table.s[-1])
    nodes = np.concatenate([[0.0], np.geomspace(s_end * 1e-12, s_end, 4000)])
    g = np.zeros_like(nodes)
    g[1:] = np.maximum(np.asarray(deriv(nodes[1:]), dtype=float), 0.0) / nodes[1:]
    seg = 0.5 * (g[1:] + g[:-1]) * np.diff(nodes)
    inner = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])  # I at each node
    h_seg = 0.5 * (inner[1:] + inner[:-1]) * np.diff(nodes)
    h_nodes = -np.concatenate([[0.0], np.cumsum(h_seg)]) / p.chi
    out = np.interp(np.minimum(xi, s_end), nodes, h_nodes)
    return out if out.ndim else float(out)


def v_to_w(v, p: Params):
    """Transform the signal: w = -log(v / v0_max), nonnegative.

    Rejects nonpositive v (the original sensitivity is singular there) and
    v above v0_max (which would make w negative).
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("v_to_w needs v > 0 everywhere")
    if np.any(v > p.v0_max * (1.0 + 1e-12)):
        raise ValueError("v_to_w needs v <= v0_max")
    out = -np.log(v / p.v0_max)
    return out if out.ndim else float(out)


def w_to_v(w, p: Params):
    """Inverse transform: v = v0_max * exp(-w) for w >= 0."""
    w = np.asarray(w, dtype=float)
    if np.any(w < -1e-12):
        raise ValueError("w_to_v needs w >= 0")
    out = p.v0_max * np.exp(-w)
    return out if out.ndim else float(out)


def a_window(chi: float) -> tuple[float, float]:
    """Open interval of admissible entropy-coupling weights a.

    Endpoints are the roots of 4a^2 - 4a + chi^2 = 0:
    a_minus = 1/2 - sqrt(1-chi^2)/2 and a_plus = 1/2 + sqrt(1-chi^2)/2.
    """
    if not (0.0 < chi < 1.0):
        raise ValueError(f"a_window needs chi in (0,1), got {chi}")
    half_root = 0.5 * math.sqrt(1.0 - chi * chi)
    return (0.5 - half_root, 0.5 + half_root)


def c0_of(chi: float, a: float) -> float:
    """Dissipation coefficient c0 = 1 - (chi+2a)^2 / (4a(chi+1)).

    Positive exactly when a lies strictly inside a_window(chi).
    """
    if not (0.0 < chi < 1.0):
        raise ValueError(f"c0_of needs chi in (0,1), got {chi}")
    if not (a > 0.0):
        raise ValueError(f"c0_of needs a > 0, got {a}")
    return 1.0 - (chi + 2.0 * a) ** 2 / (4.0 * a * (chi + 1.0))


@dataclass(frozen=True)
class ThresholdReport:
    """Closed-form smallness thresholds evaluated for one parameter set.

    a_minus/a_plus: admissible weight window; c0: dissipation coefficient
    at the chosen weight; g_threshold: the bound the functional G must be
    under for monotone decay to kick in; M_window_upper: admissible upper
    end for the eventual grad-w L2 budget; m_star_bound: mass below which
    the boundedness chain of estimates closes with the given M;
    cgn_used: the interpolation constant plugged into all of the above.
    """

    a_minus: float
    a_plus: float
    c0: float
    g_threshold: float
    M_window_upper: float
    m_star_bound: float
    cgn_used: float


def d1_coefficient(eps1: float, chi: float) -> float:
    """Young-inequality coefficient D1(eps1) = chi^3/3 * (6 eps1)^(-1/2)."""
    if eps1 <= 0:
        raise ValueError("d1_coefficient needs eps1 > 0")
    return chi**3 / 3.0 * (6.0 * eps1) ** -0.5


def d2_coefficient(eps2: float) -> float:
    """Young-inequality coefficient D2(eps2) = 2/3 * (3 eps2)^(-1/2)."""
    if eps2 <= 0:
        raise ValueError("d2_coefficient needs eps2 > 0")
    return 2.0 / 3.0 * (3.0 * eps2) ** -0.5


def threshold_boundedness(m: float, p: Params, cgn: float, M: float, a: float = 0.5) -> ThresholdReport:
    """Evaluate every closed-form smallness threshold at mass m.

    g_threshold = 1/(4 cgn) - m^beta |Omega|^(1-beta) / (chi (1-beta)); a
    negative value is a valid report (the condition is unsatisfiable at
    this mass). M_window_upper = 9/(17*32*cgn). m_star_bound is the
    minimum of the three admissible-mass terms evaluated with the given
    M; it is NaN when M falls outside the open window (the auxiliary
    constants below are undefined there).
    """
    if m <= 0 or cgn <= 0 or M <= 0:
        raise ValueError("threshold_boundedness needs m, cgn, M > 0")
    chi, beta, omega = p.chi, p.beta, p.domain_area
    lo, hi = a_window(chi)
    mass_term = m**beta * omega ** (1.0 - beta) / (chi * (1.0 - beta))
    g_threshold = 1.0 / (4.0 * cgn) - mass_term
    m_window_upper = 9.0 / (17.0 * 32.0 * cgn)

    t1 = (chi * (1.0 - beta) / (4.0 * cgn * omega ** (1.0 - beta))) ** (1.0 / beta)
    t2 = (M * chi * (1.0 - beta) / (4.0 * omega ** (1.0 - beta))) ** (1.0 / beta)
    if M < m_window_upper:
        eps1 = 1.0 / (32.0 * M * cgn) - 17.0 / 9.0
        eps2 = 1.0 / (96.0 * 9.0)
        gamma = d1_coefficient(eps1, chi) + 96.0 * beta * d2_coefficient(eps2)
        t3 = 1.0 / (16.0 * gamma * cgn**3)
        m_star = min(t1, t2, t3)
    else:
        m_star = float("nan")

    return ThresholdReport(
        a_minus=lo,
        a_plus=hi,
        c0=c0_of(chi, a),
        g_threshold=g_threshold,
        M_window_upper=m_window_upper,
        m_star_bound=m_star,
        cgn_used=cgn,
    )
