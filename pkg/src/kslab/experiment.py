"""Experiment configuration, scenario presets, runs, sweeps, persistence.

The config file format is flat TOML-like text: `[section]` headers and
`key = value` lines, with numbers, booleans, quoted strings, and numeric
arrays as values. parse_config/write_config round-trip exactly.

A run writes into its output directory:
  config.toml      resolved configuration (canonical form)
  records.csv      diagnostics time series (published schema)
  audit.csv        inequality-audit series (when audits are on)
  snapshots/       CPLF1 field snapshots at the configured times
  thresholds.json  evaluated smallness thresholds and detected times
  summary.json     pass/fail of the hard invariants and run indicators
  checkpoint/      resume marker while the run is in flight
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import grid as _grid
from . import model as _model
from . import solver as _solver
from .errors import ConfigError, InvariantViolation, NumericalError
from .grid import Grid
from .solver import ORIGINAL, TRANSFORMED, State

MASS_DRIFT_TOL = 1e-12
SIGNAL_BOUND_TOL = 1e-13
W_FLOOR_TOL = -1e-13


@dataclass
class ExperimentConfig:
    """Validated, fully-defaulted description of one run."""

    # [grid]
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0
    # [model]
    chi: float = 0.5
    beta: float = 0.5
    f_variant: str = "power"
    f_table: str = ""
    v0_max: float = 1.0
    # [initial]
    preset: str = "bump"
    mass: float = 1.0
    bump_x: float = 0.5
    bump_y: float = 0.5
    bump_sigma: float = 0.1
    v0_profile: str = "constant"
    v0_contrast: float = 0.25
    # [time]
    t_end: float = 1.0
    dt_max: float = 1e-3
    safety: float = 0.4
    formulation: str = TRANSFORMED
    # [diagnostics]
    record_every: int = 50
    snapshot_times: list = field(default_factory=list)
    audit: bool = True
    eps1: float = 1.0 / 6.0
    eps2: float = 1.0 / 3.0
    eps_u: float = 1e-12
    # [functional]
    a: object = "auto"
    cgn: object = "probe"
    gn_mode: str = "ladyzhenskaya"
    gn_samples: int = 64
    gn_safety: float = 1.5
    # [run]
    seed: int = 0
    out_dir: str = "runs/out"
    upwind: bool = False
    solver: str = "dct"
    checkpoint_every: int = 20
    warnings: list = field(default_factory=list, compare=False)


_SECTIONS = {
    "grid": ["nx", "ny", "lx", "ly"],
    "model": ["chi", "beta", "f_variant", "f_table", "v0_max"],
    "initial": ["preset", "mass", "bump_x", "bump_y", "bump_sigma", "v0_profile", "v0_contrast"],
    "time": ["t_end", "dt_max", "safety", "formulation"],
    "diagnostics": ["record_every", "snapshot_times", "audit", "eps1", "eps2", "eps_u"],
    "functional": ["a", "cgn", "gn_mode", "gn_samples", "gn_safety"],
    "run": ["seed", "out_dir", "upwind", "solver", "checkpoint_every"],
}

_KEY_TO_SECTION = {k: s for s, ks in _SECTIONS.items() for k in ks}
_REQUIRED = ["nx", "ny", "chi", "beta", "mass", "t_end"]
_INT_KEYS = {"nx", "ny", "record_every", "gn_samples", "seed", "checkpoint_every"}


def _parse_value(raw: str, where: str):
    raw = raw.strip()
    if raw.startswith("[") and raw.endswith("]"):
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_value(v, where) for v in inner.split(",")]
    if raw in ("true", "false"):
        return raw == "true"
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse value {raw!r}")


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return repr(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    values = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KEY_TO_SECTION:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if section is not None and _KEY_TO_SECTION[key] != section:
            raise ConfigError(f"{where}: key {key!r} belongs to [{_KEY_TO_SECTION[key]}]")
        if key in values:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        values[key] = _parse_value(raw, where)

    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{source}: missing required keys {missing}")
    for k in _INT_KEYS & values.keys():
        if isinstance(values[k], float):
            raise ConfigError(f"{source}: key {k!r} must be an integer")
    cfg = ExperimentConfig(**values)
    validate_config(cfg)
    return cfg


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a config file; errors name the offending key."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config_text(path.read_text(), source=str(path))


def write_config(cfg: ExperimentConfig, path) -> None:
    """Write the canonical form; parse_config(write_config(cfg)) == cfg."""
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for k in keys:
            lines.append(f"{k} = {_format_value(getattr(cfg, k))}")
        lines.append("")
    Path(path).write_text("\n".join(lines))


def validate_config(cfg: ExperimentConfig) -> None:
    """Range-check every field; collect non-fatal notes in cfg.warnings."""

    def need(cond: bool, key: str, rule: str):
        if not cond:
            raise ConfigError(f"key {key!r}: {rule} (got {getattr(cfg, key)!r})")

    need(cfg.nx >= 3, "nx", "must be an integer >= 3")
    need(cfg.ny >= 3, "ny", "must be an integer >= 3")
    need(cfg.lx > 0, "lx", "must be positive")
    need(cfg.ly > 0, "ly", "must be positive")
    need(0 < cfg.chi < 1, "chi", "must lie in the open interval (0,1)")
    need(0 < cfg.beta < 1, "beta", "must lie in the open interval (0,1)")
    need(cfg.f_variant in ("power", "custom"), "f_variant", "must be 'power' or 'custom'")
    if cfg.f_variant == "custom":
        need(bool(cfg.f_table), "f_table", "required for the custom consumption law")
    need(cfg.v0_max > 0, "v0_max", "must be positive")
    need(cfg.preset in ("bump", "uniform"), "preset", "must be 'bump' or 'uniform'")
    need(cfg.mass >= 0, "mass", "must be nonnegative")
    need(cfg.bump_sigma > 0, "bump_sigma", "must be positive")
    need(cfg.v0_profile in ("constant", "cosine"), "v0_profile", "must be 'constant' or 'cosine'")
    need(0 < cfg.v0_contrast < 1, "v0_contrast", "must lie in (0,1)")
    need(cfg.t_end >= 0, "t_end", "must be nonnegative")
    need(cfg.dt_max > 0, "dt_max", "must be positive")
    need(0 < cfg.safety <= 1, "safety", "must lie in (0,1]")
    need(cfg.formulation in (TRANSFORMED, ORIGINAL), "formulation", "must be 'transformed' or 'original'")
    need(cfg.record_every >= 1, "record_every", "must be >= 1")
    need(all(isinstance(t, (int, float)) and t >= 0 for t in cfg.snapshot_times),
         "snapshot_times", "must be nonnegative numbers")
    need(cfg.eps1 > 0, "eps1", "must be positive")
    need(cfg.eps2 > 0, "eps2", "must be positive")
    need(cfg.eps_u > 0, "eps_u", "must be positive")
    need(cfg.a == "auto" or (isinstance(cfg.a, (int, float)) and cfg.a > 0),
         "a", "must be 'auto' or a positive number")
    need(cfg.cgn == "probe" or (isinstance(cfg.cgn, (int, float)) and cfg.cgn > 0),
         "cgn", "must be 'probe' or a positive number")
    need(cfg.gn_mode in diag.GN_MODES, "gn_mode", f"must be one of {diag.GN_MODES}")
    need(cfg.gn_samples >= 1, "gn_samples", "must be >= 1")
    need(cfg.gn_safety >= 1, "gn_safety", "must be >= 1")
    need(cfg.solver in ("dct", "cg"), "solver", "must be 'dct' or 'cg'")
    need(cfg.checkpoint_every >= 1, "checkpoint_every", "must be >= 1")

    if isinstance(cfg.a, (int, float)):
        lo, hi = _model.a_window(cfg.chi)
        if not (lo < cfg.a < hi):
            cfg.warnings.append(
                f"a={cfg.a!r} is outside the admissible window ({lo!r}, {hi!r}); "
                "the dissipation coefficient c0 is nonpositive there (user override)"
            )


def resolve_a(cfg: ExperimentConfig) -> float:
    # the window endpoints always sum to 1, so 1/2 is its center for every chi
    return 0.5 if cfg.a == "auto" else float(cfg.a)


def resolve_cgn(cfg: ExperimentConfig, grid: Grid) -> float:
    if cfg.cgn == "probe":
        probe = diag.gn_probe(grid, cfg.gn_samples, cfg.gn_mode, seed=cfg.seed)
        return probe * cfg.gn_safety
    return float(cfg.cgn)


def make_grid(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg.nx, cfg.ny, cfg.lx, cfg.ly)


def make_params(cfg: ExperimentConfig, grid: Grid) -> _model.Params:
    table = _model.ConsumptionTable.from_csv(cfg.f_table) if cfg.f_variant == "custom" else None
    return _model.Params(
        chi=cfg.chi,
        beta=cfg.beta,
        f_variant=cfg.f_variant,
        v0_max=cfg.v0_max,
        domain_area=grid.area,
        f_table=table,
    )


def initial_fields(cfg: ExperimentConfig, grid: Grid, params: _model.Params) -> tuple[np.ndarray, np.ndarray]:
    """Initial (u0, v0): a mass-normalized Gaussian bump or a uniform sheet,
    and a positive signal profile whose discrete maximum is exactly v0_max."""
    x, y = grid.cell_centers()
    if cfg.preset == "bump":
        shape = np.exp(-(((x - cfg.bump_x) ** 2 + (y - cfg.bump_y) ** 2) / cfg.bump_sigma**2))
        z = _grid.integrate(grid, shape)
        u0 = shape * (cfg.mass / z) if cfg.mass > 0 else grid.zeros()
    else:
        u0 = grid.full(cfg.mass / grid.area)

    if cfg.v0_profile == "constant":
        v0 = grid.full(params.v0_max)
    else:
        base = 0.5 + 0.5 * np.cos(np.pi * x / grid.lx) * np.cos(np.pi * y / grid.ly)
        v0 = (1.0 - cfg.v0_contrast) + cfg.v0_contrast * base
        v0 *= params.v0_max / v0.max()
    return u0, v0


def initial_state(cfg: ExperimentConfig, grid: Grid, params: _model.Params) -> State:
    u0, v0 = initial_fields(cfg, grid, params)
    if cfg.formulation == TRANSFORMED:
        return State(u=u0, w=np.asarray(_model.v_to_w(v0, params)), t=0.0, formulation=TRANSFORMED)
    return State(u=u0, w=v0, t=0.0, formulation=ORIGINAL)


# ---------------------------------------------------------------------------
# Run loop with checkpoint/resume
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Handle to a completed run: in-memory series plus on-disk artifacts."""

    cfg: ExperimentConfig
    grid: Grid
    params: _model.Params
    a: float
    cgn: float
    records: list
    audits: list
    final_state: State
    out_dir: Path
    summary: dict


def _check_state_bounds(state: State, params: _model.Params) -> list[str]:
    bad = []
    if state.formulation == TRANSFORMED:
        wmin = float(state.w.min())
        if wmin < W_FLOOR_TOL:
            bad.append(f"w dropped to {wmin!r}")
    else:
        vmin, vmax = float(state.w.min()), float(state.w.max())
        if vmin <= 0.0:
            bad.append(f"v dropped to {vmin!r}")
        if vmax > params.v0_max + SIGNAL_BOUND_TOL:
            bad.append(f"v rose to {vmax!r} above v0_max={params.v0_max!r}")
    return bad


def _record_to_dict(rec: diag.DiagnosticsRecord) -> dict:
    return {f.name: getattr(rec, f.name) for f in fields(rec)}


def _checkpoint(out_dir: Path, grid: Grid, state: State, step_idx: int, m0: float,
                records: list, snapshots_done: int, extrema: dict) -> None:
    ck = out_dir / "checkpoint"
    ck.mkdir(exist_ok=True)
    _grid.write_snapshot(ck / "u.cplf", grid, state.u)
    _grid.write_snapshot(ck / "sig.cplf", grid, state.w)
    marker = {
        "step": step_idx,
        "t": state.t,
        "m0": m0,
        "snapshots_done": snapshots_done,
        "extrema": extrema,
        "records": [_record_to_dict(r) for r in records],
    }
    tmp = ck / "marker.json.tmp"
    tmp.write_text(json.dumps(marker))
    tmp.replace(ck / "marker.json")


def _load_checkpoint(out_dir: Path, cfg: ExperimentConfig):
    marker_path = out_dir / "checkpoint" / "marker.json"
    if not marker_path.exists():
        return None
    marker = json.loads(marker_path.read_text())
    _g, u = _grid.read_snapshot(out_dir / "checkpoint" / "u.cplf")
    _g, sig = _grid.read_snapshot(out_dir / "checkpoint" / "sig.cplf")
    state = State(u=u, w=sig, t=float(marker["t"]), formulation=cfg.formulation)
    records = [diag.DiagnosticsRecord(**d) for d in marker["records"]]
    return (state, int(marker["step"]), float(marker["m0"]), int(marker["snapshots_done"]),
            records, dict(marker["extrema"]))


def run_experiment(cfg: ExperimentConfig, resume: bool = True, _abort_after_steps: int | None = None):
    """Integrate to t_end, emitting records, snapshots, and reports.

    Deterministic for a fixed config (single-threaded). If a checkpoint
    marker is present and resume is true, the run continues from it and
    the final outputs are identical to an uninterrupted run. Returns a
    Trajectory, or None when _abort_after_steps cut the run short (a test
    hook that simulates a killed process, leaving the marker behind).
    """
    grid = make_grid(cfg)
    params = make_params(cfg, grid)
    a_eff = resolve_a(cfg)
    cgn_eff = resolve_cgn(cfg, grid)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "snapshots").mkdir(exist_ok=True)
    write_config(cfg, out_dir / "config.toml")

    snap_times = sorted(float(t) for t in cfg.snapshot_times)
    loaded = _load_checkpoint(out_dir, cfg) if resume else None
    if loaded is not None:
        state, step_idx, m0, snapshots_done, records, extrema = loaded
    else:
        state = initial_state(cfg, grid, params)
        step_idx = 0
        m0 = _grid.integrate(grid, state.u)
        snapshots_done = 0
        records = []
        extrema = {"min_w": math.inf, "max_w": -math.inf, "min_v": math.inf, "max_v": -math.inf}

    def emit_record() -> None:
        rec = diag.record(state, params, grid, a_eff, eps_u=cfg.eps_u, extended=cfg.audit)
        drift = abs(rec.mass - m0) / (abs(m0) if m0 != 0.0 else 1.0)
        if drift > MASS_DRIFT_TOL:
            raise InvariantViolation(f"t={state.t}: relative mass drift {drift!r}")
        bad = _check_state_bounds(state, params) + diag.check_record_invariants(rec, params)
        if bad:
            raise InvariantViolation(f"t={state.t}: " + "; ".join(bad))
        if cfg.formulation == TRANSFORMED:
            w_lo, w_hi = float(state.w.min()), float(state.w.max())
            v_lo, v_hi = params.v0_max * math.exp(-w_hi), params.v0_max * math.exp(-w_lo)
        else:
            v_lo, v_hi = float(state.w.min()), float(state.w.max())
            w_lo, w_hi = -math.log(v_hi / params.v0_max), -math.log(v_lo / params.v0_max)
        extrema["min_w"] = min(extrema["min_w"], w_lo)
        extrema["max_w"] = max(extrema["max_w"], w_hi)
        extrema["min_v"] = min(extrema["min_v"], v_lo)
        extrema["max_v"] = max(extrema["max_v"], v_hi)
        records.append(rec)

    def emit_snapshots() -> None:
        nonlocal snapshots_done
        while snapshots_done < len(snap_times) and state.t >= snap_times[snapshots_done] - 1e-14:
            tag = f"{snapshots_done:03d}"
            _grid.write_snapshot(out_dir / "snapshots" / f"u_{tag}.cplf", grid, state.u)
            _grid.write_snapshot(out_dir / "snapshots" / f"sig_{tag}.cplf", grid, state.w)
            snapshots_done += 1

    if not records:
        emit_record()
        emit_snapshots()

    step_kwargs = dict(upwind=cfg.upwind, method=cfg.solver, mass_target=m0)
    while state.t < cfg.t_end - 1e-14:
        dt = _solver.adaptive_dt(state, params, grid, cfg.dt_max, safety=cfg.safety)
        dt = min(dt, cfg.t_end - state.t)
        state, _report = _solver.step(state, params, grid, dt, **step_kwargs)
        step_idx += 1
        emit_snapshots()
        at_end = state.t >= cfg.t_end - 1e-14
        if step_idx % cfg.record_every == 0 or at_end:
            emit_record()
            if len(records) % cfg.checkpoint_every == 0 and not at_end:
                _checkpoint(out_dir, grid, state, step_idx, m0, records, snapshots_done, extrema)
        if _abort_after_steps is not None and step_idx >= _abort_after_steps:
            _checkpoint(out_dir, grid, state, step_idx, m0, records, snapshots_done, extrema)
            return None

    diag.write_records_csv(out_dir / "records.csv", records)
    audits = []
    if cfg.audit and len(records) >= 2:
        audits = diag.inequality_audit(records, params, cfg.eps1, cfg.eps2, cgn_eff)
        diag.write_audit_csv(out_dir / "audit.csv", audits)

    summary = _summarize(cfg, params, a_eff, cgn_eff, m0, records, extrema)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    _write_thresholds(out_dir, params, a_eff, cgn_eff, m0, summary)
    shutil.rmtree(out_dir / "checkpoint", ignore_errors=True)

    return Trajectory(
        cfg=cfg, grid=grid, params=params, a=a_eff, cgn=cgn_eff,
        records=records, audits=audits, final_state=state, out_dir=out_dir,
        summary=summary,
    )


def _summarize(cfg, params, a_eff, cgn_eff, m0, records, extrema) -> dict:
    ts = np.array([r.t for r in records])
    sup_u_all = max(r.sup_u for r in records)

    t_star = None
    if m0 > 0:
        for r in records:
            if diag.smallness_check(r.G, m0, params, cgn_eff):
                t_star = r.t
                break

    g_monotone = None
    if t_star is not None:
        g_at = next(r.G for r in records if r.t == t_star)
        slack = 1e-6 * abs(g_at) + 1e-10
        rep = diag.check_G_monotone(records, t_star, slack)
        g_monotone = {
            "passed": rep.passed,
            "max_increase": rep.max_increase,
            "slack": rep.slack,
            "n_intervals": rep.n_intervals,
            "worst_interval": rep.worst_interval,
        }

    # linear-in-time envelopes: smallest C with quantity <= C*(1+t) on the records
    entropy_c = max(max(r.entropy, 0.0) / (1.0 + r.t) for r in records)
    fisher_vals = np.array([r.fisher for r in records])
    fisher_accum = np.concatenate([[0.0], np.cumsum(np.diff(ts) * 0.5 * (fisher_vals[1:] + fisher_vals[:-1]))])
    fisher_c = float(max(fisher_accum / (1.0 + ts)))

    drift = max(abs(r.mass - m0) for r in records) / max(abs(m0), 1.0)
    return {
        "formulation": cfg.formulation,
        "t_end": records[-1].t,
        "n_records": len(records),
        "a": a_eff,
        "c0": _model.c0_of(params.chi, a_eff),
        "cgn": cgn_eff,
        "mass_initial": m0,
        "invariants": {
            "mass_conservation": drift <= MASS_DRIFT_TOL,
            "mass_drift": drift,
            "record_invariants": True,  # the run aborts on first violation
            "min_v_positive": all(r.min_v > 0 for r in records),
            "field_bounds": True,  # checked per record against the live state
        },
        "sup_u_overall": sup_u_all,
        "extrema": extrema,
        "t_star": t_star,
        "g_monotone": g_monotone,
        "envelopes": {"entropy_C": entropy_c, "fisher_accum_C": fisher_c},
    }


def _write_thresholds(out_dir: Path, params, a_eff, cgn_eff, m0, summary) -> None:
    if m0 <= 0:
        return
    m_upper = 9.0 / (17.0 * 32.0 * cgn_eff)
    rep = _model.threshold_boundedness(m0, params, cgn_eff, 0.5 * m_upper, a=a_eff)
    payload = {
        "a_minus": rep.a_minus,
        "a_plus": rep.a_plus,
        "c0": rep.c0,
        "g_threshold": rep.g_threshold,
        "M_window_upper": rep.M_window_upper,
        "M_used": 0.5 * m_upper,
        "m_star_bound": rep.m_star_bound,
        "cgn_used": rep.cgn_used,
        "mass": m0,
        "t_star": summary["t_star"],
    }
    (out_dir / "thresholds.json").write_text(json.dumps(payload, indent=2))


def run_scenario(cfg: ExperimentConfig, resume: bool = True) -> int:
    """Run and map outcomes to exit codes (0/3/4); partial outputs stay."""
    try:
        run_experiment(cfg, resume=resume)
        return 0
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}")
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}")
        return 3


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("chi", "beta", "mass", "nx")


@dataclass
class SweepSpec:
    base: ExperimentConfig
    axes: dict  # axis name -> list of values


def parse_sweep(path) -> SweepSpec:
    """A sweep file is a config file plus a [sweep] section of axis lists."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"sweep file {path} does not exist")
    lines = path.read_text().splitlines()
    base_lines, axes = [], {}
    in_sweep = False
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped == "[sweep]":
            in_sweep = True
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            in_sweep = False
        if in_sweep and stripped:
            key, raw = (s.strip() for s in stripped.split("=", 1))
            if key not in SWEEP_AXES:
                raise ConfigError(f"{path}:{lineno}: sweep axis {key!r} not in {SWEEP_AXES}")
            vals = _parse_value(raw, f"{path}:{lineno}")
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{path}:{lineno}: sweep axis {key!r} needs a nonempty list")
            axes[key] = vals
        elif not in_sweep:
            base_lines.append(line)
    if not axes:
        raise ConfigError(f"{path}: sweep file has no [sweep] axes")
    base = parse_config_text("\n".join(base_lines), source=str(path))
    return SweepSpec(base=base, axes=axes)


def sweep_cells(spec: SweepSpec) -> list[ExperimentConfig]:
    """Cartesian product of the axis values; cell directories are named by
    the axis values so the naming is injective."""
    names = sorted(spec.axes)
    cells = [{}]
    for name in names:
        cells = [dict(c, **{name: v}) for c in cells for v in spec.axes[name]]
    out = []
    root = Path(spec.base.out_dir)
    for cell in cells:
        tag = "_".join(f"{k}={cell[k]!r}" for k in names)
        overrides = dict(cell)
        if "nx" in overrides:
            overrides["ny"] = overrides["nx"]
        cfg = replace(spec.base, **overrides, out_dir=str(root / tag))
        cfg.warnings = []
        validate_config(cfg)
        out.append(cfg)
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> int:
    cfgs = sweep_cells(spec)
    if workers > 1:
        from multiprocessing import Pool

        with Pool(workers) as pool:
            statuses = pool.map(run_scenario, cfgs)
    else:
        statuses = [run_scenario(c) for c in cfgs]
    root = Path(spec.base.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "sweep_index.csv", "w") as fh:
        names = sorted(spec.axes)
        fh.write(",".join(names + ["dir", "status"]) + "\n")
        for cfg, status in zip(cfgs, statuses):
            vals = [repr(getattr(cfg, n)) for n in names]
            fh.write(",".join(vals + [Path(cfg.out_dir).name, str(status)]) + "\n")
    return max(statuses, default=0)


# ---------------------------------------------------------------------------
# Independent verification from the CSV
# ---------------------------------------------------------------------------


def verify_run_dir(out_dir) -> dict:
    """Re-check the CSV-checkable hard invariants of a completed run.

    Reads records.csv and config.toml only (no in-memory state), so it is
    an independent auditor of what the summary claims.
    """
    out_dir = Path(out_dir)
    cfg = parse_config(out_dir / "config.toml")
    grid = make_grid(cfg)
    params = make_params(cfg, grid)
    records = diag.read_records_csv(out_dir / "records.csv")
    if not records:
        raise ConfigError(f"{out_dir}: records.csv has no rows")

    m0 = records[0].mass
    drift = max(abs(r.mass - m0) for r in records) / (abs(m0) if m0 != 0.0 else 1.0)
    violations = []
    for r in records:
        violations.extend(f"t={r.t}: {msg}" for msg in diag.check_record_invariants(r, params))
    result = {
        "mass_conservation": drift <= MASS_DRIFT_TOL,
        "mass_drift": drift,
        "record_invariants": not violations,
        "min_v_positive": all(r.min_v > 0 for r in records),
        "violations": violations[:20],
    }
    summary_path = out_dir / "summary.json"
    if summary_path.exists():
        claimed = json.loads(summary_path.read_text())["invariants"]
        result["matches_summary"] = all(
            claimed[k] == result[k] for k in ("mass_conservation", "record_invariants", "min_v_positive")
        )
    return result
