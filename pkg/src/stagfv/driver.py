"""Run configuration, time loop orchestration and file outputs."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsReport, RunAccumulator
from .entropy import EntropyWeights, eta
from .errors import ConfigurationError, StagfvError
from .explicit_step import advective_dt_limit, stable_dt_limit, step_explicit
from .grid import Grid, build_uniform_grid, mesh_metrics
from .pressure_correction import step_pc
from .riemann import PRESETS, sample_profile, solve_star
from .state import SchemeConfig, Stabilization, State, init_riemann
from . import __version__

SCHEMA_VERSION = 1
_FMT = "%.17g"


@dataclass(frozen=True)
class RunConfig:
    """Validated description of one simulation run."""

    left: tuple[float, float, float]
    right: tuple[float, float, float]
    x0: float
    x_left: float
    x_right: float
    n_cells: int
    scheme_config: SchemeConfig
    dt_policy: str = "cfl"          # "cfl" or "fixed"
    dt_fixed: float = 0.0
    output_cadence: int = 0
    entropy_residuals: bool = True
    theorem_audits: bool = True
    error_window: tuple[float, float] | None = None
    preset_name: str | None = None


@dataclass
class RunReport:
    """Everything a finished (or aborted) run hands back."""

    config: RunConfig
    grid: Grid
    final_state: State
    diagnostics: DiagnosticsReport
    l1_error: float
    linf_error: float
    wall_clock: float
    n_steps: int
    conservation: dict
    failure: str | None = None


_SECTIONS = {
    "problem": {
        "preset",
        "left_rho",
        "left_u",
        "left_p",
        "right_rho",
        "right_u",
        "right_p",
        "x0",
        "gamma",
        "error_window_left",
        "error_window_right",
    },
    "grid": {"x_left", "x_right", "n_cells"},
    "scheme": {
        "scheme",
        "reconstruction",
        "cfl_fraction",
        "end_time",
        "stabilization_q",
        "stabilization_alpha",
        "picard_tol",
        "picard_max_iter",
        "dt_policy",
        "dt_fixed",
    },
    "output": {"cadence", "entropy_residuals", "theorem_audits"},
}


def _parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise ConfigurationError(f"line {lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw!r}")
        if current is None:
            raise ConfigurationError(f"line {lineno}: key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SECTIONS[current]:
            raise ConfigurationError(f"unknown key {current}.{key}")
        if key in sections[current]:
            raise ConfigurationError(f"duplicate key {current}.{key}")
        sections[current][key] = value
    return sections


def _get_float(sec: dict, key: str, default=None, path: str = "") -> float:
    if key not in sec:
        if default is None:
            raise ConfigurationError(f"missing mandatory key {path}{key}")
        return default
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigurationError(f"invalid number for {path}{key}: {sec[key]!r}") from exc


def _get_int(sec: dict, key: str, default=None, path: str = "") -> int:
    if key not in sec:
        if default is None:
            raise ConfigurationError(f"missing mandatory key {path}{key}")
        return default
    try:
        return int(sec[key])
    except ValueError as exc:
        raise ConfigurationError(f"invalid integer for {path}{key}: {sec[key]!r}") from exc


def _get_bool(sec: dict, key: str, default: bool, path: str = "") -> bool:
    if key not in sec:
        return default
    value = sec[key].lower()
    if value in ("on", "true", "1", "yes"):
        return True
    if value in ("off", "false", "0", "no"):
        return False
    raise ConfigurationError(f"invalid boolean for {path}{key}: {sec[key]!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a key=value run configuration document."""
    sections = _parse_sections(text)
    problem = sections.get("problem", {})
    grid_sec = sections.get("grid", {})
    scheme_sec = sections.get("scheme", {})
    out_sec = sections.get("output", {})

    preset_name = problem.get("preset")
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ConfigurationError(
                f"unknown preset {preset_name!r}; available: {sorted(PRESETS)}"
            )
        preset = PRESETS[preset_name]
        left = preset.left
        right = preset.right
        x0 = _get_float(problem, "x0", preset.x0, "problem.")
        gamma = _get_float(problem, "gamma", preset.gamma, "problem.")
        default_end = preset.t_end
    else:
        left = (
            _get_float(problem, "left_rho", None, "problem."),
            _get_float(problem, "left_u", None, "problem."),
            _get_float(problem, "left_p", None, "problem."),
        )
        right = (
            _get_float(problem, "right_rho", None, "problem."),
            _get_float(problem, "right_u", None, "problem."),
            _get_float(problem, "right_p", None, "problem."),
        )
        x0 = _get_float(problem, "x0", None, "problem.")
        gamma = _get_float(problem, "gamma", 1.4, "problem.")
        default_end = None

    x_left = _get_float(grid_sec, "x_left", 0.0, "grid.")
    x_right = _get_float(grid_sec, "x_right", 1.0, "grid.")
    n_cells = _get_int(grid_sec, "n_cells", None, "grid.")

    scheme = scheme_sec.get("scheme", "pressure_correction")
    reconstruction = scheme_sec.get("reconstruction", "upwind")
    cfl_fraction = _get_float(scheme_sec, "cfl_fraction", 0.5, "scheme.")
    end_time = _get_float(scheme_sec, "end_time", default_end, "scheme.")
    stab = None
    if "stabilization_q" in scheme_sec or "stabilization_alpha" in scheme_sec:
        q = _get_float(scheme_sec, "stabilization_q", None, "scheme.")
        alpha = _get_float(scheme_sec, "stabilization_alpha", None, "scheme.")
        try:
            stab = Stabilization(q=q, alpha=alpha)
        except ConfigurationError as exc:
            raise ConfigurationError(f"scheme.stabilization: {exc}") from exc
    try:
        scheme_config = SchemeConfig(
            gamma=gamma,
            scheme=scheme,
            reconstruction=reconstruction,
            cfl_fraction=cfl_fraction,
            end_time=end_time,
            stabilization=stab,
            picard_tol=_get_float(scheme_sec, "picard_tol", 1e-10, "scheme."),
            picard_max_iter=_get_int(scheme_sec, "picard_max_iter", 100, "scheme."),
        )
    except (ConfigurationError, StagfvError) as exc:
        raise ConfigurationError(f"scheme: {exc}") from exc

    dt_policy = scheme_sec.get("dt_policy", "cfl")
    if dt_policy not in ("cfl", "fixed"):
        raise ConfigurationError(f"scheme.dt_policy must be cfl or fixed, got {dt_policy!r}")
    dt_fixed = _get_float(scheme_sec, "dt_fixed", 0.0, "scheme.")
    if dt_policy == "fixed" and dt_fixed <= 0.0:
        raise ConfigurationError("scheme.dt_fixed must be positive with dt_policy=fixed")

    window = None
    if "error_window_left" in problem or "error_window_right" in problem:
        window = (
            _get_float(problem, "error_window_left", x_left, "problem."),
            _get_float(problem, "error_window_right", x_right, "problem."),
        )

    if not (x_left < x0 < x_right):
        raise ConfigurationError(
            f"problem.x0={x0} outside the grid ({x_left}, {x_right})"
        )
    if min(left[0], right[0], left[2], right[2]) <= 0.0:
        raise ConfigurationError("problem states need positive density and pressure")

    return RunConfig(
        left=left,
        right=right,
        x0=x0,
        x_left=x_left,
        x_right=x_right,
        n_cells=n_cells,
        scheme_config=scheme_config,
        dt_policy=dt_policy,
        dt_fixed=dt_fixed,
        output_cadence=_get_int(out_sec, "cadence", 0, "output."),
        entropy_residuals=_get_bool(out_sec, "entropy_residuals", True, "output."),
        theorem_audits=_get_bool(out_sec, "theorem_audits", True, "output."),
        error_window=window,
        preset_name=preset_name,
    )


def run_case(config: RunConfig, no_correction: bool = False) -> RunReport:
    """Advance the configured scheme to end_time and collect diagnostics.

    Deterministic for a fixed configuration.  A step failure aborts the
    loop and returns the partial results with the failure recorded.
    """
    cfg = config.scheme_config
    if no_correction:
        cfg = replace(cfg, source_enabled=False)
    grid = build_uniform_grid(config.x_left, config.x_right, config.n_cells)
    state = init_riemann(grid, config.left, config.right, config.x0, cfg.gamma)
    weights = EntropyWeights(cfg.gamma)
    q_stab = cfg.stabilization.q if cfg.stabilization is not None else 2.0
    acc = RunAccumulator(
        grid,
        weights,
        max(cfg.end_time, 1e-300),
        cfg.scheme,
        q=q_stab,
        record_every=config.output_cadence,
        track_residuals=config.entropy_residuals,
    )
    acc.start(state)

    t_start = time.perf_counter()
    n_steps = 0
    failure = None
    prev = state
    curr = state
    try:
        while curr.time < cfg.end_time - 1e-14 * max(cfg.end_time, 1.0):
            if config.dt_policy == "fixed":
                dt = config.dt_fixed
            elif cfg.scheme == "explicit":
                dt = cfg.cfl_fraction * stable_dt_limit(curr, grid, cfg)
            else:
                dt = cfg.cfl_fraction * advective_dt_limit(curr, grid, cfg.gamma)
            dt = min(dt, cfg.end_time - curr.time)
            if cfg.scheme == "explicit":
                new, record = step_explicit(curr, dt, cfg, grid)
                acc.after_step(curr, new, record.flux, dt, record)
                prev, curr = curr, new
            else:
                new, record = step_pc(prev, curr, dt, cfg, grid)
                acc.after_step(curr, new, record.flux, dt, record, state_prev=prev)
                prev, curr = curr, new
            n_steps += 1
    except StagfvError as exc:
        failure = f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t_start

    diagnostics = acc.finalize(mesh_metrics(grid))
    l1, linf = compute_error(curr, grid, config)
    conservation = {
        "max_mass_drift": diagnostics.max_mass_drift,
        "max_energy_drift": diagnostics.max_energy_drift,
        "budget_drift": diagnostics.budget_drift,
        "r2_accumulated": diagnostics.r2_accumulated,
    }
    return RunReport(
        config=config,
        grid=grid,
        final_state=curr,
        diagnostics=diagnostics,
        l1_error=l1,
        linf_error=linf,
        wall_clock=wall,
        n_steps=n_steps,
        conservation=conservation,
        failure=failure,
    )


def exact_state(config: RunConfig, grid: Grid, t: float):
    """Exact Riemann profile of the configured problem at time t."""
    sol = solve_star(config.left, config.right, config.scheme_config.gamma)
    return sample_profile(sol, grid.cell_centers, t, config.x0)


def compute_error(state: State, grid: Grid, config: RunConfig) -> tuple[float, float]:
    """L1 and Linf density error against the exact solution.

    Restricted to the configured error window so wall-influenced regions
    of an enlarged domain can be excluded from the comparison.
    """
    rho_ex, _, _ = exact_state(config, grid, state.time)
    lo, hi = config.error_window or (config.x_left, config.x_right)
    mask = (grid.cell_centers >= lo) & (grid.cell_centers <= hi)
    diff = np.abs(state.rho - rho_ex)
    l1 = float(np.sum(grid.cell_measures()[mask] * diff[mask]))
    linf = float(np.max(diff[mask])) if np.any(mask) else 0.0
    return l1, linf


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]):
    rows = np.column_stack(columns)
    with path.open("w") as fh:
        fh.write(f"# schema={SCHEMA_VERSION} stagfv={__version__}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def write_outputs(report: RunReport, out_dir) -> list[Path]:
    """Write fields.csv, exact.csv, diag.csv, audit.txt and plot.gp-data."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = report.grid
    state = report.final_state
    cfg = report.config
    weights = EntropyWeights(cfg.scheme_config.gamma)
    u_center = 0.5 * (state.u[:-1] + state.u[1:])
    eta_cells = eta(state.rho, state.e, weights)
    written = []

    fields = out / "fields.csv"
    _write_table(
        fields,
        ["x", "rho", "u", "p", "e", "eta"],
        [grid.cell_centers, state.rho, u_center, state.p, state.e, eta_cells],
    )
    written.append(fields)

    rho_ex, u_ex, p_ex = exact_state(cfg, grid, state.time)
    e_ex = p_ex / ((cfg.scheme_config.gamma - 1.0) * rho_ex)
    eta_ex = eta(rho_ex, e_ex, weights)
    exact = out / "exact.csv"
    _write_table(
        exact,
        ["x", "rho", "u", "p", "e", "eta"],
        [grid.cell_centers, rho_ex, u_ex, p_ex, e_ex, eta_ex],
    )
    written.append(exact)

    diag = report.diagnostics
    n = len(diag.times)
    res_series = diag.max_entropy_residual
    if len(res_series) < n - 1:
        res_series = np.zeros(max(n - 1, 0))
    cfl_series = diag.cfl_entropy_dt
    if len(cfl_series) < n - 1:
        cfl_series = np.full(max(n - 1, 0), np.inf)
    diag_path = out / "diag.csv"
    _write_table(
        diag_path,
        ["t", "total_mass", "total_energy", "global_entropy", "max_entropy_residual", "cfl_entropy_dt"],
        [
            diag.times,
            diag.total_mass,
            diag.total_energy,
            diag.global_entropy,
            np.concatenate(([0.0], res_series)) if n else np.zeros(0),
            np.concatenate(([np.inf], cfl_series)) if n else np.zeros(0),
        ],
    )
    written.append(diag_path)

    audit = out / "audit.txt"
    with audit.open("w") as fh:
        fh.write(f"# schema={SCHEMA_VERSION} stagfv={__version__}\n")
        fh.write(f"steps={report.n_steps}\n")
        fh.write(f"wall_clock={report.wall_clock:.3f}\n")
        fh.write(f"l1_error={report.l1_error:.6e}\n")
        fh.write(f"linf_error={report.linf_error:.6e}\n")
        fh.write(f"m_bound={diag.m_bound:.6e}\n")
        for key, value in sorted(report.conservation.items()):
            fh.write(f"{key}={value:.6e}\n")
        fh.write(f"bv_time_rho={diag.bv_time['rho']:.6e}\n")
        fh.write(f"bv_time_e={diag.bv_time['e']:.6e}\n")
        fh.write(f"bv_space_rho={diag.bv_space['rho']:.6e}\n")
        fh.write(f"bv_space_e={diag.bv_space['e']:.6e}\n")
        fh.write(f"velocity_norm_q={diag.velocity_norm_q:.6e}\n")
        fh.write(f"velocity_norm_qp={diag.velocity_norm_qp:.6e}\n")
        if report.config.theorem_audits:
            for key, value in sorted(diag.theorem_bounds.items()):
                fh.write(f"{key}={value:.6e}\n")
        if report.failure:
            fh.write(f"failure={report.failure}\n")
    written.append(audit)

    gp = out / "plot.gp-data"
    with gp.open("w") as fh:
        fh.write(f"# schema={SCHEMA_VERSION} stagfv={__version__}\n")
        for name, values in (
            ("rho", state.rho),
            ("u", u_center),
            ("p", state.p),
            ("e", state.e),
            ("eta", eta_cells),
            ("rho_exact", rho_ex),
        ):
            fh.write(f"# field {name}\n")
            for x, v in zip(grid.cell_centers, values):
                fh.write((_FMT + " " + _FMT + "\n") % (x, v))
            fh.write("\n\n")
    written.append(gp)
    return written
