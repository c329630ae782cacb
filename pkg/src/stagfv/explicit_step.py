"""Explicit segregated time step.

Update order within a step: mass with old-time fluxes, internal energy
with old-time fluxes and old pressure work, EOS, then momentum on the dual
mesh driven by the freshly updated pressure.  The corrective heat source
is evaluated last, once the new velocity is known, and injected into the
internal energy so that the step conserves the total (internal plus dual
kinetic) energy exactly; its dual-cell pieces are the kinetic energy
remainders of the momentum update (time-stepping term, upwind dissipation,
wall flux deposits and the pressure-work level shift).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CflViolation, DomainError, StepFailure
from .flux import FluxSet, assemble_mass_fluxes, dual_density
from .grid import Grid
from .state import SchemeConfig, State, eos_pressure, sound_speed


@dataclass(frozen=True)
class ExpStepRecord:
    """Per-step bookkeeping of the explicit scheme."""

    S: np.ndarray = field(repr=False)
    cfl_used: float = 0.0
    stabilization_energy: float = 0.0
    flux: FluxSet | None = None


def advective_dt_limit(state: State, grid: Grid, gamma: float) -> float:
    """min |K| / max(|u| + c): the plumbing guard for explicit steps."""
    c = sound_speed(state.rho, state.p, gamma)
    u_cell = np.maximum(np.abs(state.u[:-1]), np.abs(state.u[1:]))
    return float(np.min(grid.cell_measures()) / np.max(u_cell + c))


def _pressure_impulse_dt_limit(state: State, grid: Grid, beta: float = 1.0) -> float:
    """Largest step whose pressure push cannot overdraw a cell's heat.

    The momentum update accelerates a face by roughly dt*|dp|/(m h); the
    conservative heat debit that pays for the created kinetic energy is
    then ~ dt^2 dp^2/(2 m h^2) per adjacent cell, which must stay below
    the smaller neighbor's internal energy.  Only binds across extreme
    pressure/density contrasts where the advective guard is blind to the
    impending acceleration.
    """
    dp = np.abs(state.p[1:] - state.p[:-1])
    if not np.any(dp > 0.0):
        return np.inf
    m = dual_density(state.rho, grid)[1:-1]
    rho_e = state.rho * state.e
    rho_e_min = np.minimum(rho_e[:-1], rho_e[1:])
    h = grid.cell_width
    with np.errstate(divide="ignore"):
        dt = h * np.sqrt(2.0 * beta * m * rho_e_min) / np.where(dp > 0.0, dp, 1.0)
    return float(np.min(np.where(dp > 0.0, dt, np.inf)))


def _viscous_dt_limit(state: State, grid: Grid, q: float, alpha: float) -> float:
    """Explicit stability limit of the q-Laplacian stabilization."""
    h = grid.cell_width
    du = np.abs(state.u[1:] - state.u[:-1]) / h
    g = du ** (q - 2.0)
    g_face = np.maximum(g[:-1], g[1:])
    m = dual_density(state.rho, grid)[1:-1]
    with np.errstate(divide="ignore"):
        dt = np.where(g_face > 0.0, m * h * h / (2.0 * h**alpha * np.where(g_face > 0, g_face, 1.0)), np.inf)
    return float(np.min(dt)) if dt.size else np.inf


def stable_dt_limit(state: State, grid: Grid, cfg: SchemeConfig) -> float:
    """Combined explicit step limit: advective guard plus the safety limits
    for the conservative heat debit and, when enabled, the stabilization."""
    limit = advective_dt_limit(state, grid, cfg.gamma)
    limit = min(limit, _pressure_impulse_dt_limit(state, grid))
    if cfg.stabilization is not None:
        limit = min(
            limit,
            _viscous_dt_limit(state, grid, cfg.stabilization.q, cfg.stabilization.alpha),
        )
    return limit


def stabilization_term(u: np.ndarray, grid: Grid, q: float, alpha: float) -> np.ndarray:
    """Nonlinear q-Laplacian stabilization density on the dual cells.

    Returns h^alpha D(|Du|^(q-2) Du) per face (zero at walls); its
    discrete work against any velocity field with wall values is
    non-positive by the summation-by-parts identity.
    """
    if not alpha < q - 1.0:
        raise DomainError(f"stabilization requires alpha < q - 1, got alpha={alpha}, q={q}")
    h = grid.cell_width
    du = (u[1:] - u[:-1]) / h               # gradient at cell centers
    g = np.abs(du) ** (q - 2.0) * du
    out = np.zeros_like(u)
    out[1:-1] = (h**alpha) * (g[1:] - g[:-1]) / grid.dual_measures()[1:-1]
    return out


def _dual_upwind_values(u: np.ndarray, f_dual: np.ndarray) -> np.ndarray:
    """Velocity advected through each dual face (at the cell centers)."""
    return np.where(f_dual >= 0.0, u[:-1], u[1:])


def corrective_source_explicit(
    state_old: State,
    state_new_partial: State,
    flux: FluxSet,
    dt: float,
    grid: Grid,
) -> np.ndarray:
    """Heat source making the explicit step conserve total energy exactly.

    ``state_new_partial`` carries the updated density and velocity together
    with the pre-correction internal energy and pressure.  Per interior
    dual cell the source collects the kinetic energy destroyed by the
    update (time term with the old dual density, upwind dissipation of the
    convection, and the shift between the pressure work seen by the
    momentum and internal energy equations); the wall half dual cells
    deposit the kinetic energy flux they absorb into the adjacent cells.
    The dual contributions are half-split onto the two neighbor cells.
    """
    u0 = state_old.u
    u1 = state_new_partial.u
    m0 = flux.rho_dual
    fd = flux.F_dual
    v = _dual_upwind_values(u0, fd)
    dual = grid.dual_measures()
    h = grid.cell_measures()

    j = np.arange(1, grid.n_cells)          # interior faces
    du = u1[j] - u0[j]
    time_term = 0.5 * dual[j] / dt * m0[j] * du**2
    upwind_diss = -0.5 * fd[j] * (v[j] - u1[j]) ** 2 + 0.5 * fd[j - 1] * (
        v[j - 1] - u1[j]
    ) ** 2
    dp_new = state_new_partial.p[1:] - state_new_partial.p[:-1]
    dp_old = state_old.p[1:] - state_old.p[:-1]
    pressure_shift = u1[j] * dp_new - u0[j] * dp_old
    sigma = time_term + upwind_diss + pressure_shift

    energy = np.zeros(grid.n_cells)
    energy[:-1] += 0.5 * sigma                     # dual cell j feeds cells j-1, j
    energy[1:] += 0.5 * sigma
    # kinetic energy flux through the outermost dual faces thermalizes at the walls
    energy[0] += -0.5 * fd[0] * v[0] ** 2
    energy[-1] += 0.5 * fd[-1] * v[-1] ** 2
    return energy / h


def step_explicit(
    state: State, dt: float, cfg: SchemeConfig, grid: Grid
) -> tuple[State, ExpStepRecord]:
    """Advance one explicit step; refuses time steps past the CFL guard."""
    limit = stable_dt_limit(state, grid, cfg)
    if dt > cfg.cfl_fraction * limit * (1.0 + 1e-12):
        raise CflViolation(dt, cfg.cfl_fraction * limit)

    flux = assemble_mass_fluxes(state, grid, cfg.reconstruction)
    h = grid.cell_width
    g_flux = flux.F_primal

    rho_new = state.rho - (dt / h) * (g_flux[1:] - g_flux[:-1])
    if np.any(rho_new <= 0.0):
        raise StepFailure("density lost positivity in the mass update")

    ge = g_flux * flux.e_face
    div_u = state.u[1:] - state.u[:-1]
    rho_e_star = state.rho * state.e - (dt / h) * (ge[1:] - ge[:-1]) - (
        dt / h
    ) * state.p * div_u
    e_star = rho_e_star / rho_new
    if np.any(e_star <= 0.0):
        raise StepFailure("internal energy lost positivity before correction")
    p_star = eos_pressure(rho_new, e_star, cfg.gamma)

    # momentum on the dual mesh, driven by the updated pressure
    m0 = flux.rho_dual
    m1 = dual_density(rho_new, grid)
    fd = flux.F_dual
    v = _dual_upwind_values(state.u, fd)
    dual = grid.dual_measures()
    u_new = np.zeros_like(state.u)
    j = np.arange(1, grid.n_cells)
    conv = fd[j] * v[j] - fd[j - 1] * v[j - 1]
    dp = p_star[1:] - p_star[:-1]
    rhs = (dual[j] / dt) * m0[j] * state.u[j] - conv - dp
    stab_energy = 0.0
    if cfg.stabilization is not None:
        stab = stabilization_term(
            state.u, grid, cfg.stabilization.q, cfg.stabilization.alpha
        )
        rhs = rhs + dual[j] * stab[j]
        u_new[j] = rhs / ((dual[j] / dt) * m1[j])
        stab_energy = float(dt * np.sum(dual[j] * stab[j] * u_new[j]))
    else:
        u_new[j] = rhs / ((dual[j] / dt) * m1[j])

    partial = State(rho=rho_new, e=e_star, p=p_star, u=u_new, time=state.time + dt)
    if cfg.source_enabled:
        source = corrective_source_explicit(state, partial, flux, dt, grid)
    else:
        source = np.zeros(grid.n_cells)

    e_new = e_star + dt * source / rho_new
    if np.any(e_new <= 0.0):
        raise StepFailure("internal energy lost positivity after correction")
    new_state = State(
        rho=rho_new,
        e=e_new,
        p=eos_pressure(rho_new, e_new, cfg.gamma),
        u=u_new,
        time=state.time + dt,
    )
    record = ExpStepRecord(
        S=source,
        cfl_used=dt / limit,
        stabilization_energy=stab_energy,
        flux=flux,
    )
    return new_state, record
