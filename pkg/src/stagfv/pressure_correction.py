"""Semi-implicit pressure-correction time step.

A step predicts the velocity from an implicit convection solve on the
dual mesh (weighted pressure gradient, coefficient chosen so the pressure
work telescopes in time), then solves the coupled correction block:
velocity update, implicit upwind mass balance, internal energy balance
with the corrective heat source, and the EOS closure.  Eliminating the
velocity and the EOS reduces the block to one nonlinear elliptic equation
for the pressure, solved by a damped semi-smooth Newton iteration; the
density follows from a positivity-preserving implicit upwind solve and
the internal energy from the EOS.

The heat source collects every kinetic-energy remainder of the prediction
(time Taylor term, upwind dissipation of the implicit convection, wall
flux deposits), so the internal plus dual kinetic energy changes per step
only through the telescoping pressure-gradient term, which the step
record exposes for exact budget accounting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import StepFailure
from .flux import FluxSet, dual_density, upwind_face_value, _muscl_values
from .entropy import xkl_phi_e, xkl_phi_rho
from .grid import Grid
from .state import SchemeConfig, State, eos_pressure


@dataclass(frozen=True)
class PcStepRecord:
    """Per-step bookkeeping of the pressure-correction scheme."""

    u_tilde: np.ndarray = field(repr=False)
    zeta: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    picard_iters: int = 0
    picard_residual: float = 0.0
    flux: FluxSet | None = None
    # energy removed by the telescoping pressure-gradient remainder this step
    r2_increment: float = 0.0


@dataclass(frozen=True)
class _Prediction:
    u_tilde: np.ndarray
    zeta: np.ndarray
    f_dual: np.ndarray          # dual fluxes of the previous mass step
    m_prev: np.ndarray
    m_curr: np.ndarray
    v_tilde: np.ndarray         # upwinded predicted velocity at the dual faces


def _previous_primal_fluxes(state_prev: State, state_curr: State, dt: float, grid: Grid) -> np.ndarray:
    """Primal mass fluxes of the step that produced ``state_curr``.

    In 1D the mass balance and the zero wall flux determine the interior
    fluxes by telescoping; using the current step length here rescales
    them so the shifted dual mass balance holds exactly for this step as
    well.
    """
    h = grid.cell_measures()
    g = np.zeros(grid.n_faces)
    g[1:] = -np.cumsum(h * (state_curr.rho - state_prev.rho)) / dt
    g[-1] = 0.0
    return g


def _predict(state_prev: State, state_curr: State, dt: float, grid: Grid) -> _Prediction:
    g_prev = _previous_primal_fluxes(state_prev, state_curr, dt, grid)
    f_dual = 0.5 * (g_prev[:-1] + g_prev[1:])
    m_prev = dual_density(state_prev.rho, grid)
    m_curr = dual_density(state_curr.rho, grid)
    zeta = np.sqrt(m_curr / m_prev)
    dual = grid.dual_measures()
    n = grid.n_cells

    f_pos = np.maximum(f_dual, 0.0)
    f_neg = np.maximum(-f_dual, 0.0)
    j = np.arange(1, n)
    diag = (dual[j] / dt) * m_curr[j] + f_pos[j] + f_neg[j - 1]
    sub = -f_pos[j - 1]
    sup = -f_neg[j]
    dp = state_curr.p[1:] - state_curr.p[:-1]
    rhs = (dual[j] / dt) * m_prev[j] * state_curr.u[j] - zeta[j] * dp

    ab = np.zeros((3, n - 1))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    u_int = solve_banded((1, 1), ab, rhs)
    u_tilde = np.zeros(grid.n_faces)
    u_tilde[1:-1] = u_int
    v_tilde = np.where(f_dual >= 0.0, u_tilde[:-1], u_tilde[1:])
    return _Prediction(
        u_tilde=u_tilde,
        zeta=zeta,
        f_dual=f_dual,
        m_prev=m_prev,
        m_curr=m_curr,
        v_tilde=v_tilde,
    )


def predict_velocity(state_prev: State, state_curr: State, dt: float, grid: Grid):
    """Implicit velocity prediction; returns (u_tilde, zeta) on the faces."""
    pred = _predict(state_prev, state_curr, dt, grid)
    return pred.u_tilde, pred.zeta


def corrective_source_pc(
    u_tilde: np.ndarray,
    u_prev: np.ndarray,
    rho_dual_prev: np.ndarray,
    dt: float,
    grid: Grid,
) -> np.ndarray:
    """Heat source from the prediction time-stepping remainder.

    Per interior dual cell: rho_dual_prev (u_tilde - u_prev)^2 / (2 dt),
    half-split with the dual measure onto the two adjacent cells.
    Non-negative by construction.
    """
    dual = grid.dual_measures()
    j = np.arange(1, grid.n_cells)
    r1 = 0.5 / dt * rho_dual_prev[j] * (u_tilde[j] - u_prev[j]) ** 2
    energy = np.zeros(grid.n_cells)
    energy[:-1] += 0.5 * dual[j] * r1
    energy[1:] += 0.5 * dual[j] * r1
    return energy / grid.cell_measures()


def _prediction_dissipation_source(pred: _Prediction, dt: float, grid: Grid) -> np.ndarray:
    """Upwind dissipation of the implicit convection plus wall deposits."""
    fd = pred.f_dual
    ut = pred.u_tilde
    v = pred.v_tilde
    j = np.arange(1, grid.n_cells)
    diss = -0.5 * fd[j] * (v[j] - ut[j]) ** 2 + 0.5 * fd[j - 1] * (v[j - 1] - ut[j]) ** 2
    energy = np.zeros(grid.n_cells)
    energy[:-1] += 0.5 * diss
    energy[1:] += 0.5 * diss
    energy[0] += -0.5 * fd[0] * v[0] ** 2
    energy[-1] += 0.5 * fd[-1] * v[-1] ** 2
    return energy / grid.cell_measures()


def _solve_mass(rho_n, u, dev_rho, dt, grid):
    """Implicit upwind mass solve; frozen reconstruction deviations on the RHS."""
    h = grid.cell_measures()
    n = grid.n_cells
    up = np.maximum(u, 0.0)
    un = np.maximum(-u, 0.0)
    diag = h / dt + up[1:] + un[:-1]
    sup = -un[1:][:-1]
    sub = -up[:-1][1:]
    rhs = (h / dt) * rho_n - (dev_rho[1:] * u[1:] - dev_rho[:-1] * u[:-1])
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    return solve_banded((1, 1), ab, rhs)


def _face_values(rho, e, u, reconstruction):
    """Interior-face reconstructions split into upwind part and deviation."""
    rho_up = upwind_face_value(rho[:-1], rho[1:], u[1:-1])
    e_up = upwind_face_value(e[:-1], e[1:], u[1:-1])
    if reconstruction == "upwind":
        z = np.zeros_like(rho_up)
        return rho_up, e_up, z, z
    rho_m = _muscl_values(rho, u[1:-1], xkl_phi_rho(rho[:-1], rho[1:]))
    e_m = _muscl_values(e, u[1:-1], xkl_phi_e(e[:-1], e[1:]))
    return rho_up, e_up, rho_m - rho_up, e_m - e_up


class _PressureProblem:
    """Nonlinear pressure form of the correction block.

    Eliminating the velocity update and the EOS turns the coupled system
    into one equation per cell for the pressure alone,

        h p/(dt (gamma-1)) + div(u(p) p_upw)/(gamma-1) + p div(u(p)) = rhs,

    with u(p) affine in the pressure gradient.  The residual and its
    tridiagonal (semi-smooth) Jacobian support the damped Newton solve.
    """

    def __init__(self, pred, state_curr, dt, gamma, grid):
        self.grid = grid
        self.gamma = gamma
        self.dt = dt
        n = grid.n_cells
        dual = grid.dual_measures()
        self.dp_n = state_curr.p[1:] - state_curr.p[:-1]
        self.zeta_dp_n = pred.zeta[1:-1] * self.dp_n
        coef = dt / (pred.m_curr[1:-1] * dual[1:-1])
        self.coef = coef
        self.coef_full = np.zeros(n + 1)
        self.coef_full[1:-1] = coef
        self.u_tilde = pred.u_tilde
        self.a_time = grid.cell_measures() / (dt * (gamma - 1.0))

    def velocity_of(self, p):
        u = np.zeros(self.grid.n_faces)
        u[1:-1] = self.u_tilde[1:-1] - self.coef * ((p[1:] - p[:-1]) - self.zeta_dp_n)
        return u

    def residual(self, p, rhs, dev_ree):
        g1 = self.gamma - 1.0
        u = self.velocity_of(p)
        pup = np.concatenate(
            ([p[0]], np.where(u[1:-1] >= 0.0, p[:-1], p[1:]), [p[-1]])
        )
        conv = u * (pup / g1 + dev_ree)
        conv[0] = 0.0
        conv[-1] = 0.0
        div_u = u[1:] - u[:-1]
        return self.a_time * p + (conv[1:] - conv[:-1]) + p * div_u - rhs, u

    def jacobian(self, p, u):
        g1 = self.gamma - 1.0
        n = self.grid.n_cells
        c = self.coef_full
        upwind_left = u[1:-1] >= 0.0
        pup = np.concatenate(
            ([p[0]], np.where(upwind_left, p[:-1], p[1:]), [p[-1]])
        )
        i_left = np.concatenate(([True], upwind_left, [True]))
        div_u = u[1:] - u[:-1]
        diag = (
            self.a_time
            + (c[1:] * pup[1:] + u[1:] * i_left[1:]) / g1
            + (c[:-1] * pup[:-1] - u[:-1] * (~i_left[:-1])) / g1
            + div_u
            + p * (c[1:] + c[:-1])
        )
        sup = ((-c[1:] * pup[1:] + u[1:] * (~i_left[1:])) / g1 - p * c[1:])[:-1]
        sub = ((-c[:-1] * pup[:-1] - u[:-1] * i_left[:-1]) / g1 - p * c[:-1])[1:]
        ab = np.zeros((3, n))
        ab[0, 1:] = sup
        ab[1, :] = diag
        ab[2, :-1] = sub
        return ab


def _newton(problem, p0, rhs_base, dev_ree, tol, budget, scale):
    """Damped semi-smooth Newton with pseudo-transient safeguarding.

    Returns (p, res, used, converged); never raises on stall so callers
    can retry with a continuation ladder.
    """
    p = p0.copy()
    resid, u = problem.residual(p, rhs_base, dev_ree)
    res = float(np.max(np.abs(resid))) / scale
    mu = 0.0
    used = 0
    while used < budget:
        if res <= tol:
            return p, res, used, True
        used += 1
        ab = problem.jacobian(p, u)
        ab[1, :] += mu * problem.a_time
        try:
            delta = solve_banded((1, 1), ab, -resid)
        except Exception:
            return p, res, used, False
        lam = 1.0
        improved = False
        for _ in range(30):
            p_try = p + lam * delta
            if np.all(p_try > 0.0):
                resid_try, u_try = problem.residual(p_try, rhs_base, dev_ree)
                res_try = float(np.max(np.abs(resid_try))) / scale
                if res_try < res:
                    p, resid, u, res = p_try, resid_try, u_try, res_try
                    improved = True
                    break
            lam *= 0.5
        if improved:
            mu = 0.3 * mu if lam == 1.0 else mu
        else:
            mu = 4.0 * mu + 1.0
            if mu > 1e12:
                return p, res, used, False
    return p, res, used, res <= tol


def _newton_with_continuation(pred, state_curr, dt, cfg, grid, source, p0, dev_ree, scale):
    """Solve the pressure problem, walking up from fractional time steps
    when the direct solve stalls (the sub-step solutions trace the
    solution curve and supply good initial iterates)."""
    h = grid.cell_measures()
    rho_e_n = state_curr.rho * state_curr.e

    def attempt(theta, p_init, tol, budget):
        problem = _PressureProblem(pred, state_curr, theta * dt, cfg.gamma, grid)
        rhs = (h / (theta * dt)) * rho_e_n + h * source
        sc = scale / theta
        return _newton(problem, p_init, rhs, dev_ree, tol, budget, sc)

    total = 0
    p, res, used, ok = attempt(1.0, p0, cfg.picard_tol, cfg.picard_max_iter)
    total += used
    if ok:
        return p, res, total
    for ladder in ((0.25, 0.5, 1.0), (1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0),
                   (1 / 256, 1 / 64, 1 / 16, 1 / 4, 1 / 2, 1.0)):
        p_guess = p0.copy()
        ok = True
        for theta in ladder:
            tol = cfg.picard_tol if theta == 1.0 else 1e-6
            p_guess, res, used, ok = attempt(theta, p_guess, tol, cfg.picard_max_iter)
            total += used
            if not ok:
                break
        if ok:
            return p_guess, res, total
    raise StepFailure(
        "pressure correction did not converge",
        diagnostics={"residual": res, "iterations": total, "dt": dt},
    )


def _correction(
    state_curr: State,
    pred: _Prediction,
    dt: float,
    cfg: SchemeConfig,
    grid: Grid,
    source: np.ndarray,
):
    problem = _PressureProblem(pred, state_curr, dt, cfg.gamma, grid)
    rho_e_n = state_curr.rho * state_curr.e
    rhs_base = (grid.cell_measures() / dt) * rho_e_n + grid.cell_measures() * source

    p = state_curr.p.copy()
    rho = state_curr.rho.copy()
    e = state_curr.e.copy()
    scale = float(np.max(np.abs(rhs_base)) + np.max(problem.a_time * p))
    outer_passes = 1 if cfg.reconstruction == "upwind" else 4
    total_newton = 0
    res = np.inf
    dev_rho = np.zeros(grid.n_faces)
    dev_e = np.zeros(grid.n_faces)
    for _ in range(outer_passes):
        u = problem.velocity_of(p)
        rho_up, e_up, dev_rho_int, dev_e_int = _face_values(rho, e, u, cfg.reconstruction)
        dev_rho = np.concatenate(([0.0], dev_rho_int, [0.0]))
        dev_e = np.concatenate(([0.0], dev_e_int, [0.0]))
        # reconstruction deviation of the face internal-energy density
        dev_ree = np.zeros(grid.n_faces)
        dev_ree[1:-1] = (rho_up + dev_rho_int) * (e_up + dev_e_int) - rho_up * e_up

        p, res, used = _newton_with_continuation(
            pred, state_curr, dt, cfg, grid, source, p, dev_ree, scale
        )
        total_newton += used
        u = problem.velocity_of(p)
        # slave updates for the next reconstruction refresh
        rho = _solve_mass(state_curr.rho, u, dev_rho, dt, grid)
        if np.any(rho <= 0.0):
            raise StepFailure("correction mass solve lost positivity")
        e = p / ((cfg.gamma - 1.0) * rho)
        if cfg.reconstruction == "upwind":
            break

    iters = max(total_newton, 1)
    u = problem.velocity_of(p)
    rho_new = rho
    e_new = e
    p_new = eos_pressure(rho_new, e_new, cfg.gamma)
    rho_face = np.concatenate(
        (
            [rho_new[0]],
            upwind_face_value(rho_new[:-1], rho_new[1:], u[1:-1]) + dev_rho[1:-1],
            [rho_new[-1]],
        )
    )
    f_face = rho_face * u
    f_face[0] = 0.0
    f_face[-1] = 0.0
    e_face = np.concatenate(
        (
            [e_new[0]],
            upwind_face_value(e_new[:-1], e_new[1:], u[1:-1]) + dev_e[1:-1],
            [e_new[-1]],
        )
    )
    flux = FluxSet(
        rho_face=rho_face,
        e_face=e_face,
        F_primal=f_face,
        rho_dual=dual_density(rho_new, grid),
        F_dual=0.5 * (f_face[:-1] + f_face[1:]),
    )
    state_next = State(
        rho=rho_new, e=e_new, p=p_new, u=u, time=state_curr.time + dt
    )
    # telescoping pressure-gradient remainder of the velocity update
    dual = grid.dual_measures()
    dp_new = p[1:] - p[:-1]
    r2 = np.sum(
        (0.5 * dt / (pred.m_curr[1:-1] * dual[1:-1])) * dp_new**2
        - (0.5 * dt / (pred.m_prev[1:-1] * dual[1:-1])) * problem.dp_n**2
    )
    return state_next, flux, iters, res, float(r2)


def correction_solve(
    state_curr: State,
    u_tilde: np.ndarray,
    zeta: np.ndarray,
    dt: float,
    cfg: SchemeConfig,
    grid: Grid,
    source: np.ndarray | None = None,
) -> tuple[State, np.ndarray]:
    """Solve the coupled correction block; returns the new state and the
    heat source used.  When no source is given, the prediction time-term
    source is rebuilt from ``zeta`` (which encodes the previous dual
    density)."""
    m_curr = dual_density(state_curr.rho, grid)
    m_prev = m_curr / zeta**2
    # the correction block never touches the prediction fluxes, so zero
    # placeholders are safe for the standalone entry point
    pred = _Prediction(
        u_tilde=u_tilde,
        zeta=zeta,
        f_dual=np.zeros(grid.n_cells),
        m_prev=m_prev,
        m_curr=m_curr,
        v_tilde=np.zeros(grid.n_cells),
    )
    if source is None:
        src = corrective_source_pc(u_tilde, state_curr.u, m_prev, dt, grid)
    else:
        src = source
    if not cfg.source_enabled:
        src = np.zeros(grid.n_cells)
    state_next, _flux, _iters, _res, _r2 = _correction(state_curr, pred, dt, cfg, grid, src)
    return state_next, src


def step_pc(
    state_prev: State,
    state_curr: State,
    dt: float,
    cfg: SchemeConfig,
    grid: Grid,
) -> tuple[State, PcStepRecord]:
    """One pressure-correction step from the two-state history."""
    pred = _predict(state_prev, state_curr, dt, grid)
    if cfg.source_enabled:
        source = corrective_source_pc(
            pred.u_tilde, state_curr.u, pred.m_prev, dt, grid
        ) + _prediction_dissipation_source(pred, dt, grid)
    else:
        source = np.zeros(grid.n_cells)
    state_next, flux, iters, res, r2 = _correction(
        state_curr, pred, dt, cfg, grid, source
    )
    record = PcStepRecord(
        u_tilde=pred.u_tilde,
        zeta=pred.zeta,
        S=source,
        picard_iters=iters,
        picard_residual=res,
        flux=flux,
        r2_increment=r2,
    )
    return state_next, record
