"""Discrete norms, remainder accumulators and theorem-bound audits.

Everything a run needs to certify the entropy theory numerically: BV
semi-norms in time and space, a computable surrogate of the negative-order
dual norm (pairing against a fixed family of smooth bumps, which lower
bounds the true supremum), per-step remainder fields of the renormalized
mass/energy balances, and the evaluation of the right-hand sides of the
remainder bounds so measured/bound ratios can be asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .entropy import (
    EntropyWeights,
    entropy_cfl_dt,
    entropy_residual_field,
    eta,
    global_entropy,
    mean_value_point,
    xkl_phi_e,
    xkl_phi_rho,
)
from .flux import dual_density
from .grid import Grid, MeshMetrics, mesh_metrics
from .state import State, totals


# ---------------------------------------------------------------------------
# smooth test functions for the dual-norm surrogate
# ---------------------------------------------------------------------------

def _bump(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


# max |d/ds exp(1 - 1/(1-s^2))|, evaluated once on a fine grid
_S = np.linspace(-0.999999, 0.999999, 400001)
_BUMP_SLOPE_MAX = float(np.max(np.abs(np.gradient(_bump(_S), _S))))


@dataclass(frozen=True)
class TestFunctionFamily:
    """Products of compactly supported bumps in space and time."""

    x_profiles: np.ndarray = field(repr=False)   # (n_psi, n_cells)
    grad_inf: np.ndarray = field(repr=False)     # (n_psi,)
    t_centers: np.ndarray = field(repr=False)
    t_widths: np.ndarray = field(repr=False)

    @property
    def n_psi(self) -> int:
        return self.x_profiles.shape[0]

    def time_factor(self, t: float) -> np.ndarray:
        return _bump((t - self.t_centers) / self.t_widths)


def build_test_functions(grid: Grid, t_total: float, n_per_axis: int = 4) -> TestFunctionFamily:
    length = grid.domain_right - grid.domain_left
    t_total = max(t_total, 1e-300)
    x_centers = grid.domain_left + (np.arange(n_per_axis) + 1.0) / (n_per_axis + 1.0) * length
    wx = 0.98 * length / (n_per_axis + 1.0)
    t_centers = (np.arange(n_per_axis) + 1.0) / (n_per_axis + 1.0) * t_total
    wt = 0.98 * t_total / (n_per_axis + 1.0)
    profiles = []
    grads = []
    tc_rep = []
    wt_rep = []
    for xc in x_centers:
        px = _bump((grid.cell_centers - xc) / wx)
        for tc in t_centers:
            profiles.append(px)
            grads.append(_BUMP_SLOPE_MAX / wx)
            tc_rep.append(tc)
            wt_rep.append(wt)
    return TestFunctionFamily(
        x_profiles=np.array(profiles),
        grad_inf=np.array(grads),
        t_centers=np.array(tc_rep),
        t_widths=np.array(wt_rep),
    )


def discrete_norms(levels: np.ndarray, grid: Grid, dt: float) -> tuple[float, float, float]:
    """BV-in-time, BV-in-space and dual-norm surrogate of a cell field.

    ``levels`` has one row per time level.  The surrogate pairs the field
    against the bump family and takes the largest pairing per unit of the
    test function's space-gradient bound; it lower bounds the true dual
    norm.
    """
    levels = np.atleast_2d(np.asarray(levels, dtype=float))
    cell = grid.cell_measures()
    bv_time = float(np.sum(cell * np.sum(np.abs(np.diff(levels, axis=0)), axis=0)))
    bv_space = float(dt * np.sum(np.abs(np.diff(levels, axis=1))))
    n_levels = levels.shape[0]
    family = build_test_functions(grid, dt * n_levels)
    pair = np.zeros(family.n_psi)
    for n in range(n_levels):
        tf = family.time_factor(n * dt)
        pair += dt * tf * (family.x_profiles @ (cell * levels[n]))
    surrogate = float(np.max(np.abs(pair) / family.grad_inf)) if family.n_psi else 0.0
    return bv_time, bv_space, surrogate


# ---------------------------------------------------------------------------
# streaming accumulation over a run
# ---------------------------------------------------------------------------

@dataclass
class DiagnosticsReport:
    """Everything measured over a run that the audits and tests consume."""

    times: np.ndarray
    total_mass: np.ndarray
    total_energy: np.ndarray
    global_entropy: np.ndarray
    max_entropy_residual: np.ndarray      # scaled by (|K|/dt) max|eta|
    cfl_entropy_dt: np.ndarray
    picard_iters: np.ndarray
    bv_time: dict
    bv_space: dict
    velocity_norm_q: float                # ||u||_{L^q(W^{1,q})}
    velocity_norm_qp: float
    q: float
    dual_norm_surrogate: float
    surrogates: dict
    l1_remainders: dict
    theorem_bounds: dict
    m_bound: float
    dt_max: float
    max_mass_drift: float
    max_energy_drift: float
    budget_drift: float
    r2_accumulated: float
    stabilization_energy: float
    entropy_residual_records: np.ndarray | None
    record_times: np.ndarray | None
    field_records: list


class RunAccumulator:
    """Accumulates diagnostics step by step with O(n) work per step."""

    def __init__(
        self,
        grid: Grid,
        weights: EntropyWeights,
        t_total: float,
        scheme: str,
        q: float = 2.0,
        record_every: int = 0,
        track_residuals: bool = True,
    ):
        self.grid = grid
        self.weights = weights
        self.scheme = scheme
        self.q = q
        self.qp = q / (q - 1.0) if q > 1.0 else np.inf
        self.record_every = record_every
        self.track_residuals = track_residuals
        self.family = build_test_functions(grid, max(t_total, 1e-300))
        n_psi = self.family.n_psi
        self.pair_drm = np.zeros(n_psi)
        self.pair_dre = np.zeros(n_psi)
        self.bvt = {"rho": 0.0, "e": 0.0}
        self.bvx = {"rho": 0.0, "e": 0.0}
        self.unorm_q = 0.0
        self.unorm_qp = 0.0
        self.l1_reta2_rho = 0.0
        self.l1_reta2_e = 0.0
        self.l1_r01 = 0.0
        self.m_bound = 1.0
        self.dt_max = 0.0
        self.times = []
        self.mass = []
        self.energy = []
        self.entropy = []
        self.residual_series = []
        self.cfl_series = []
        self.picard_series = []
        self.max_mass_drift = 0.0
        self.max_energy_drift = 0.0
        self.r2_acc = 0.0
        self.stab_energy = 0.0
        self.residual_records = []
        self.record_times = []
        self.field_records = []
        self._first = True
        self._budget0 = None
        self.budget_drift = 0.0
        self._steps = 0

    # -- helpers -----------------------------------------------------------

    def _track_extrema(self, state: State):
        self.m_bound = max(
            self.m_bound,
            float(np.max(state.rho)),
            float(1.0 / np.min(state.rho)),
            float(np.max(state.e)),
            float(1.0 / np.min(state.e)),
            float(np.max(np.abs(state.u))),
        )

    def _level_sums(self, state: State, dt: float):
        cell = self.grid.cell_measures()
        h = self.grid.cell_width
        self.bvx["rho"] += dt * float(np.sum(np.abs(np.diff(state.rho))))
        self.bvx["e"] += dt * float(np.sum(np.abs(np.diff(state.e))))
        du = np.abs(state.u[1:] - state.u[:-1]) / h
        self.unorm_q += dt * float(np.sum(2.0 * cell * du**self.q))
        if np.isfinite(self.qp):
            self.unorm_qp += dt * float(np.sum(2.0 * cell * du**self.qp))

    def _snapshot(self, state: State):
        mass, energy = totals(state, self.grid)
        self.times.append(state.time)
        self.mass.append(mass)
        self.energy.append(energy)
        self.entropy.append(global_entropy(state, self.weights, self.grid))

    def _delta_phi_faces(self, rho, e, rho_face, e_face):
        w = self.weights
        rk, rl = rho[:-1], rho[1:]
        ek, el = e[:-1], e[1:]
        rkl = xkl_phi_rho(rk, rl)
        ekl = xkl_phi_e(ek, el)
        rs = rho_face[1:-1]
        es = e_face[1:-1]
        dphi_r = (
            w.phi_rho(rk)
            - w.phi_rho(rs)
            + w.phi_rho_prime(rk) * (rkl - rk)
            + 0.5 * (w.phi_rho_prime(rk) + w.phi_rho_prime(rl)) * (rs - rkl)
        )
        dphi_e = (
            w.phi_e(ek)
            - w.phi_e(es)
            + w.phi_e_prime(ek) * (ekl - ek)
            + 0.5 * (w.phi_e_prime(ek) + w.phi_e_prime(el)) * (es - ekl)
        )
        return dphi_r, dphi_e

    # -- main hooks ---------------------------------------------------------

    def start(self, state: State):
        self._track_extrema(state)
        self._snapshot(state)

    def pc_budget(self, state_prev: State, state_curr: State) -> float:
        """Internal energy plus the scheme's lagged dual kinetic energy."""
        cell = self.grid.cell_measures()
        m_lag = dual_density(state_prev.rho, self.grid)
        ke = float(np.sum(0.5 * self.grid.dual_measures() * m_lag * state_curr.u**2))
        return float(np.sum(cell * state_curr.rho * state_curr.e)) + ke

    def after_step(self, state_old: State, state_new: State, flux, dt: float, record, state_prev=None):
        grid = self.grid
        w = self.weights
        cell = grid.cell_measures()
        self.dt_max = max(self.dt_max, dt)
        self._steps += 1
        if self._first:
            self._level_sums(state_old, dt)
        self._level_sums(state_new, dt)
        self._track_extrema(state_new)

        self.bvt["rho"] += float(np.sum(cell * np.abs(state_new.rho - state_old.rho)))
        self.bvt["e"] += float(np.sum(cell * np.abs(state_new.e - state_old.e)))

        # conservation bookkeeping
        mass_old, energy_old = self.mass[-1], self.energy[-1]
        self._snapshot(state_new)
        self.max_mass_drift = max(
            self.max_mass_drift, abs(self.mass[-1] - mass_old) / abs(mass_old)
        )
        if self.scheme == "explicit":
            stab = getattr(record, "stabilization_energy", 0.0)
            self.stab_energy += stab
            drift = abs(self.energy[-1] - energy_old - stab) / abs(energy_old)
            self.max_energy_drift = max(self.max_energy_drift, drift)
        else:
            self.r2_acc += dt * getattr(record, "r2_increment", 0.0)
            if state_prev is not None:
                if self._budget0 is None:
                    self._budget0 = self.pc_budget(state_prev, state_old)
                budget = self.pc_budget(state_old, state_new) + self.r2_acc
                self.budget_drift = max(
                    self.budget_drift, abs(budget - self._budget0) / abs(self._budget0)
                )

        # entropy residual of the step (scheme-matched time level)
        if self.track_residuals:
            level = "implicit" if self.scheme == "pressure_correction" else "explicit"
            res = entropy_residual_field(state_old, state_new, flux, dt, w, level, grid)
            eta_max = max(
                float(np.max(np.abs(eta(state_old.rho, state_old.e, w)))),
                float(np.max(np.abs(eta(state_new.rho, state_new.e, w)))),
            )
            scale = (grid.cell_width / dt) * max(eta_max, 1e-300)
            self.residual_series.append(float(np.max(res)) / scale)
            self.cfl_series.append(entropy_cfl_dt(state_old, flux, state_new, w, grid))
            if self.record_every and (self._steps % self.record_every == 0):
                self.residual_records.append(res)
                self.record_times.append(state_new.time)
        self.picard_series.append(float(getattr(record, "picard_iters", 0)))

        # remainder fields of the renormalized balances
        if self.scheme == "pressure_correction":
            rho, e, u = state_new.rho, state_new.e, state_new.u
            f_primal = flux.F_primal
            dphi_r, dphi_e = self._delta_phi_faces(rho, e, flux.rho_face, flux.e_face)
        else:
            rho, e, u = state_old.rho, state_old.e, state_old.u
            f_primal = flux.F_primal
            dphi_r, dphi_e = self._delta_phi_faces(rho, e, flux.rho_face, flux.e_face)
        dphi_r_full = np.concatenate(([0.0], dphi_r, [0.0]))
        dphi_e_full = np.concatenate(([0.0], dphi_e, [0.0]))
        drm = (dphi_r_full[1:] * u[1:] - dphi_r_full[:-1] * u[:-1]) / cell
        dre = (dphi_e_full[1:] * f_primal[1:] - dphi_e_full[:-1] * f_primal[:-1]) / cell
        tf = self.family.time_factor(state_new.time)
        self.pair_drm += dt * tf * (self.family.x_profiles @ (cell * drm))
        self.pair_dre += dt * tf * (self.family.x_profiles @ (cell * dre))

        if self.scheme == "explicit":
            # time-difference remainders of the explicit renormalization
            sum_f = f_primal[1:] - f_primal[:-1]
            r2_rho = (w.phi_rho_prime(state_new.rho) - w.phi_rho_prime(state_old.rho)) * sum_f / cell
            e_face = flux.e_face
            conv_e = f_primal[1:] * (e_face[1:] - state_old.e) - f_primal[:-1] * (
                e_face[:-1] - state_old.e
            )
            r2_e = (w.phi_e_prime(state_new.e) - w.phi_e_prime(state_old.e)) * conv_e / cell
            self.l1_reta2_rho += dt * float(np.sum(cell * np.abs(r2_rho)))
            self.l1_reta2_e += dt * float(np.sum(cell * np.abs(r2_e)))
            div_u = state_old.u[1:] - state_old.u[:-1]
            rho_tilde = mean_value_point("phi_rho", state_old.rho, state_new.rho, w)
            r01 = (
                w.phi_rho_pp(rho_tilde)
                * (state_new.rho - state_old.rho)
                * state_old.rho
                * div_u
                / cell
            )
            self.l1_r01 += dt * float(np.sum(cell * np.abs(r01)))
        self._first = False

    def record_fields(self, state: State, flux=None):
        self.field_records.append(state)

    def finalize(self, metrics: MeshMetrics | None = None) -> DiagnosticsReport:
        if metrics is None:
            metrics = mesh_metrics(self.grid)
        surr_drm = float(np.max(np.abs(self.pair_drm) / self.family.grad_inf))
        surr_dre = float(np.max(np.abs(self.pair_dre) / self.family.grad_inf))
        surr_sum = float(
            np.max(np.abs(self.pair_drm + self.pair_dre) / self.family.grad_inf)
        )
        surrogates = {
            "renorm_mass": surr_drm,
            "renorm_energy": surr_dre,
            "renorm_total": surr_sum,
        }
        l1 = {
            "time_shift_rho": self.l1_reta2_rho,
            "time_shift_e": self.l1_reta2_e,
            "upwind_r01": self.l1_r01,
        }
        report = DiagnosticsReport(
            times=np.array(self.times),
            total_mass=np.array(self.mass),
            total_energy=np.array(self.energy),
            global_entropy=np.array(self.entropy),
            max_entropy_residual=np.array(self.residual_series),
            cfl_entropy_dt=np.array(self.cfl_series),
            picard_iters=np.array(self.picard_series),
            bv_time=dict(self.bvt),
            bv_space=dict(self.bvx),
            velocity_norm_q=self.unorm_q ** (1.0 / self.q) if self.unorm_q > 0 else 0.0,
            velocity_norm_qp=(
                self.unorm_qp ** (1.0 / self.qp)
                if np.isfinite(self.qp) and self.unorm_qp > 0
                else 0.0
            ),
            q=self.q,
            dual_norm_surrogate=surr_sum,
            surrogates=surrogates,
            l1_remainders=l1,
            theorem_bounds={},
            m_bound=self.m_bound,
            dt_max=self.dt_max,
            max_mass_drift=self.max_mass_drift,
            max_energy_drift=self.max_energy_drift,
            budget_drift=self.budget_drift,
            r2_accumulated=self.r2_acc,
            stabilization_energy=self.stab_energy,
            entropy_residual_records=(
                np.array(self.residual_records) if self.residual_records else None
            ),
            record_times=np.array(self.record_times) if self.record_times else None,
            field_records=self.field_records,
        )
        report.theorem_bounds.update(
            theorem_bound_audit(report, self.weights, metrics, self.m_bound)
        )
        return report


def theorem_bound_audit(
    report: DiagnosticsReport,
    weights: EntropyWeights,
    metrics: MeshMetrics,
    m_bound: float,
) -> dict:
    """Evaluate the remainder bounds and the measured/bound ratios.

    The implicit (MUSCL-admissible) remainder is audited in the dual-norm
    surrogate against the h-proportional bound; the explicit remainders in
    L1 against the dt/h bound and, for the upwind variant, against the
    mixed bound involving the discrete velocity gradient norm (reported
    with both exponent placements).
    """
    m = max(float(m_bound), 1.0)
    w = weights
    phr_inf = max(abs(w.phi_rho_prime(1.0 / m)), abs(w.phi_rho_prime(m)))
    phe_inf = max(abs(w.phi_e_prime(1.0 / m)), abs(w.phi_e_prime(m)))
    ppr_inf = float(w.phi_rho_pp(1.0 / m))
    ppe_inf = float(w.phi_e_pp(1.0 / m))
    bvx_rho = report.bv_space["rho"]
    bvx_e = report.bv_space["e"]
    bvt_rho = report.bv_time["rho"]
    bvt_e = report.bv_time["e"]
    dt = report.dt_max
    q = report.q
    qp = q / (q - 1.0) if q > 1.0 else np.inf

    out = {}
    out["renorm_mass_measured"] = report.surrogates["renorm_mass"]
    out["renorm_mass_bound"] = 3.0 * m * phr_inf * bvx_rho * metrics.h_m
    out["renorm_energy_measured"] = report.surrogates["renorm_energy"]
    out["renorm_energy_bound"] = 3.0 * m * m * phe_inf * bvx_e * metrics.h_m
    out["renorm_total_measured"] = report.surrogates["renorm_total"]
    out["renorm_total_bound"] = (
        3.0 * m * (phr_inf * bvx_rho + m * phe_inf * bvx_e) * metrics.h_m
    )
    out["time_shift_measured"] = (
        report.l1_remainders["time_shift_rho"] + report.l1_remainders["time_shift_e"]
    )
    out["time_shift_bound"] = (
        m * m * (ppr_inf * bvt_rho + ppe_inf * bvt_e) * dt / metrics.h_underline_m
    )
    out["upwind_r01_measured"] = report.l1_remainders["upwind_r01"]
    out["upwind_r01_bound_q"] = (
        metrics.f_m
        * metrics.c_m
        * m ** ((2.0 * q - 1.0) / q)
        * ppr_inf
        * bvt_rho ** (1.0 / q)
        * report.velocity_norm_qp
        * dt ** (1.0 / q)
    )
    if np.isfinite(qp):
        out["upwind_r01_bound_qp"] = (
            metrics.f_m
            * metrics.c_m
            * m ** ((2.0 * qp - 1.0) / qp)
            * ppr_inf
            * bvt_rho ** (1.0 / qp)
            * report.velocity_norm_q
            * dt ** (1.0 / qp)
        )
    for name in ("renorm_mass", "renorm_energy", "renorm_total"):
        b = out[f"{name}_bound"]
        out[f"{name}_ratio"] = out[f"{name}_measured"] / b if b > 0 else 0.0
    b = out["time_shift_bound"]
    out["time_shift_ratio"] = out["time_shift_measured"] / b if b > 0 else 0.0
    b = out["upwind_r01_bound_q"]
    out["upwind_r01_ratio"] = out["upwind_r01_measured"] / b if b > 0 else 0.0
    return out
