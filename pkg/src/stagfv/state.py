"""Discrete unknowns at one time level, ideal-gas closure, global totals."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError
from .grid import Grid


def eos_pressure(rho, e, gamma):
    """Ideal-gas pressure (gamma - 1) * rho * e.

    Accepts scalars or arrays; rejects non-positive density or energy and
    gamma <= 1.
    """
    if gamma <= 1.0:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    if np.any(np.asarray(rho) <= 0.0):
        raise DomainError("density must be positive")
    if np.any(np.asarray(e) < 0.0):
        raise DomainError("internal energy must be non-negative")
    return (gamma - 1.0) * np.asarray(rho) * np.asarray(e)


def eos_energy_from_pressure(rho, p, gamma):
    """Invert the ideal-gas law for the specific internal energy."""
    if gamma <= 1.0:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    if np.any(np.asarray(rho) <= 0.0):
        raise DomainError("density must be positive")
    if np.any(np.asarray(p) < 0.0):
        raise DomainError("pressure must be non-negative")
    return np.asarray(p) / ((gamma - 1.0) * np.asarray(rho))


def sound_speed(rho, p, gamma):
    """Ideal-gas speed of sound sqrt(gamma p / rho)."""
    return np.sqrt(gamma * np.asarray(p) / np.asarray(rho))


def _read_only(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class State:
    """Cell-centred rho, e, p and face-centred normal velocity at one time.

    The rightward component is stored per face; the outward normal value for
    a cell is +u on its right face and -u on its left face.  Boundary faces
    carry zero velocity (wall condition).  Snapshots are immutable.
    """

    rho: np.ndarray
    e: np.ndarray
    p: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rho", _read_only(self.rho))
        object.__setattr__(self, "e", _read_only(self.e))
        object.__setattr__(self, "p", _read_only(self.p))
        object.__setattr__(self, "u", _read_only(self.u))
        if self.u.shape[0] != self.rho.shape[0] + 1:
            raise ConfigurationError(
                f"velocity array must have n_cells+1 entries, got {self.u.shape[0]}"
            )
        if np.any(self.rho <= 0.0):
            raise DomainError("state has non-positive density")
        if np.any(self.e <= 0.0):
            raise DomainError("state has non-positive internal energy")
        if self.u[0] != 0.0 or self.u[-1] != 0.0:
            raise DomainError("boundary faces must carry zero velocity")

    @property
    def n_cells(self) -> int:
        return self.rho.shape[0]

    def closed(self, gamma: float) -> "State":
        """Return a copy with the pressure recomputed from the EOS."""
        return replace(self, p=eos_pressure(self.rho, self.e, gamma))


@dataclass(frozen=True)
class Stabilization:
    """Nonlinear velocity-diffusion stabilization exponents."""

    q: float = 3.0
    alpha: float = 1.5

    def __post_init__(self):
        if self.q < 2.0:
            raise ConfigurationError(f"stabilization exponent q must be >= 2, got {self.q}")
        if self.alpha <= 0.0:
            raise ConfigurationError(f"stabilization exponent alpha must be > 0, got {self.alpha}")
        if not self.alpha < self.q - 1.0:
            raise ConfigurationError(
                f"stabilization requires alpha < q - 1, got alpha={self.alpha}, q={self.q}"
            )


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme selection and numerical parameters for a run."""

    gamma: float = 1.4
    scheme: str = "pressure_correction"
    reconstruction: str = "upwind"
    cfl_fraction: float = 0.5
    end_time: float = 0.0
    stabilization: Stabilization | None = None
    picard_tol: float = 1e-10
    picard_max_iter: int = 100
    source_enabled: bool = True

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ConfigurationError(f"gamma must exceed 1, got {self.gamma}")
        if self.scheme not in ("pressure_correction", "explicit"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.reconstruction not in ("upwind", "muscl"):
            raise ConfigurationError(f"unknown reconstruction {self.reconstruction!r}")
        if not (0.0 < self.cfl_fraction <= 1.0):
            raise ConfigurationError(
                f"cfl_fraction must lie in (0, 1], got {self.cfl_fraction}"
            )
        if self.end_time < 0.0:
            raise ConfigurationError("end_time must be non-negative")
        if self.picard_tol <= 0.0 or self.picard_max_iter < 1:
            raise ConfigurationError("invalid Picard parameters")


def init_riemann(grid: Grid, left, right, x0: float, gamma: float) -> State:
    """Piecewise-constant two-state initial condition.

    ``left`` and ``right`` are (rho, u, p) triples.  Cells centred left of
    ``x0`` take the left values; faces take the value of the side their
    position falls in, a face exactly at ``x0`` averages the two sides.
    Boundary velocities are zeroed and the pressure is re-closed through
    the EOS.
    """
    rho_l, u_l, p_l = (float(v) for v in left)
    rho_r, u_r, p_r = (float(v) for v in right)
    if rho_l <= 0.0 or rho_r <= 0.0 or p_l <= 0.0 or p_r <= 0.0:
        raise DomainError("Riemann states need positive density and pressure")
    if not (grid.domain_left < x0 < grid.domain_right):
        raise ConfigurationError(
            f"initial discontinuity {x0} outside domain "
            f"({grid.domain_left}, {grid.domain_right})"
        )
    on_left = grid.cell_centers < x0
    rho = np.where(on_left, rho_l, rho_r)
    p = np.where(on_left, p_l, p_r)
    e = eos_energy_from_pressure(rho, p, gamma)

    u = np.where(grid.face_positions < x0, u_l, u_r)
    at_jump = np.isclose(grid.face_positions, x0, rtol=0.0, atol=1e-14)
    u[at_jump] = 0.5 * (u_l + u_r)
    u[0] = 0.0
    u[-1] = 0.0
    return State(rho=rho, e=e, p=eos_pressure(rho, e, gamma), u=u, time=0.0)


def totals(state: State, grid: Grid) -> tuple[float, float]:
    """Total mass and total (internal + dual kinetic) energy.

    The kinetic part lives on the dual cells, weighted by the dual density;
    boundary faces contribute nothing because their velocity vanishes.
    """
    from .flux import dual_density

    cell = grid.cell_measures()
    mass = float(np.sum(cell * state.rho))
    internal = float(np.sum(cell * state.rho * state.e))
    rho_dual = dual_density(state.rho, grid)
    kinetic = float(np.sum(0.5 * grid.dual_measures() * rho_dual * state.u**2))
    return mass, internal + kinetic
