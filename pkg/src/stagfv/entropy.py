"""Entropy pair, admissibility intervals, residual fields and entropy CFL.

The entropy is built from two strictly convex weight functions of density
and specific internal energy,

    phi_rho(z) = z ln z,          phi_e(z) = -ln(z) / (gamma - 1),

combined as eta(rho, e) = phi_rho(rho) + rho * phi_e(e).  For a pair of
cell values, the point where the two tangent lines of a convex weight
agree ("tangent point" below) bounds the face reconstructions that keep
the schemes entropy-admissible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .grid import Grid


@dataclass(frozen=True)
class EntropyWeights:
    """Convex weights of the entropy pair for a fixed gamma > 1."""

    gamma: float

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")

    # density weight z ln z
    def phi_rho(self, z):
        return z * np.log(z)

    def phi_rho_prime(self, z):
        return np.log(z) + 1.0

    def phi_rho_pp(self, z):
        return 1.0 / z

    # energy weight -ln(z)/(gamma-1)
    def phi_e(self, z):
        return -np.log(z) / (self.gamma - 1.0)

    def phi_e_prime(self, z):
        return -1.0 / ((self.gamma - 1.0) * z)

    def phi_e_pp(self, z):
        return 1.0 / ((self.gamma - 1.0) * z * z)

    def phi(self, name: str):
        """(phi, phi', phi'') triple for a weight name."""
        if name == "phi_rho":
            return self.phi_rho, self.phi_rho_prime, self.phi_rho_pp
        if name == "phi_e":
            return self.phi_e, self.phi_e_prime, self.phi_e_pp
        if name == "square":
            return (
                lambda z: np.asarray(z) ** 2,
                lambda z: 2.0 * np.asarray(z),
                lambda z: 2.0 * np.ones_like(np.asarray(z, dtype=float)),
            )
        raise DomainError(f"unknown weight function {name!r}")


def eta(rho, e, weights: EntropyWeights):
    """Entropy density rho ln rho - rho ln(e)/(gamma-1)."""
    rho = np.asarray(rho)
    e = np.asarray(e)
    if np.any(rho <= 0.0) or np.any(e <= 0.0):
        raise DomainError("entropy needs positive density and internal energy")
    return weights.phi_rho(rho) + rho * weights.phi_e(e)


def entropy_compatibility_residual(rho, e, weights: EntropyWeights):
    """Residual of rho phi_rho'(rho) - phi_rho(rho) + phi_e'(e) p.

    Vanishes identically for the ideal-gas pressure; returned so tests can
    confirm the weights match the EOS.
    """
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    p = (weights.gamma - 1.0) * rho * e
    return rho * weights.phi_rho_prime(rho) - weights.phi_rho(rho) + weights.phi_e_prime(e) * p


# ---------------------------------------------------------------------------
# tangent point x_KL of a convex weight over a pair of values
# ---------------------------------------------------------------------------

def x_kl(phi, x_k: float, x_l: float, weights: EntropyWeights | None = None) -> float:
    """Unique point in [[x_k, x_l]] where the two tangents of phi agree.

    ``phi`` names a weight ("phi_rho", "phi_e", "square").  Solved by
    bisection on the tangent gap to a 1e-13 absolute/relative hybrid
    tolerance; the closed forms (logarithmic mean and friends) are kept as
    cross-checks in the test suite.
    """
    if weights is None:
        weights = EntropyWeights(gamma=1.4)
    f, fp, _ = weights.phi(phi)
    if x_k == x_l:
        return float(x_k)
    if phi in ("phi_rho", "phi_e") and (x_k <= 0.0 or x_l <= 0.0):
        raise DomainError("weight functions are defined for positive arguments only")

    def gap(x):
        return (f(x_k) + fp(x_k) * (x - x_k)) - (f(x_l) + fp(x_l) * (x - x_l))

    lo, hi = (x_k, x_l) if x_k < x_l else (x_l, x_k)
    glo, ghi = gap(lo), gap(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if glo * ghi > 0.0:
        raise NumericalError("tangent gap does not change sign; phi not strictly convex?")
    tol = 1e-13 * max(1.0, abs(x_k), abs(x_l))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gmid = gap(mid)
        if gmid == 0.0:
            return float(mid)
        if gmid * glo > 0.0:
            lo, glo = mid, gmid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def xkl_phi_rho(a, b):
    """Closed form of the phi_rho tangent point: the logarithmic mean."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = np.isclose(a, b, rtol=1e-14, atol=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(same, a, (a - b) / np.log(np.where(same, 2.0, a / b)))
    # the log mean lies in the hull; guard rounding at near-equal arguments
    return np.clip(out, np.minimum(a, b), np.maximum(a, b))


def xkl_phi_e(a, b):
    """Closed form of the phi_e tangent point: a b ln(a/b) / (a - b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = np.isclose(a, b, rtol=1e-14, atol=0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(same, a, a * b * np.log(np.where(same, 2.0, a / b)) / (a - b))
    return np.clip(out, np.minimum(a, b), np.maximum(a, b))


def xkl_square(a, b):
    """Tangent point of z^2: the arithmetic mean."""
    return 0.5 * (np.asarray(a, dtype=float) + np.asarray(b, dtype=float))


def admissible_interval(z_k: float, z_l: float, z_kl: float, upwind_is_k: bool):
    """Closed interval between the upwind value and the tangent point."""
    lo_h, hi_h = min(z_k, z_l), max(z_k, z_l)
    if not (lo_h - 1e-12 * max(1.0, hi_h) <= z_kl <= hi_h + 1e-12 * max(1.0, hi_h)):
        raise NumericalError(
            f"tangent point {z_kl} outside the hull [{lo_h}, {hi_h}]"
        )
    upw = z_k if upwind_is_k else z_l
    return (min(upw, z_kl), max(upw, z_kl))


# ---------------------------------------------------------------------------
# intermediate points of the entropy CFL conditions
# ---------------------------------------------------------------------------

def mean_value_point(phi: str, a, b, weights: EntropyWeights):
    """Point xi in [[a, b]] with phi''(xi) (b - a) = phi'(b) - phi'(a).

    Closed forms: logarithmic mean for phi_rho, geometric mean for phi_e.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if phi == "phi_rho":
        return xkl_phi_rho(a, b)
    if phi == "phi_e":
        return np.sqrt(a * b)
    if phi == "square":
        return 0.5 * (a + b)
    raise DomainError(f"unknown weight function {phi!r}")


def taylor_second_point(phi: str, a, b, weights: EntropyWeights):
    """Point xi in [[a, b]] with phi(b) = phi(a) + phi'(a)(b-a) + phi''(xi)(b-a)^2/2.

    Inverted in closed form since phi'' is a monomial for both weights.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    f, fp, _ = weights.phi(phi)
    d = b - a
    rem = f(b) - f(a) - fp(a) * d
    # rem > 0 strictly for a != b by convexity; rounding can produce tiny
    # non-positive values at near-equal arguments, where any hull point works
    degenerate = rem <= 0.0
    safe_rem = np.where(degenerate, 1.0, rem)
    if phi == "phi_rho":
        # phi'' = 1/xi
        out = np.where(degenerate, 0.5 * (a + b), 0.5 * d * d / safe_rem)
    elif phi == "phi_e":
        # phi'' = 1/((gamma-1) xi^2)
        g1 = weights.gamma - 1.0
        out = np.where(degenerate, 0.5 * (a + b), np.sqrt(0.5 * d * d / (g1 * safe_rem)))
    elif phi == "square":
        out = 0.5 * (a + b)
    else:
        raise DomainError(f"unknown weight function {phi!r}")
    return np.clip(out, np.minimum(a, b), np.maximum(a, b))


def entropy_cfl_dt(state, flux, state_next, weights: EntropyWeights, grid: Grid) -> float:
    """Largest time step satisfying both entropy CFL conditions.

    The density condition limits dt by the incoming volumetric fluxes, the
    energy condition by the incoming mass fluxes; both involve weight
    curvatures at intermediate points between consecutive cell and neighbor
    values.  Returns +inf when no face of any cell has an incoming part.
    """
    rho0, rho1 = state.rho, state_next.rho
    e0, e1 = state.e, state_next.e
    u = state.u
    big = np.inf
    cell = grid.cell_measures()

    # density condition
    pp_time_rho = weights.phi_rho_pp(mean_value_point("phi_rho", rho0, rho1, weights))
    # neighbor pairs at time n; pad with the cell itself at the boundary
    rho_left = np.concatenate(([rho0[0]], rho0[:-1]))
    rho_right = np.concatenate((rho0[1:], [rho0[-1]]))
    pp_face_l = weights.phi_rho_pp(taylor_second_point("phi_rho", rho0, rho_left, weights))
    pp_face_r = weights.phi_rho_pp(taylor_second_point("phi_rho", rho0, rho_right, weights))
    u_in_left = np.maximum(u[:-1], 0.0)      # (u_{K,sigma})^- on the left face
    u_in_right = np.maximum(-u[1:], 0.0)     # on the right face
    denom_rho = (pp_time_rho**2 / pp_face_l) * u_in_left + (
        pp_time_rho**2 / pp_face_r
    ) * u_in_right
    dt_rho = np.full_like(denom_rho, big)
    # an overflowing quotient simply means the condition does not bind
    with np.errstate(over="ignore"):
        np.divide(cell, denom_rho, out=dt_rho, where=denom_rho > 0.0)

    # energy condition
    f_primal = flux.F_primal
    f_in_left = np.maximum(f_primal[:-1], 0.0)    # (F_{K,sigma})^- on the left face
    f_in_right = np.maximum(-f_primal[1:], 0.0)
    pp_taylor_e = weights.phi_e_pp(taylor_second_point("phi_e", e1, e0, weights))
    pp_time_e = weights.phi_e_pp(mean_value_point("phi_e", e0, e1, weights))
    e_left = np.concatenate(([e0[0]], e0[:-1]))
    e_right = np.concatenate((e0[1:], [e0[-1]]))
    pp_eface_l = weights.phi_e_pp(taylor_second_point("phi_e", e0, e_left, weights))
    pp_eface_r = weights.phi_e_pp(taylor_second_point("phi_e", e0, e_right, weights))
    denom_e = (pp_time_e**2 / pp_eface_l) * f_in_left + (
        pp_time_e**2 / pp_eface_r
    ) * f_in_right
    numer_e = pp_taylor_e * cell * rho1
    dt_e = np.full_like(denom_e, big)
    with np.errstate(over="ignore"):
        np.divide(numer_e, denom_e, out=dt_e, where=denom_e > 0.0)

    return float(min(np.min(dt_rho), np.min(dt_e)))


# ---------------------------------------------------------------------------
# per-cell entropy residual of a completed step
# ---------------------------------------------------------------------------

def entropy_residual_field(
    state_old,
    state_new,
    flux,
    dt: float,
    weights: EntropyWeights,
    time_level: str,
    grid: Grid,
) -> np.ndarray:
    """Left side of the discrete per-cell entropy balance.

    ``time_level`` selects which face values and velocities enter the
    divergence: "implicit" pairs the new-time reconstruction with the
    new-time velocity, "explicit" the old-time reconstruction with the
    old-time velocity.  Non-positive values certify entropy compliance.
    """
    if time_level not in ("implicit", "explicit"):
        raise DomainError(f"time_level must be implicit or explicit, got {time_level!r}")
    u = state_new.u if time_level == "implicit" else state_old.u
    eta_old = eta(state_old.rho, state_old.e, weights)
    eta_new = eta(state_new.rho, state_new.e, weights)
    eta_face = eta(flux.rho_face, flux.e_face, weights)
    cell = grid.cell_measures()
    # outward-signed divergence of the face entropy flux per cell
    flux_eta = eta_face * u
    div = flux_eta[1:] - flux_eta[:-1]
    return (cell / dt) * (eta_new - eta_old) + div


def global_entropy(state, weights: EntropyWeights, grid: Grid) -> float:
    """Domain integral of the entropy density."""
    return float(np.sum(grid.cell_measures() * eta(state.rho, state.e, weights)))
