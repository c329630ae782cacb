import numpy as np
import pytest

from stagfv import (
    DomainError,
    EntropyWeights,
    admissible_interval,
    entropy_compatibility_residual,
    eta,
    x_kl,
)
from stagfv.entropy import (
    mean_value_point,
    taylor_second_point,
    xkl_phi_e,
    xkl_phi_rho,
    xkl_square,
)

W = EntropyWeights(gamma=1.4)


def test_eta_values():
    assert eta(1.0, 1.0, W) == pytest.approx(0.0, abs=1e-15)
    assert eta(np.e, 1.0, W) == pytest.approx(np.e, rel=1e-14)
    assert eta(2.0, 4.0, W) == pytest.approx(2 * np.log(2) - 2 * np.log(4) / 0.4, rel=1e-12)
    assert eta(2.0, 4.0, W) == pytest.approx(-5.5452, abs=5e-5)


def test_eta_rejects_nonpositive():
    with pytest.raises(DomainError):
        eta(0.0, 1.0, W)
    with pytest.raises(DomainError):
        eta(1.0, -2.0, W)


def test_compatibility_identity():
    assert entropy_compatibility_residual(1.0, 1.0, W) == pytest.approx(0.0, abs=1e-15)
    w53 = EntropyWeights(gamma=5.0 / 3.0)
    assert abs(entropy_compatibility_residual(3.7, 0.2, w53)) < 1e-14


def test_compatibility_random_sweep():
    rng = np.random.default_rng(5)
    rho = rng.uniform(1e-2, 1e2, 10_000)
    e = rng.uniform(1e-2, 1e2, 10_000)
    res = entropy_compatibility_residual(rho, e, W)
    assert np.max(np.abs(res) / np.maximum(rho, 1.0)) < 1e-13


def test_weights_convexity_sampled():
    z = np.geomspace(1e-6, 1e6, 1000)
    assert np.all(W.phi_rho_pp(z) > 0)
    assert np.all(W.phi_e_pp(z) > 0)


# ---------------------------------------------------------------------------
# tangent point
# ---------------------------------------------------------------------------

def test_x_kl_square_is_midpoint():
    assert x_kl("square", 1.0, 3.0) == pytest.approx(2.0, abs=1e-13)


def test_x_kl_phi_rho_log_mean():
    got = x_kl("phi_rho", 1.0, np.e)
    assert got == pytest.approx(np.e - 1.0, abs=1e-12)


def test_x_kl_phi_e_closed_form():
    got = x_kl("phi_e", 1.0, 4.0)
    assert got == pytest.approx(4.0 * np.log(4.0) / 3.0, abs=1e-12)


def test_x_kl_equal_arguments():
    for phi in ("phi_rho", "phi_e", "square"):
        assert x_kl(phi, 5.0, 5.0) == 5.0


def test_x_kl_in_hull_and_symmetric():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = rng.uniform(1e-3, 1e3, 2)
        for phi in ("phi_rho", "phi_e", "square"):
            v = x_kl(phi, a, b)
            assert min(a, b) <= v <= max(a, b)
            assert v == pytest.approx(x_kl(phi, b, a), rel=1e-11, abs=1e-13)


def test_closed_forms_match_bisection():
    rng = np.random.default_rng(13)
    a = rng.uniform(1e-2, 1e2, 50)
    b = rng.uniform(1e-2, 1e2, 50)
    for ai, bi in zip(a, b):
        scale = max(1.0, ai, bi)
        assert abs(x_kl("phi_rho", ai, bi) - xkl_phi_rho(ai, bi)) < 1e-12 * scale
        assert abs(x_kl("phi_e", ai, bi) - xkl_phi_e(ai, bi)) < 1e-12 * scale
        assert abs(x_kl("square", ai, bi) - xkl_square(ai, bi)) < 1e-13 * scale


def test_admissible_interval():
    assert admissible_interval(1.0, 3.0, 2.0, upwind_is_k=True) == (1.0, 2.0)
    assert admissible_interval(1.0, 3.0, 2.0, upwind_is_k=False) == (2.0, 3.0)
    assert admissible_interval(5.0, 5.0, 5.0, upwind_is_k=True) == (5.0, 5.0)


def test_admissible_interval_rejects_outside_hull():
    from stagfv.errors import NumericalError

    with pytest.raises(NumericalError):
        admissible_interval(1.0, 3.0, 4.0, upwind_is_k=True)


# ---------------------------------------------------------------------------
# intermediate curvature points
# ---------------------------------------------------------------------------

def test_mean_value_points_closed_forms():
    # phi_rho: logarithmic mean
    assert mean_value_point("phi_rho", 1.0, np.e, W) == pytest.approx(np.e - 1.0, rel=1e-12)
    # phi_e: geometric mean
    assert mean_value_point("phi_e", 1.0, 4.0, W) == pytest.approx(2.0, rel=1e-12)


def test_mean_value_point_defining_equation():
    rng = np.random.default_rng(4)
    for _ in range(100):
        a, b = rng.uniform(1e-2, 1e2, 2)
        for phi in ("phi_rho", "phi_e"):
            f, fp, fpp = W.phi(phi)
            xi = mean_value_point(phi, a, b, W)
            lhs = fpp(xi) * (b - a)
            rhs = fp(b) - fp(a)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_taylor_point_defining_equation():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a, b = rng.uniform(1e-2, 1e2, 2)
        for phi in ("phi_rho", "phi_e"):
            f, fp, fpp = W.phi(phi)
            xi = taylor_second_point(phi, a, b, W)
            lhs = 0.5 * fpp(xi) * (b - a) ** 2
            rhs = f(b) - f(a) - fp(a) * (b - a)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
            assert min(a, b) <= xi <= max(a, b)


def test_taylor_point_matches_bisection():
    # the closed-form inversion agrees with a direct root solve
    rng = np.random.default_rng(21)
    for _ in range(50):
        a, b = rng.uniform(0.1, 10.0, 2)
        if abs(a - b) < 1e-3:
            continue
        for phi in ("phi_rho", "phi_e"):
            f, fp, fpp = W.phi(phi)
            target = (f(b) - f(a) - fp(a) * (b - a)) / (0.5 * (b - a) ** 2)
            lo, hi = min(a, b), max(a, b)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if fpp(mid) > target:
                    lo = mid
                else:
                    hi = mid
            assert taylor_second_point(phi, a, b, W) == pytest.approx(
                0.5 * (lo + hi), rel=1e-9
            )
