import math

import numpy as np
import pytest

from pflsim.errors import NonFiniteDerivative, RankDeficient
from pflsim.linalg import pseudo_inverse, rk4_step, wrap_angle


def test_pinv_identity():
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))


def test_pinv_unit_row():
    J = np.array([[1.0, 0.0, 0.0]])
    assert np.allclose(pseudo_inverse(J), np.array([[1.0], [0.0], [0.0]]))


def test_pinv_matches_svd_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        J = rng.normal(size=(3, 7))
        assert np.allclose(pseudo_inverse(J), np.linalg.pinv(J), atol=1e-10)
        assert np.allclose(J @ pseudo_inverse(J), np.eye(3), atol=1e-10)
        Jt = rng.normal(size=(7, 3))
        assert np.allclose(pseudo_inverse(Jt), np.linalg.pinv(Jt), atol=1e-10)


def test_pinv_moore_penrose_identities():
    rng = np.random.default_rng(11)
    for rows, cols in [(3, 7), (7, 3), (4, 4)]:
        J = rng.normal(size=(rows, cols))
        Jp = pseudo_inverse(J)
        assert np.allclose(J @ Jp @ J, J, atol=1e-9)
        assert np.allclose(Jp @ J @ Jp, Jp, atol=1e-9)


def test_pinv_rank_deficient():
    J = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])  # rank 1
    with pytest.raises(RankDeficient):
        pseudo_inverse(J)


def test_rk4_zero_derivative():
    out = rk4_step(np.array([5.0]), lambda s: np.zeros(1), 0.01)
    assert out[0] == 5.0


def test_rk4_exponential():
    out = rk4_step(np.array([1.0]), lambda s: s, 0.1)
    assert out[0] == pytest.approx(1.1051708333333332, abs=1e-12)  # the RK4 sum
    assert abs(out[0] - math.exp(0.1)) < 0.1**5 / 120 * 1.5  # O(dt^5) truncation


def test_rk4_harmonic_energy_drift():
    # x'' = -x, one full period at dt = 1e-3
    def deriv(s):
        return np.array([s[1], -s[0]])

    s = np.array([1.0, 0.0])
    dt = 1e-3
    for _ in range(int(round(2 * math.pi / dt))):
        s = rk4_step(s, deriv, dt)
    energy = 0.5 * (s[0] ** 2 + s[1] ** 2)
    assert abs(energy - 0.5) / 0.5 < 1e-8


def test_rk4_order_four_convergence():
    def integrate(dt):
        s = np.array([1.0])
        for _ in range(int(round(1.0 / dt))):
            s = rk4_step(s, lambda v: v, dt)
        return abs(s[0] - math.e)

    e1 = integrate(0.01)
    e2 = integrate(0.005)
    assert e1 / e2 == pytest.approx(16.0, rel=0.2)


def test_rk4_nonfinite():
    with np.errstate(divide="ignore", invalid="ignore"):
        with pytest.raises(NonFiniteDerivative):
            rk4_step(np.array([1.0]), lambda s: s / 0.0, 0.1)


def test_rk4_needs_positive_dt():
    with pytest.raises(ValueError):
        rk4_step(np.array([1.0]), lambda s: s, 0.0)


def test_wrap_angle_convention():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    arr = wrap_angle(np.array([0.0, 2 * math.pi, -2 * math.pi]))
    assert np.allclose(arr, 0.0)
