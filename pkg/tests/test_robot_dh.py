import math

import numpy as np
import pytest

from pflsim.linalg import rk4_step, wrap_angle
from pflsim.robot import PlanarThreeR, load_robot, planar3r_as_dh
from pflsim.rotations import matrix_to_rpy, rpy_rate_matrix, rpy_to_matrix


@pytest.fixture(scope="module")
def panda():
    return load_robot("panda")


# independent elementary-transform oracle for the MDH chain
def _rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def _tx(d):
    T = np.eye(4)
    T[0, 3] = d
    return T


def _tz(d):
    T = np.eye(4)
    T[2, 3] = d
    return T


def _oracle_fk(model, q):
    T = np.eye(4)
    for i in range(model.n):
        a, al, d, off = model.dh[i]
        T = T @ _rx(al) @ _tx(a) @ _rz(off + q[i]) @ _tz(d)
    a, al, d = model.flange
    return T @ _rx(al) @ _tx(a) @ _tz(d)


def test_fk_matches_elementary_transform_chain(panda):
    rng = np.random.default_rng(21)
    for _ in range(30):
        q = rng.uniform(-2, 2, 7)
        T = np.asarray(panda.frames(q))[-1]
        assert np.allclose(T, _oracle_fk(panda, q), atol=1e-12)


def test_zero_configuration_pose(panda):
    T = _oracle_fk(panda, np.zeros(7))
    r = panda.pose(np.zeros(7))
    assert np.allclose(r[:3], T[:3, 3], atol=1e-12)
    # flange sits ahead of the base on x and near 0.93 m up at zero angles
    assert r[0] == pytest.approx(0.088, abs=1e-9)
    assert r[1] == pytest.approx(0.0, abs=1e-12)
    assert r[2] == pytest.approx(0.926, abs=1e-9)


def test_rpy_round_trip():
    rng = np.random.default_rng(23)
    for _ in range(200):
        rpy = rng.uniform(-math.pi, math.pi, 3)
        rpy[1] = rng.uniform(-1.4, 1.4)  # away from the pitch singularity
        R = rpy_to_matrix(rpy)
        back = matrix_to_rpy(R)
        assert np.allclose(wrap_angle(back - rpy), 0.0, atol=1e-10)


def test_rpy_rate_matrix_maps_rates_to_omega():
    rng = np.random.default_rng(27)
    h = 1e-7
    for _ in range(50):
        rpy = rng.uniform(-1.2, 1.2, 3)
        rate = rng.uniform(-1, 1, 3)
        R0 = rpy_to_matrix(rpy - h * rate)
        R1 = rpy_to_matrix(rpy + h * rate)
        W = (R1 - R0) @ rpy_to_matrix(rpy).T / (2 * h)  # skew(omega)
        omega = np.array([W[2, 1], W[0, 2], W[1, 0]])
        assert np.allclose(rpy_rate_matrix(rpy) @ rate, omega, atol=1e-5)


def test_task_jacobian_matches_fd(panda):
    rng = np.random.default_rng(29)
    h = 1e-7
    checked = 0
    while checked < 30:
        q = rng.uniform(-1.8, 1.8, 7)
        if abs(math.cos(panda.pose(q)[4])) < 0.1:
            continue  # skip near the representation singularity
        J = panda.jacobian(q)
        Jfd = np.zeros((6, 7))
        for i in range(7):
            qp = q.copy()
            qp[i] += h
            qm = q.copy()
            qm[i] -= h
            d = panda.pose(qp) - panda.pose(qm)
            d[3:] = wrap_angle(d[3:])
            Jfd[:, i] = d / (2 * h)
        assert np.allclose(J, Jfd, atol=1e-6)
        checked += 1


def test_mass_matrix_spd_random(panda):
    rng = np.random.default_rng(31)
    for _ in range(1000):
        q = rng.uniform(-2.0, 2.0, 7)
        M = panda.mass_matrix(q)
        assert np.allclose(M, M.T, atol=1e-10)
        assert np.linalg.eigvalsh(M).min() > 0


def _mdot_richardson(model, q, qd, h=1e-4):
    def diff(hh):
        return (model.mass_matrix(q + hh * qd) - model.mass_matrix(q - hh * qd)) / (2 * hh)

    return (4.0 * diff(h) - diff(2 * h)) / 3.0


def test_skew_symmetry_via_christoffel(panda):
    rng = np.random.default_rng(33)
    for _ in range(10):
        q = rng.uniform(-1.5, 1.5, 7)
        qd = rng.uniform(-1.5, 1.5, 7)
        S = _mdot_richardson(panda, q, qd) - 2 * panda.coriolis_matrix(q, qd)
        assert np.allclose(S, -S.T, atol=1e-8)


def test_christoffel_matrix_reproduces_bias(panda):
    rng = np.random.default_rng(37)
    for _ in range(5):
        q = rng.uniform(-1.5, 1.5, 7)
        qd = rng.uniform(-1.5, 1.5, 7)
        cqd = panda.bias(q, qd) - panda.gravity_vector(q)
        assert np.allclose(panda.coriolis_matrix(q, qd) @ qd, cqd, atol=1e-6)


def test_energy_conservation_gravity_compensated(panda):
    rng = np.random.default_rng(41)
    q = rng.uniform(-1.2, 1.2, 7)
    qd = rng.uniform(-0.5, 0.5, 7)

    def deriv(s):
        qq, dd = s[:7], s[7:]
        tau = panda.gravity_vector(qq)
        qdd = np.linalg.solve(panda.mass_matrix(qq), tau - panda.bias(qq, dd))
        return np.concatenate([dd, qdd])

    s = np.concatenate([q, qd])
    t0 = 0.5 * qd @ panda.mass_matrix(q) @ qd
    for _ in range(1000):
        s = rk4_step(s, deriv, 1e-3)
    t1 = 0.5 * s[7:] @ panda.mass_matrix(s[:7]) @ s[7:]
    assert abs(t1 - t0) / t0 < 1e-5


def test_planar_encoded_as_dh_matches_closed_form():
    arm = PlanarThreeR.default(gravity_y=-9.81)
    chain = planar3r_as_dh(arm)
    rng = np.random.default_rng(43)
    for _ in range(50):
        q = rng.uniform(-math.pi, math.pi, 3)
        qd = rng.uniform(-2, 2, 3)
        assert np.allclose(chain.mass_matrix(q), arm.mass_matrix(q), atol=1e-8)
        _, cqd_a, G_a = arm.dynamics(q, qd)
        _, cqd_b, G_b = chain.dynamics(q, qd)
        assert np.allclose(cqd_a, cqd_b, atol=1e-8)
        assert np.allclose(G_a, G_b, atol=1e-8)
        # planar task coordinates embed in the spatial chain as x, y, yaw
        pose6 = chain.pose(q)
        pose3 = arm.pose(q)
        assert np.allclose(pose6[:2], pose3[:2], atol=1e-10)
        assert abs(pose6[2]) < 1e-10
        assert wrap_angle(pose6[5] - pose3[2]) == pytest.approx(0.0, abs=1e-10)


def test_torque_and_rate_limits_loaded(panda):
    assert np.allclose(panda.torque_limits, [87, 87, 87, 87, 12, 12, 12])
    assert np.allclose(panda.torque_rate_limits, 1000.0)
    assert panda.joint_limits.shape == (7, 2)


def test_inertia_validation():
    with pytest.raises(ValueError):
        load_robot(
            {
                "convention": "mdh",
                "joints": [{"a": 0, "alpha": 0, "d": 0.1}],
                "links": [
                    {"mass": 1.0, "com": [0, 0, 0],
                     "inertia": [[1, 2, 0], [0, 1, 0], [0, 0, 1]]}  # asymmetric
                ],
            }
        )
