"""Compiled-kernel parity: the Cython core must match the pure-Python reference."""

import numpy as np
import pytest

from pflsim import _core_py
from pflsim.robot import load_robot

core = pytest.importorskip("pflsim._core", reason="compiled kernel core not built")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="module")
def planar_args():
    l = np.array([2.0, 2.0, 2.0])
    m = np.array([8.0, 5.0, 5.0])
    return l, m, m * l**2 / 3.0


def test_planar_kernels_agree(rng, planar_args):
    l, m, iv = planar_args
    for _ in range(200):
        q = rng.uniform(-np.pi, np.pi, 3)
        dq = rng.uniform(-3, 3, 3)
        assert np.allclose(core.p3r_fk(l, q), _core_py.p3r_fk(l, q), atol=1e-14)
        assert np.allclose(core.p3r_jac(l, q), _core_py.p3r_jac(l, q), atol=1e-14)
        assert np.allclose(core.p3r_jacdot(l, q, dq), _core_py.p3r_jacdot(l, q, dq), atol=1e-13)
        assert np.allclose(core.p3r_mass(l, m, iv, q), _core_py.p3r_mass(l, m, iv, q), atol=1e-13)
        assert np.allclose(core.p3r_coriolis(l, m, q, dq), _core_py.p3r_coriolis(l, m, q, dq),
                           atol=1e-13)
        assert np.allclose(core.p3r_gravity(l, m, q, -9.81),
                           _core_py.p3r_gravity(l, m, q, -9.81), atol=1e-12)


def test_mdh_kernels_agree(rng):
    panda = load_robot("panda")
    args = (panda.dh, panda.flange, panda.masses, panda.coms, panda.inertias)
    for _ in range(100):
        q = rng.uniform(-2, 2, 7)
        qd = rng.uniform(-2, 2, 7)
        qdd = rng.uniform(-2, 2, 7)
        assert np.allclose(core.mdh_frames(panda.dh, panda.flange, q),
                           _core_py.mdh_frames(panda.dh, panda.flange, q), atol=1e-13)
        assert np.allclose(core.mdh_jac_geo(panda.dh, panda.flange, q),
                           _core_py.mdh_jac_geo(panda.dh, panda.flange, q), atol=1e-12)
        assert np.allclose(core.mdh_rnea(*args, q, qd, qdd, panda.gravity_accel),
                           _core_py.mdh_rnea(*args, q, qd, qdd, panda.gravity_accel),
                           atol=1e-10)
        assert np.allclose(core.mdh_bias(*args, q, qd, panda.gravity_accel),
                           _core_py.mdh_bias(*args, q, qd, panda.gravity_accel), atol=1e-10)
        assert np.allclose(core.mdh_mass(*args, q), _core_py.mdh_mass(*args, q), atol=1e-11)


def test_mdh_external_wrench_agrees(rng):
    panda = load_robot("panda")
    args = (panda.dh, panda.flange, panda.masses, panda.coms, panda.inertias)
    for _ in range(50):
        q = rng.uniform(-2, 2, 7)
        qd = rng.uniform(-1, 1, 7)
        qdd = rng.uniform(-1, 1, 7)
        fext = rng.uniform(-20, 20, 6)
        a = core.mdh_rnea(*args, q, qd, qdd, panda.gravity_accel, fext)
        b = _core_py.mdh_rnea(*args, q, qd, qdd, panda.gravity_accel, fext)
        assert np.allclose(a, b, atol=1e-10)


def test_external_wrench_maps_through_jacobian(rng):
    # tau(fext) - tau(0) must equal -J_geo^T fext (wrench applied to the flange)
    panda = load_robot("panda")
    args = (panda.dh, panda.flange, panda.masses, panda.coms, panda.inertias)
    for _ in range(20):
        q = rng.uniform(-2, 2, 7)
        fext = rng.uniform(-30, 30, 6)
        zero = np.zeros(7)
        with_f = np.asarray(core.mdh_rnea(*args, q, zero, zero, np.zeros(3), fext))
        without = np.asarray(core.mdh_rnea(*args, q, zero, zero, np.zeros(3)))
        J = np.asarray(core.mdh_jac_geo(panda.dh, panda.flange, q))
        assert np.allclose(with_f - without, -J.T @ fext, atol=1e-9)
