"""Serial-manipulator models: closed-form planar 3R and generic modified-DH chains.

Task coordinates are [x, y, theta] for the planar robot and
[x, y, z, alpha, beta, gamma] (RPY per rotations.py) for spatial chains.
Angles in task vectors are wrapped to (-pi, pi].
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ScenarioError
from .linalg import solve_pinv, wrap_angle
from .rotations import matrix_to_rpy, rpy_rate_matrix


@dataclass(frozen=True)
class TaskPose:
    """End-effector pose: position (2 or 3 values) + orientation angles."""

    position: np.ndarray
    orientation: np.ndarray

    @property
    def vector(self):
        return np.concatenate([self.position, self.orientation])

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=float)
        if vec.shape[0] == 3:
            return cls(vec[:2].copy(), wrap_angle(vec[2:]).copy())
        if vec.shape[0] == 6:
            return cls(vec[:3].copy(), wrap_angle(vec[3:]).copy())
        raise ValueError(f"task vectors have 3 or 6 entries, got {vec.shape[0]}")


class PlanarThreeR:
    """Three uniform thin rods in a plane, joints about +z.

    ``inertias`` are the per-link rotational inertias about the link's own
    joint; the Table-2 construction uses the thin-rod value m*l^2/3. Gravity
    is off by default (horizontal plane); set ``gravity_y`` (e.g. -9.81) for
    vertical-plane scenarios.
    """

    n = 3
    task_dim = 3
    pos_dim = 2

    def __init__(self, lengths, masses, inertias=None, gravity_y=0.0, name="planar3r",
                 torque_limits=None, torque_rate_limits=None):
        self.lengths = np.asarray(lengths, dtype=float)
        self.masses = np.asarray(masses, dtype=float)
        if self.lengths.shape != (3,) or self.masses.shape != (3,):
            raise ValueError("planar 3R needs exactly three lengths and masses")
        if np.any(self.lengths <= 0) or np.any(self.masses <= 0):
            raise ValueError("lengths and masses must be positive")
        if inertias is None:
            inertias = self.masses * self.lengths**2 / 3.0
        self.inertias = np.asarray(inertias, dtype=float)
        if np.any(self.inertias <= 0):
            raise ValueError("link inertias must be positive")
        self.gravity_y = float(gravity_y)
        self.name = name
        self.torque_limits = None if torque_limits is None else np.asarray(torque_limits, float)
        self.torque_rate_limits = (
            None if torque_rate_limits is None else np.asarray(torque_rate_limits, float)
        )
        self.joint_limits = None

    @classmethod
    def default(cls, gravity_y=0.0):
        """The 2 m / (8, 5, 5) kg arm with thin-rod inertias."""
        return cls([2.0, 2.0, 2.0], [8.0, 5.0, 5.0], gravity_y=gravity_y)

    # -- kinematics ---------------------------------------------------------

    def pose(self, q):
        return kernels.p3r_fk(self.lengths, np.asarray(q, dtype=float))

    def forward_kinematics(self, q):
        return TaskPose.from_vector(self.pose(q))

    def jacobian(self, q):
        return kernels.p3r_jac(self.lengths, np.asarray(q, dtype=float))

    def pose_and_jacobian(self, q):
        q = np.asarray(q, dtype=float)
        return kernels.p3r_fk(self.lengths, q), kernels.p3r_jac(self.lengths, q)

    def jacobian_dot(self, q, qd):
        return kernels.p3r_jacdot(
            self.lengths, np.asarray(q, dtype=float), np.asarray(qd, dtype=float)
        )

    def task_velocity(self, q, qd):
        return self.jacobian(q) @ np.asarray(qd, dtype=float)

    # -- dynamics -----------------------------------------------------------

    def mass_matrix(self, q):
        return kernels.p3r_mass(self.lengths, self.masses, self.inertias,
                                np.asarray(q, dtype=float))

    def coriolis_matrix(self, q, qd):
        return kernels.p3r_coriolis(self.lengths, self.masses,
                                    np.asarray(q, dtype=float), np.asarray(qd, dtype=float))

    def gravity_vector(self, q):
        return kernels.p3r_gravity(self.lengths, self.masses,
                                   np.asarray(q, dtype=float), self.gravity_y)

    def bias(self, q, qd):
        qd = np.asarray(qd, dtype=float)
        return self.coriolis_matrix(q, qd) @ qd + self.gravity_vector(q)

    def dynamics(self, q, qd):
        qd = np.asarray(qd, dtype=float)
        M = self.mass_matrix(q)
        cqd = self.coriolis_matrix(q, qd) @ qd
        return M, cqd, self.gravity_vector(q)


class DHChain:
    """Modified-DH serial chain with numerically computed dynamics.

    ``dh`` holds one row (a_{i-1}, alpha_{i-1}, d_i, theta_offset_i) per
    joint; ``flange`` a fixed (a, alpha, d) tool transform. Inertial data per
    link: mass, CoM in the link frame, rotational inertia tensor about the
    CoM. All dynamics are produced by one recursive Newton-Euler kernel
    (mass matrix via unit joint accelerations).
    """

    pos_dim = 3
    task_dim = 6

    def __init__(self, dh, flange, masses, coms, inertias, gravity=(0.0, 0.0, -9.81),
                 torque_limits=None, torque_rate_limits=None, joint_limits=None,
                 name="mdh"):
        self.dh = np.ascontiguousarray(dh, dtype=float)
        self.flange = np.ascontiguousarray(flange, dtype=float)
        self.masses = np.ascontiguousarray(masses, dtype=float)
        self.coms = np.ascontiguousarray(coms, dtype=float)
        self.inertias = np.ascontiguousarray(inertias, dtype=float)
        self.n = self.dh.shape[0]
        if self.masses.shape != (self.n,) or self.coms.shape != (self.n, 3):
            raise ValueError("inertial data must match the joint count")
        if self.inertias.shape != (self.n, 3, 3):
            raise ValueError("inertia tensors must be (n, 3, 3)")
        for i, tensor in enumerate(self.inertias):
            if not np.allclose(tensor, tensor.T, atol=1e-12):
                raise ValueError(f"link {i} inertia tensor not symmetric")
            if np.any(np.linalg.eigvalsh(tensor) <= 0):
                raise ValueError(f"link {i} inertia tensor not positive definite")
        if np.any(self.masses <= 0):
            raise ValueError("link masses must be positive")
        self.gravity_accel = np.ascontiguousarray(gravity, dtype=float)
        self.torque_limits = None if torque_limits is None else np.asarray(torque_limits, float)
        self.torque_rate_limits = (
            None if torque_rate_limits is None else np.asarray(torque_rate_limits, float)
        )
        self.joint_limits = None if joint_limits is None else np.asarray(joint_limits, float)
        self.name = name

    # -- kinematics ---------------------------------------------------------

    def frames(self, q):
        return kernels.mdh_frames(self.dh, self.flange, np.asarray(q, dtype=float))

    def pose(self, q):
        T = kernels.mdh_fk(self.dh, self.flange, np.asarray(q, dtype=float))
        T = np.asarray(T)
        return np.concatenate([T[:3, 3], matrix_to_rpy(T[:3, :3])])

    def forward_kinematics(self, q):
        return TaskPose.from_vector(self.pose(q))

    def jacobian_geometric(self, q):
        return np.asarray(kernels.mdh_jac_geo(self.dh, self.flange, np.asarray(q, float)))

    def jacobian(self, q):
        r = self.pose(q)
        return self._task_jacobian(q, r)

    def _task_jacobian(self, q, pose_vec):
        J = np.asarray(kernels.mdh_jac_geo(self.dh, self.flange, np.asarray(q, float)))
        Jt = J.copy()
        Jt[3:, :] = np.linalg.solve(rpy_rate_matrix(pose_vec[3:]), J[3:, :])
        return Jt

    def pose_and_jacobian(self, q):
        r = self.pose(q)
        return r, self._task_jacobian(q, r)

    def task_velocity(self, q, qd):
        return self.jacobian(q) @ np.asarray(qd, dtype=float)

    # -- dynamics -----------------------------------------------------------

    def mass_matrix(self, q):
        return np.asarray(kernels.mdh_mass(self.dh, self.flange, self.masses, self.coms,
                                           self.inertias, np.asarray(q, dtype=float)))

    def bias(self, q, qd):
        return np.asarray(kernels.mdh_bias(self.dh, self.flange, self.masses, self.coms,
                                           self.inertias, np.asarray(q, dtype=float),
                                           np.asarray(qd, dtype=float), self.gravity_accel))

    def gravity_vector(self, q):
        q = np.asarray(q, dtype=float)
        return np.asarray(kernels.mdh_bias(self.dh, self.flange, self.masses, self.coms,
                                           self.inertias, q, np.zeros(self.n), self.gravity_accel))

    def rnea(self, q, qd, qdd, fext=None):
        return np.asarray(kernels.mdh_rnea(self.dh, self.flange, self.masses, self.coms,
                                           self.inertias, np.asarray(q, float),
                                           np.asarray(qd, float), np.asarray(qdd, float),
                                           self.gravity_accel, fext))

    def coriolis_matrix(self, q, qd, h=1e-5):
        """Christoffel-symbol Coriolis matrix from central differences of M(q)."""
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        n = self.n
        dM = np.empty((n, n, n))
        for k in range(n):
            qp = q.copy()
            qp[k] += h
            qm = q.copy()
            qm[k] -= h
            dM[k] = (self.mass_matrix(qp) - self.mass_matrix(qm)) / (2.0 * h)
        C = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                C[i, j] = 0.5 * np.sum(
                    (dM[:, i, j] + dM[j, i, :] - dM[i, j, :]) * qd
                )
        return C

    def dynamics(self, q, qd):
        M = self.mass_matrix(q)
        G = self.gravity_vector(q)
        cqd = self.bias(q, qd) - G
        return M, cqd, G


def planar3r_as_dh(planar, gravity_y=None):
    """Encode a PlanarThreeR as an equivalent DHChain (for cross-validation).

    Links become x-axis rods with CoM at l/2 and central inertia derived from
    the model's joint-referred inertia: I_c = I_joint - m (l/2)^2.
    """
    gy = planar.gravity_y if gravity_y is None else gravity_y
    l = planar.lengths
    dh = np.array([
        [0.0, 0.0, 0.0, 0.0],
        [l[0], 0.0, 0.0, 0.0],
        [l[1], 0.0, 0.0, 0.0],
    ])
    flange = np.array([l[2], 0.0, 0.0])
    coms = np.array([[li / 2.0, 0.0, 0.0] for li in l])
    inertias = []
    for m, li, ij in zip(planar.masses, l, planar.inertias):
        ic = ij - m * (li / 2.0) ** 2
        # thin rod along x: negligible Ixx, Iyy = Izz = central inertia
        eps = 1e-12
        inertias.append(np.diag([eps, ic, ic]))
    return DHChain(dh, flange, planar.masses, coms, np.array(inertias),
                   gravity=(0.0, gy, 0.0), name=planar.name + "_dh")


def ik_resolved_rate(model, target, q0, step=0.5, iters=5000, tol=1e-10):
    """Damped resolved-rate IK on the full task vector; returns (q, residual)."""
    q = np.asarray(q0, dtype=float).copy()
    target = np.asarray(target, dtype=float)
    angle_idx = slice(model.pos_dim, model.task_dim)
    for _ in range(iters):
        r = model.pose(q)
        e = target - r
        e[angle_idx] = wrap_angle(e[angle_idx])
        if float(np.max(np.abs(e))) < tol:
            break
        J = model.jacobian(q)
        q = q + step * solve_pinv(J, e)
    r = model.pose(q)
    e = target - r
    e[angle_idx] = wrap_angle(e[angle_idx])
    return q, float(np.max(np.abs(e)))


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def _model_from_dict(doc):
    convention = doc.get("convention")
    name = doc.get("name", convention or "robot")
    if convention == "planar3r":
        links = doc["links"]
        return PlanarThreeR(
            [lk["length"] for lk in links],
            [lk["mass"] for lk in links],
            inertias=[lk["inertia"] for lk in links] if "inertia" in links[0] else None,
            gravity_y=doc.get("gravity_y", 0.0),
            name=name,
            torque_limits=doc.get("torque_limits"),
            torque_rate_limits=doc.get("torque_rate_limits"),
        )
    if convention == "mdh":
        joints = doc["joints"]
        dh = [[j["a"], j["alpha"], j["d"], j.get("theta", 0.0)] for j in joints]
        fl = doc.get("flange", {"a": 0.0, "alpha": 0.0, "d": 0.0})
        links = doc["links"]
        return DHChain(
            dh,
            [fl["a"], fl["alpha"], fl["d"]],
            [lk["mass"] for lk in links],
            [lk["com"] for lk in links],
            [lk["inertia"] for lk in links],
            gravity=doc.get("gravity", (0.0, 0.0, -9.81)),
            torque_limits=doc.get("torque_limits"),
            torque_rate_limits=doc.get("torque_rate_limits"),
            joint_limits=doc.get("joint_limits"),
            name=name,
        )
    raise ScenarioError(f"unknown robot convention {convention!r}")


def load_robot(source):
    """Load a robot model from a packaged name ('planar3r', 'panda'), path, or dict."""
    if isinstance(source, dict):
        return _model_from_dict(source)
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        return _model_from_dict(json.loads(path.read_text()))
    ref = resources.files("pflsim").joinpath(f"models/{source}.json")
    if ref.is_file():
        return _model_from_dict(json.loads(ref.read_text()))
    raise ScenarioError(f"robot model {source!r} not found")
