"""Task-space torque controllers: PD, computed torque, and impedance with a
direction-dependent reduced desired inertia.

The impedance controller rebuilds its desired inertia every step from the
current task-space inertia and the current safety direction, which is what
makes it "variable": stiffness and damping stay fixed while the apparent mass
along the contact direction is scaled down by the reduction factor.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDirection
from .linalg import solve_pinv, wrap_angle

EPS_U = 1e-3


@dataclass(frozen=True)
class Gains:
    """Symmetric positive definite task-space stiffness and damping."""

    kp: np.ndarray
    kd: np.ndarray

    def __post_init__(self):
        for name, m in (("kp", self.kp), ("kd", self.kd)):
            if not np.allclose(m, m.T, atol=1e-10):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.linalg.eigvalsh(m) <= 0):
                raise ValueError(f"{name} must be positive definite")

    @classmethod
    def make(cls, kp, kd, task_dim):
        def to_matrix(v):
            v = np.asarray(v, dtype=float)
            if v.ndim == 0:
                return float(v) * np.eye(task_dim)
            if v.ndim == 1:
                if v.shape[0] != task_dim:
                    raise ValueError(f"gain diagonal must have {task_dim} entries")
                return np.diag(v)
            return v

        return cls(to_matrix(kp), to_matrix(kd))


@dataclass(frozen=True)
class DesiredInertia:
    """Diagonal desired task-space inertia, stored as its inverse diagonal.

    Construction guarantees u^T M_d^-1 u = (u^T Mbar^-1 u) / lam, so the
    effective mass along u equals lam times the unreduced value.
    """

    md_inv: np.ndarray
    lam: float
    u: np.ndarray


def build_desired_inertia(mbar_inv, u, lam, eps_u=EPS_U):
    """Pick diagonal entries gamma_i of M_d^-1 for direction u and factor lam.

    Components with |u_i| >= eps_u follow gamma_i = (Mbar^-1 u)_i / (lam u_i);
    the rest (rotational coordinates and near-zero components) keep the
    corresponding Mbar^-1 diagonal, and the formula components are rescaled by
    a common factor so the directional-mass constraint holds exactly. Raises
    DegenerateDirection when that cannot be done with all-positive entries.
    """
    mbar_inv = np.asarray(mbar_inv, dtype=float)
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if mbar_inv.shape != (n, n):
        raise ValueError("direction dimension must match the task-inertia size")
    if not 0.0 < lam <= 1.0:
        raise ValueError("reduction factor must satisfy 0 < lambda <= 1")
    row_u = mbar_inv @ u
    target = float(u @ row_u) / lam
    formula = np.abs(u) >= eps_u
    gamma = np.where(formula, np.divide(row_u, lam * u, where=formula,
                                        out=np.zeros(n)), np.diag(mbar_inv))
    if not np.any(formula):
        raise DegenerateDirection("direction has no usable components")
    s_fixed = float(np.sum((u[~formula] ** 2) * gamma[~formula]))
    s_formula = float(np.sum((u[formula] ** 2) * gamma[formula]))
    if s_formula <= 0.0:
        raise DegenerateDirection("redistribution weight is non-positive")
    scale = (target - s_fixed) / s_formula
    gamma = np.where(formula, gamma * scale, gamma)
    if np.any(gamma <= 0.0):
        bad = int(np.argmin(gamma))
        raise DegenerateDirection(
            f"gamma_{bad} = {gamma[bad]:.3e} <= 0 for u = {np.array2string(u, precision=3)}"
        )
    return DesiredInertia(gamma, float(lam), u.copy())


def task_inertia_inverse(model, q):
    """Mbar^-1 = J M^-1 J^T in task coordinates."""
    J = model.jacobian(q)
    M = model.mass_matrix(q)
    return J @ np.linalg.solve(M, J.T)


def _task_error(model, r, rd):
    e = r - rd
    e[model.pos_dim:] = wrap_angle(e[model.pos_dim:])
    return e


def pd_control(model, q, qd, rd, gains):
    """u = -J^T Kp e - J^T Kd J qd + G, with e = r - rd (orientation wrapped)."""
    r, J = model.pose_and_jacobian(q)
    e = _task_error(model, r, np.asarray(rd, dtype=float))
    return -J.T @ (gains.kp @ e) - J.T @ (gains.kd @ (J @ qd)) + model.gravity_vector(q)


def ctm_control(model, q, qd, rd, rdotd, rddotd, gains, jdot=None):
    """Computed torque: u = M J^+(rddot_d - Kd edot - Kp e - Jdot qd) + C qd + G."""
    qd = np.asarray(qd, dtype=float)
    r, J = model.pose_and_jacobian(q)
    e = _task_error(model, r, np.asarray(rd, dtype=float))
    edot = J @ qd - np.asarray(rdotd, dtype=float)
    if jdot is None:
        jdot = model.jacobian_dot(q, qd)
    y = solve_pinv(J, np.asarray(rddotd, float) - gains.kd @ edot - gains.kp @ e - jdot @ qd)
    M, cqd, G = model.dynamics(q, qd)
    return M @ y + cqd + G


def impedance_control(model, q, qd, rd, rdotd, rddotd, gains, md, f_ext=None, jdot=None):
    """Impedance law with desired inertia ``md`` (force-measured form).

    With f_ext = None or zero this reduces to the free-motion law; the closed
    loop imposes M_d e_r'' + K_d e_r' + K_p e_r = F_ext.
    """
    qd = np.asarray(qd, dtype=float)
    r, J = model.pose_and_jacobian(q)
    e = _task_error(model, r, np.asarray(rd, dtype=float))
    edot = J @ qd - np.asarray(rdotd, dtype=float)
    if jdot is None:
        jdot = model.jacobian_dot(q, qd)
    spring = gains.kd @ edot + gains.kp @ e
    if f_ext is not None:
        spring = spring - np.asarray(f_ext, dtype=float)
    y = solve_pinv(J, np.asarray(rddotd, float) - md.md_inv * spring - jdot @ qd)
    M, cqd, G = model.dynamics(q, qd)
    u = M @ y + cqd + G
    if f_ext is not None:
        u = u - J.T @ np.asarray(f_ext, dtype=float)
    return u


class _JdotTracker:
    """First-order finite difference of the task Jacobian between control steps."""

    def __init__(self, dt):
        self.dt = dt
        self._prev = None

    def update(self, J):
        if self._prev is None:
            jd = np.zeros_like(J)
        else:
            jd = (J - self._prev) / self.dt
        self._prev = J
        return jd


class PDController:
    name = "pd"
    needs_waypoint_rates = False

    def __init__(self, model, gains):
        self.model = model
        self.gains = gains

    def torques(self, q, qd, rd, rdotd, rddotd, u_dir=None, f_ext=None):
        return pd_control(self.model, q, qd, rd, self.gains), []


class CTMController:
    name = "ctm"

    def __init__(self, model, gains, dt):
        self.model = model
        self.gains = gains
        self._fd = None if hasattr(model, "jacobian_dot") else _JdotTracker(dt)

    def _jdot(self, q, qd):
        if self._fd is None:
            return self.model.jacobian_dot(q, qd)
        return self._fd.update(self.model.jacobian(q))

    def torques(self, q, qd, rd, rdotd, rddotd, u_dir=None, f_ext=None):
        jd = self._jdot(q, qd)
        return ctm_control(self.model, q, qd, rd, rdotd, rddotd, self.gains, jdot=jd), []


class ImpedanceController:
    """Variable-impedance controller: M_d rebuilt each step along ``u_dir``."""

    name = "impedance"

    def __init__(self, model, gains, lam, dt, eps_u=EPS_U):
        self.model = model
        self.gains = gains
        self.lam = float(lam)
        self.eps_u = eps_u
        self._fd = None if hasattr(model, "jacobian_dot") else _JdotTracker(dt)

    def _jdot(self, q, qd):
        if self._fd is None:
            return self.model.jacobian_dot(q, qd)
        return self._fd.update(self.model.jacobian(q))

    def torques(self, q, qd, rd, rdotd, rddotd, u_dir=None, f_ext=None):
        events = []
        mbar_inv = task_inertia_inverse(self.model, q)
        if u_dir is None:
            raise ValueError("impedance controller needs the safety direction u_dir")
        try:
            md = build_desired_inertia(mbar_inv, u_dir, self.lam, self.eps_u)
        except DegenerateDirection:
            md = DesiredInertia(np.diag(mbar_inv).copy(), 1.0, np.asarray(u_dir, float))
            events.append("degenerate_direction")
        jd = self._jdot(q, qd)
        tau = impedance_control(self.model, q, qd, rd, rdotd, rddotd, self.gains, md,
                                f_ext=f_ext, jdot=jd)
        return tau, events


def make_controller(spec, model, dt):
    """Instantiate a controller from its scenario dict {'type', 'Kp', 'Kd', 'lambda'}."""
    kind = spec["type"]
    gains = Gains.make(spec["Kp"], spec["Kd"], model.task_dim)
    if kind == "pd":
        return PDController(model, gains)
    if kind == "ctm":
        return CTMController(model, gains, dt)
    if kind == "impedance":
        return ImpedanceController(model, gains, spec["lambda"], dt)
    raise ValueError(f"unknown controller type {kind!r}")
