"""Dense small-matrix helpers and the fixed-step integrator.

Vectors and matrices are plain numpy arrays throughout the package; this
module adds the two operations with behavior contracts of their own: the
convention-split pseudo-inverse and the classical RK4 step.
"""

import math

import numpy as np

from .errors import NonFiniteDerivative, RankDeficient

COND_LIMIT = 1e12


def pseudo_inverse(J, cond_limit=COND_LIMIT):
    """Moore-Penrose inverse with an explicit rank guard.

    Square matrices are inverted directly; wide matrices (m < n) use the
    right inverse J^T (J J^T)^-1; tall ones the left inverse (J^T J)^-1 J^T.
    Raises RankDeficient when the Gram matrix condition number exceeds
    ``cond_limit`` (default 1e12), signalling a near-singular configuration.
    """
    J = np.asarray(J, dtype=float)
    m, n = J.shape
    if m <= n:
        gram = J @ J.T
    else:
        gram = J.T @ J
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise RankDeficient(f"Gram matrix condition {cond:.3e} exceeds {cond_limit:.1e}")
    if m == n:
        return np.linalg.inv(J)
    if m < n:
        return J.T @ np.linalg.inv(gram)
    return np.linalg.inv(gram) @ J.T


def solve_pinv(J, b, cond_limit=COND_LIMIT):
    """pseudo_inverse(J) @ b without forming the inverse explicitly."""
    J = np.asarray(J, dtype=float)
    m, n = J.shape
    gram = J @ J.T if m <= n else J.T @ J
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise RankDeficient(f"Gram matrix condition {cond:.3e} exceeds {cond_limit:.1e}")
    if m == n:
        return np.linalg.solve(J, b)
    if m < n:
        return J.T @ np.linalg.solve(gram, b)
    return np.linalg.solve(gram, J.T @ b)


def rk4_step(state, deriv, dt):
    """One classical 4th-order Runge-Kutta advance of ``state``.

    ``deriv`` maps a state vector to its time derivative. Raises
    NonFiniteDerivative if any stage produces a non-finite value.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    s = np.asarray(state, dtype=float)
    k1 = np.asarray(deriv(s))
    k2 = np.asarray(deriv(s + 0.5 * dt * k1))
    k3 = np.asarray(deriv(s + 0.5 * dt * k2))
    k4 = np.asarray(deriv(s + dt * k3))
    out = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteDerivative("non-finite state derivative in RK4 stage")
    return out


def wrap_angle(a):
    """Wrap angles (scalar or array) to (-pi, pi]."""
    return -((-np.asarray(a) + math.pi) % (2.0 * math.pi) - math.pi)
