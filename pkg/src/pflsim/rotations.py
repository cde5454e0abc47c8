"""Roll-pitch-yaw helpers.

Pose orientation follows R = Rz(gamma) @ Ry(beta) @ Rx(alpha): rotations about
the fixed base axes applied x-first (extrinsic ZYX order as the angle vector
is read right to left). The rate mapping E satisfies omega = E(rpy) @ rpy_dot.
"""

import math

import numpy as np


def rpy_to_matrix(rpy):
    a, b, g = rpy
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cg, sg = math.cos(g), math.sin(g)
    return np.array(
        [
            [cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa],
            [sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa],
            [-sb, cb * sa, cb * ca],
        ]
    )


def matrix_to_rpy(R):
    """Inverse of rpy_to_matrix away from the pitch singularity |beta| = pi/2."""
    beta = math.atan2(-R[2, 0], math.hypot(R[0, 0], R[1, 0]))
    alpha = math.atan2(R[2, 1], R[2, 2])
    gamma = math.atan2(R[1, 0], R[0, 0])
    return np.array([alpha, beta, gamma])


def rpy_rate_matrix(rpy):
    """E with omega = E @ [alpha_dot, beta_dot, gamma_dot]; singular at cos(beta)=0."""
    _, b, g = rpy
    cb, sb = math.cos(b), math.sin(b)
    cg, sg = math.cos(g), math.sin(g)
    return np.array([[cg * cb, -sg, 0.0], [sg * cb, cg, 0.0], [-sb, 0.0, 1.0]])
