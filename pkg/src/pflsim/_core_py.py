"""Pure-Python kernel backend.

Mirrors the surface of the compiled extension ``pflsim._core``. Every function
here is the reference implementation; the Cython module must agree to float
round-off (enforced by tests/test_backends.py).

Conventions
-----------
Planar 3R: uniform thin rods, CoM at mid-link, joint angles about +z, task
coordinates [x, y, theta] with theta wrapped to (-pi, pi].

MDH chains: one row per joint ``(a_{i-1}, alpha_{i-1}, d_i, theta_offset_i)``
in the modified Denavit-Hartenberg convention, plus a fixed flange transform
``(a, alpha, d)``. Link inertial data is expressed in the link frame: CoM
position and rotational inertia about the CoM.
"""

import math

import numpy as np

BACKEND = "python"


def _wrap(a):
    # (-pi, pi] convention
    return -((-a + math.pi) % (2.0 * math.pi) - math.pi)


# ---------------------------------------------------------------------------
# planar 3R closed forms
# ---------------------------------------------------------------------------

def p3r_fk(l, q):
    a1 = q[0]
    a2 = q[0] + q[1]
    a3 = q[0] + q[1] + q[2]
    x = l[0] * math.cos(a1) + l[1] * math.cos(a2) + l[2] * math.cos(a3)
    y = l[0] * math.sin(a1) + l[1] * math.sin(a2) + l[2] * math.sin(a3)
    return np.array([x, y, _wrap(a3)])


def p3r_jac(l, q):
    a1 = q[0]
    a2 = q[0] + q[1]
    a3 = q[0] + q[1] + q[2]
    s1, s12, s123 = math.sin(a1), math.sin(a2), math.sin(a3)
    c1, c12, c123 = math.cos(a1), math.cos(a2), math.cos(a3)
    l1, l2, l3 = l[0], l[1], l[2]
    return np.array(
        [
            [-l1 * s1 - l2 * s12 - l3 * s123, -l2 * s12 - l3 * s123, -l3 * s123],
            [l1 * c1 + l2 * c12 + l3 * c123, l2 * c12 + l3 * c123, l3 * c123],
            [1.0, 1.0, 1.0],
        ]
    )


def p3r_jacdot(l, q, dq):
    a1 = q[0]
    a2 = q[0] + q[1]
    a3 = q[0] + q[1] + q[2]
    d1 = dq[0]
    d2 = dq[0] + dq[1]
    d3 = dq[0] + dq[1] + dq[2]
    s1, s12, s123 = math.sin(a1), math.sin(a2), math.sin(a3)
    c1, c12, c123 = math.cos(a1), math.cos(a2), math.cos(a3)
    l1, l2, l3 = l[0], l[1], l[2]
    u1, u2, u3 = l1 * c1 * d1, l2 * c12 * d2, l3 * c123 * d3
    v1, v2, v3 = l1 * s1 * d1, l2 * s12 * d2, l3 * s123 * d3
    return np.array(
        [
            [-u1 - u2 - u3, -u2 - u3, -u3],
            [-v1 - v2 - v3, -v2 - v3, -v3],
            [0.0, 0.0, 0.0],
        ]
    )


def p3r_mass(l, m, inertia, q):
    l1, l2, l3 = l[0], l[1], l[2]
    m1, m2, m3 = m[0], m[1], m[2]
    i1, i2, i3 = inertia[0], inertia[1], inertia[2]
    c2 = math.cos(q[1])
    c3 = math.cos(q[2])
    c23 = math.cos(q[1] + q[2])
    # symmetric Lagrangian of three rods; i_k replaces the (1/3) m l^2 terms
    m22 = i2 + l2 * l2 * m3 + l2 * l3 * m3 * c3 + i3
    m33 = i3
    m23 = 0.5 * l2 * l3 * m3 * c3 + i3
    m12 = 0.5 * l1 * l2 * m2 * c2 + l1 * l2 * m3 * c2 + 0.5 * l1 * l3 * m3 * c23 + m22
    m13 = 0.5 * l3 * m3 * (l1 * c23 + l2 * c3) + i3
    m11 = (
        i1
        + l1 * l1 * (m2 + m3)
        + l1 * l2 * (m2 + 2.0 * m3) * c2
        + l1 * l3 * m3 * c23
        + i2
        + l2 * l2 * m3
        + l2 * l3 * m3 * c3
        + i3
    )
    return np.array([[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]])


def p3r_coriolis(l, m, q, dq):
    l1, l2, l3 = l[0], l[1], l[2]
    m2, m3 = m[1], m[2]
    d1, d2, d3 = dq[0], dq[1], dq[2]
    s2 = math.sin(q[1])
    s3 = math.sin(q[2])
    s23 = math.sin(q[1] + q[2])
    # Christoffel form: M_dot - 2C is skew-symmetric
    h1 = 0.5 * l1 * (l2 * (m2 + 2.0 * m3) * s2 + l3 * m3 * s23)
    h2 = 0.5 * l3 * m3 * (l1 * s23 + l2 * s3)
    h3 = 0.5 * l2 * l3 * m3 * s3
    return np.array(
        [
            [-h1 * d2 - h2 * d3, -h1 * (d1 + d2) - h2 * d3, -h2 * (d1 + d2 + d3)],
            [h1 * d1 - h3 * d3, -h3 * d3, -h3 * (d1 + d2 + d3)],
            [h2 * d1 + h3 * d2, h3 * (d1 + d2), 0.0],
        ]
    )


def p3r_gravity(l, m, q, gy):
    l1, l2, l3 = l[0], l[1], l[2]
    m1, m2, m3 = m[0], m[1], m[2]
    c1 = math.cos(q[0])
    c12 = math.cos(q[0] + q[1])
    c123 = math.cos(q[0] + q[1] + q[2])
    g = -gy
    g1 = 0.5 * g * (
        l1 * m1 * c1
        + m2 * (2.0 * l1 * c1 + l2 * c12)
        + m3 * (2.0 * l1 * c1 + 2.0 * l2 * c12 + l3 * c123)
    )
    g2 = 0.5 * g * (l2 * m2 * c12 + m3 * (2.0 * l2 * c12 + l3 * c123))
    g3 = 0.5 * g * l3 * m3 * c123
    return np.array([g1, g2, g3])


# ---------------------------------------------------------------------------
# modified-DH chains
# ---------------------------------------------------------------------------

def _mdh_T(a, alpha, d, theta):
    ca, sa = math.cos(alpha), math.sin(alpha)
    ct, st = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [ct, -st, 0.0, a],
            [st * ca, ct * ca, -sa, -sa * d],
            [st * sa, ct * sa, ca, ca * d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def mdh_frames(dh, flange, q):
    n = dh.shape[0]
    out = np.empty((n + 1, 4, 4))
    T = np.eye(4)
    for i in range(n):
        T = T @ _mdh_T(dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3] + q[i])
        out[i] = T
    out[n] = T @ _mdh_T(flange[0], flange[1], flange[2], 0.0)
    return out


def mdh_fk(dh, flange, q):
    return mdh_frames(dh, flange, q)[-1]


def mdh_jac_geo(dh, flange, q):
    n = dh.shape[0]
    frames = mdh_frames(dh, flange, q)
    pe = frames[-1][:3, 3]
    J = np.zeros((6, n))
    for i in range(n):
        z = frames[i][:3, 2]
        o = frames[i][:3, 3]
        J[:3, i] = np.cross(z, pe - o)
        J[3:, i] = z
    return J


def mdh_rnea(dh, flange, mass, com, inertia, q, qd, qdd, grav, fext=None):
    """Recursive Newton-Euler in link coordinates (Craig formulation).

    Returns joint torques for the motion (q, qd, qdd) under gravity ``grav``
    and an optional external wrench ``fext`` = (force, torque) applied to the
    flange, expressed in the base frame.
    """
    n = dh.shape[0]
    Rs = np.empty((n, 3, 3))
    ps = np.empty((n, 3))
    for i in range(n):
        T = _mdh_T(dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3] + q[i])
        Rs[i] = T[:3, :3]
        ps[i] = T[:3, 3]

    w = np.zeros(3)
    wd = np.zeros(3)
    vd = -np.asarray(grav, dtype=float)
    ws = np.empty((n, 3))
    wds = np.empty((n, 3))
    F = np.empty((n, 3))
    N = np.empty((n, 3))
    for i in range(n):
        Rt = Rs[i].T
        wi = Rt @ w
        w_new = wi.copy()
        w_new[2] += qd[i]
        wd_new = Rt @ wd + np.cross(wi, [0.0, 0.0, qd[i]])
        wd_new[2] += qdd[i]
        vd = Rt @ (vd + np.cross(wd, ps[i]) + np.cross(w, np.cross(w, ps[i])))
        w, wd = w_new, wd_new
        ws[i] = w
        wds[i] = wd
        c = com[i]
        vc = vd + np.cross(wd, c) + np.cross(w, np.cross(w, c))
        F[i] = mass[i] * vc
        N[i] = inertia[i] @ wd + np.cross(w, inertia[i] @ w)

    f = np.zeros(3)
    nq = np.zeros(3)
    if fext is not None:
        # reaction of the wrench applied to the flange, moved into link-n frame
        Rbn = np.eye(3)
        for i in range(n):
            Rbn = Rbn @ Rs[i]
        Tf = _mdh_T(flange[0], flange[1], flange[2], 0.0)
        f = -(Rbn.T @ np.asarray(fext[:3], dtype=float))
        nq = -(Rbn.T @ np.asarray(fext[3:], dtype=float)) + np.cross(Tf[:3, 3], f)

    tau = np.zeros(n)
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            Rn = Rs[i + 1]
            fi = Rn @ f + F[i]
            nq = N[i] + Rn @ nq + np.cross(com[i], F[i]) + np.cross(ps[i + 1], Rn @ f)
        else:
            fi = f + F[i]
            nq = N[i] + nq + np.cross(com[i], F[i])
        f = fi
        tau[i] = nq[2]
    return tau


def mdh_bias(dh, flange, mass, com, inertia, q, qd, grav):
    return mdh_rnea(dh, flange, mass, com, inertia, q, qd, np.zeros(len(q)), grav)


def mdh_mass(dh, flange, mass, com, inertia, q):
    n = dh.shape[0]
    M = np.empty((n, n))
    zero = np.zeros(n)
    gz = np.zeros(3)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        M[:, j] = mdh_rnea(dh, flange, mass, com, inertia, q, zero, e, gz)
    return 0.5 * (M + M.T)
