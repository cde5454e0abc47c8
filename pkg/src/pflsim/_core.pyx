# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Same surface as ``pflsim._core_py`` (which is the readable reference); this
module exists because the closed-loop simulators evaluate these kernels tens
of thousands of times per run.
"""

from libc.math cimport sin, cos, fmod, pi

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

DEF MAXN = 32


cdef inline double _wrap(double a) nogil:
    # (-pi, pi] convention
    a = fmod(-a + pi, 2.0 * pi)
    if a < 0:
        a += 2.0 * pi
    return pi - a


# ---------------------------------------------------------------------------
# planar 3R closed forms
# ---------------------------------------------------------------------------

def p3r_fk(double[:] l, double[:] q):
    cdef double a1 = q[0]
    cdef double a2 = q[0] + q[1]
    cdef double a3 = q[0] + q[1] + q[2]
    out = np.empty(3)
    cdef double[:] o = out
    o[0] = l[0] * cos(a1) + l[1] * cos(a2) + l[2] * cos(a3)
    o[1] = l[0] * sin(a1) + l[1] * sin(a2) + l[2] * sin(a3)
    o[2] = _wrap(a3)
    return out


def p3r_jac(double[:] l, double[:] q):
    cdef double a1 = q[0]
    cdef double a2 = q[0] + q[1]
    cdef double a3 = q[0] + q[1] + q[2]
    cdef double s1 = sin(a1), s12 = sin(a2), s123 = sin(a3)
    cdef double c1 = cos(a1), c12 = cos(a2), c123 = cos(a3)
    cdef double l1 = l[0], l2 = l[1], l3 = l[2]
    out = np.empty((3, 3))
    cdef double[:, :] J = out
    J[0, 0] = -l1 * s1 - l2 * s12 - l3 * s123
    J[0, 1] = -l2 * s12 - l3 * s123
    J[0, 2] = -l3 * s123
    J[1, 0] = l1 * c1 + l2 * c12 + l3 * c123
    J[1, 1] = l2 * c12 + l3 * c123
    J[1, 2] = l3 * c123
    J[2, 0] = 1.0
    J[2, 1] = 1.0
    J[2, 2] = 1.0
    return out


def p3r_jacdot(double[:] l, double[:] q, double[:] dq):
    cdef double a1 = q[0]
    cdef double a2 = q[0] + q[1]
    cdef double a3 = q[0] + q[1] + q[2]
    cdef double d1 = dq[0]
    cdef double d2 = dq[0] + dq[1]
    cdef double d3 = dq[0] + dq[1] + dq[2]
    cdef double u1 = l[0] * cos(a1) * d1
    cdef double u2 = l[1] * cos(a2) * d2
    cdef double u3 = l[2] * cos(a3) * d3
    cdef double v1 = l[0] * sin(a1) * d1
    cdef double v2 = l[1] * sin(a2) * d2
    cdef double v3 = l[2] * sin(a3) * d3
    out = np.zeros((3, 3))
    cdef double[:, :] J = out
    J[0, 0] = -u1 - u2 - u3
    J[0, 1] = -u2 - u3
    J[0, 2] = -u3
    J[1, 0] = -v1 - v2 - v3
    J[1, 1] = -v2 - v3
    J[1, 2] = -v3
    return out


def p3r_mass(double[:] l, double[:] m, double[:] inertia, double[:] q):
    cdef double l1 = l[0], l2 = l[1], l3 = l[2]
    cdef double m2 = m[1], m3 = m[2]
    cdef double i1 = inertia[0], i2 = inertia[1], i3 = inertia[2]
    cdef double c2 = cos(q[1]), c3 = cos(q[2]), c23 = cos(q[1] + q[2])
    cdef double m22 = i2 + l2 * l2 * m3 + l2 * l3 * m3 * c3 + i3
    cdef double m33 = i3
    cdef double m23 = 0.5 * l2 * l3 * m3 * c3 + i3
    cdef double m12 = 0.5 * l1 * l2 * m2 * c2 + l1 * l2 * m3 * c2 \
        + 0.5 * l1 * l3 * m3 * c23 + m22
    cdef double m13 = 0.5 * l3 * m3 * (l1 * c23 + l2 * c3) + i3
    cdef double m11 = i1 + l1 * l1 * (m2 + m3) + l1 * l2 * (m2 + 2.0 * m3) * c2 \
        + l1 * l3 * m3 * c23 + i2 + l2 * l2 * m3 + l2 * l3 * m3 * c3 + i3
    out = np.empty((3, 3))
    cdef double[:, :] M = out
    M[0, 0] = m11; M[0, 1] = m12; M[0, 2] = m13
    M[1, 0] = m12; M[1, 1] = m22; M[1, 2] = m23
    M[2, 0] = m13; M[2, 1] = m23; M[2, 2] = m33
    return out


def p3r_coriolis(double[:] l, double[:] m, double[:] q, double[:] dq):
    cdef double l1 = l[0], l2 = l[1], l3 = l[2]
    cdef double m2 = m[1], m3 = m[2]
    cdef double d1 = dq[0], d2 = dq[1], d3 = dq[2]
    cdef double s2 = sin(q[1]), s3 = sin(q[2]), s23 = sin(q[1] + q[2])
    cdef double h1 = 0.5 * l1 * (l2 * (m2 + 2.0 * m3) * s2 + l3 * m3 * s23)
    cdef double h2 = 0.5 * l3 * m3 * (l1 * s23 + l2 * s3)
    cdef double h3 = 0.5 * l2 * l3 * m3 * s3
    out = np.empty((3, 3))
    cdef double[:, :] C = out
    C[0, 0] = -h1 * d2 - h2 * d3
    C[0, 1] = -h1 * (d1 + d2) - h2 * d3
    C[0, 2] = -h2 * (d1 + d2 + d3)
    C[1, 0] = h1 * d1 - h3 * d3
    C[1, 1] = -h3 * d3
    C[1, 2] = -h3 * (d1 + d2 + d3)
    C[2, 0] = h2 * d1 + h3 * d2
    C[2, 1] = h3 * (d1 + d2)
    C[2, 2] = 0.0
    return out


def p3r_gravity(double[:] l, double[:] m, double[:] q, double gy):
    cdef double l1 = l[0], l2 = l[1], l3 = l[2]
    cdef double m1 = m[0], m2 = m[1], m3 = m[2]
    cdef double c1 = cos(q[0])
    cdef double c12 = cos(q[0] + q[1])
    cdef double c123 = cos(q[0] + q[1] + q[2])
    cdef double g = -gy
    out = np.empty(3)
    cdef double[:] G = out
    G[0] = 0.5 * g * (l1 * m1 * c1 + m2 * (2.0 * l1 * c1 + l2 * c12)
                      + m3 * (2.0 * l1 * c1 + 2.0 * l2 * c12 + l3 * c123))
    G[1] = 0.5 * g * (l2 * m2 * c12 + m3 * (2.0 * l2 * c12 + l3 * c123))
    G[2] = 0.5 * g * l3 * m3 * c123
    return out


# ---------------------------------------------------------------------------
# modified-DH chains
# ---------------------------------------------------------------------------

cdef inline void _mdh_rp(double a, double alpha, double d, double theta,
                         double* R, double* p) nogil:
    cdef double ca = cos(alpha), sa = sin(alpha)
    cdef double ct = cos(theta), st = sin(theta)
    R[0] = ct;      R[1] = -st;     R[2] = 0.0
    R[3] = st * ca; R[4] = ct * ca; R[5] = -sa
    R[6] = st * sa; R[7] = ct * sa; R[8] = ca
    p[0] = a
    p[1] = -sa * d
    p[2] = ca * d


cdef inline void _matmul33(double* A, double* B, double* C) nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            C[3 * i + j] = A[3 * i] * B[j] + A[3 * i + 1] * B[3 + j] + A[3 * i + 2] * B[6 + j]


cdef inline void _matvec(double* A, double* x, double* y) nogil:
    y[0] = A[0] * x[0] + A[1] * x[1] + A[2] * x[2]
    y[1] = A[3] * x[0] + A[4] * x[1] + A[5] * x[2]
    y[2] = A[6] * x[0] + A[7] * x[1] + A[8] * x[2]


cdef inline void _matTvec(double* A, double* x, double* y) nogil:
    y[0] = A[0] * x[0] + A[3] * x[1] + A[6] * x[2]
    y[1] = A[1] * x[0] + A[4] * x[1] + A[7] * x[2]
    y[2] = A[2] * x[0] + A[5] * x[1] + A[8] * x[2]


cdef inline void _cross(double* a, double* b, double* c) nogil:
    c[0] = a[1] * b[2] - a[2] * b[1]
    c[1] = a[2] * b[0] - a[0] * b[2]
    c[2] = a[0] * b[1] - a[1] * b[0]


def mdh_frames(double[:, :] dh, double[:] flange, double[:] q):
    cdef int n = dh.shape[0]
    cdef int i, r, c
    cdef double R[9]
    cdef double p[3]
    cdef double Tacc[16]
    cdef double Tnew[16]
    out = np.empty((n + 1, 4, 4))
    cdef double[:, :, :] O = out
    for i in range(16):
        Tacc[i] = 0.0
    Tacc[0] = Tacc[5] = Tacc[10] = Tacc[15] = 1.0
    for i in range(n + 1):
        if i < n:
            _mdh_rp(dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3] + q[i], R, p)
        else:
            _mdh_rp(flange[0], flange[1], flange[2], 0.0, R, p)
        for r in range(3):
            for c in range(3):
                Tnew[4 * r + c] = (Tacc[4 * r] * R[c] + Tacc[4 * r + 1] * R[3 + c]
                                   + Tacc[4 * r + 2] * R[6 + c])
            Tnew[4 * r + 3] = (Tacc[4 * r] * p[0] + Tacc[4 * r + 1] * p[1]
                               + Tacc[4 * r + 2] * p[2] + Tacc[4 * r + 3])
        Tnew[12] = Tnew[13] = Tnew[14] = 0.0
        Tnew[15] = 1.0
        for r in range(16):
            Tacc[r] = Tnew[r]
        for r in range(4):
            for c in range(4):
                O[i, r, c] = Tacc[4 * r + c]
    return out


def mdh_fk(double[:, :] dh, double[:] flange, double[:] q):
    return np.asarray(mdh_frames(dh, flange, q))[-1]


def mdh_jac_geo(double[:, :] dh, double[:] flange, double[:] q):
    cdef int n = dh.shape[0]
    frames = mdh_frames(dh, flange, q)
    cdef double[:, :, :] F = frames
    out = np.zeros((6, n))
    cdef double[:, :] J = out
    cdef double px = F[n, 0, 3], py = F[n, 1, 3], pz = F[n, 2, 3]
    cdef double zx, zy, zz, rx, ry, rz
    cdef int i
    for i in range(n):
        zx = F[i, 0, 2]; zy = F[i, 1, 2]; zz = F[i, 2, 2]
        rx = px - F[i, 0, 3]; ry = py - F[i, 1, 3]; rz = pz - F[i, 2, 3]
        J[0, i] = zy * rz - zz * ry
        J[1, i] = zz * rx - zx * rz
        J[2, i] = zx * ry - zy * rx
        J[3, i] = zx
        J[4, i] = zy
        J[5, i] = zz
    return out


cdef void _rnea(int n, double[:, :] dh, double[:] flange,
                double[:] mass, double[:, :] com, double[:, :, :] inertia,
                double* q, double* qd, double* qdd,
                double* grav, double* fext, double* tau) nogil:
    cdef double Rs[MAXN][9]
    cdef double ps[MAXN][3]
    cdef double Fs[MAXN][3]
    cdef double Ns[MAXN][3]
    cdef double w[3]
    cdef double wd[3]
    cdef double vd[3]
    cdef double wi[3]
    cdef double t1[3]
    cdef double t2[3]
    cdef double t3[3]
    cdef double vc[3]
    cdef double Iw[3]
    cdef double Ic[9]
    cdef double f[3]
    cdef double nq[3]
    cdef double Rbn[9]
    cdef double Rtmp[9]
    cdef double Rf[9]
    cdef double pf[3]
    cdef int i, j, k

    for i in range(n):
        _mdh_rp(dh[i, 0], dh[i, 1], dh[i, 2], dh[i, 3] + q[i], Rs[i], ps[i])

    w[0] = w[1] = w[2] = 0.0
    wd[0] = wd[1] = wd[2] = 0.0
    vd[0] = -grav[0]; vd[1] = -grav[1]; vd[2] = -grav[2]

    for i in range(n):
        # frame-origin acceleration from parent values (before overwriting)
        _cross(wd, ps[i], t1)
        _cross(w, ps[i], t2)
        _cross(w, t2, t3)
        t1[0] += vd[0] + t3[0]
        t1[1] += vd[1] + t3[1]
        t1[2] += vd[2] + t3[2]
        _matTvec(Rs[i], t1, vc)
        vd[0] = vc[0]; vd[1] = vc[1]; vd[2] = vc[2]
        # angular velocity / acceleration
        _matTvec(Rs[i], w, wi)
        _matTvec(Rs[i], wd, t1)
        t2[0] = 0.0; t2[1] = 0.0; t2[2] = qd[i]
        _cross(wi, t2, t3)
        wd[0] = t1[0] + t3[0]
        wd[1] = t1[1] + t3[1]
        wd[2] = t1[2] + t3[2] + qdd[i]
        w[0] = wi[0]; w[1] = wi[1]; w[2] = wi[2] + qd[i]
        # link force/torque about CoM
        _cross(wd, &com[i, 0], t1)
        _cross(w, &com[i, 0], t2)
        _cross(w, t2, t3)
        vc[0] = vd[0] + t1[0] + t3[0]
        vc[1] = vd[1] + t1[1] + t3[1]
        vc[2] = vd[2] + t1[2] + t3[2]
        Fs[i][0] = mass[i] * vc[0]
        Fs[i][1] = mass[i] * vc[1]
        Fs[i][2] = mass[i] * vc[2]
        for j in range(3):
            for k in range(3):
                Ic[3 * j + k] = inertia[i, j, k]
        _matvec(Ic, wd, t1)
        _matvec(Ic, w, Iw)
        _cross(w, Iw, t2)
        Ns[i][0] = t1[0] + t2[0]
        Ns[i][1] = t1[1] + t2[1]
        Ns[i][2] = t1[2] + t2[2]

    f[0] = f[1] = f[2] = 0.0
    nq[0] = nq[1] = nq[2] = 0.0
    if fext != NULL:
        for j in range(9):
            Rbn[j] = 0.0
        Rbn[0] = Rbn[4] = Rbn[8] = 1.0
        for i in range(n):
            _matmul33(Rbn, Rs[i], Rtmp)
            for j in range(9):
                Rbn[j] = Rtmp[j]
        _mdh_rp(flange[0], flange[1], flange[2], 0.0, Rf, pf)
        t1[0] = fext[0]; t1[1] = fext[1]; t1[2] = fext[2]
        _matTvec(Rbn, t1, f)
        f[0] = -f[0]; f[1] = -f[1]; f[2] = -f[2]
        t1[0] = fext[3]; t1[1] = fext[4]; t1[2] = fext[5]
        _matTvec(Rbn, t1, t2)
        _cross(pf, f, t3)
        nq[0] = -t2[0] + t3[0]
        nq[1] = -t2[1] + t3[1]
        nq[2] = -t2[2] + t3[2]

    for i in range(n - 1, -1, -1):
        if i < n - 1:
            _matvec(Rs[i + 1], f, t1)              # R_{i+1} f_{i+1}
            _matvec(Rs[i + 1], nq, t2)             # R_{i+1} n_{i+1}
            _cross(&com[i, 0], Fs[i], t3)
            nq[0] = Ns[i][0] + t2[0] + t3[0]
            nq[1] = Ns[i][1] + t2[1] + t3[1]
            nq[2] = Ns[i][2] + t2[2] + t3[2]
            _cross(ps[i + 1], t1, t2)
            nq[0] += t2[0]; nq[1] += t2[1]; nq[2] += t2[2]
            f[0] = t1[0] + Fs[i][0]
            f[1] = t1[1] + Fs[i][1]
            f[2] = t1[2] + Fs[i][2]
        else:
            _cross(&com[i, 0], Fs[i], t3)
            nq[0] = Ns[i][0] + nq[0] + t3[0]
            nq[1] = Ns[i][1] + nq[1] + t3[1]
            nq[2] = Ns[i][2] + nq[2] + t3[2]
            f[0] = f[0] + Fs[i][0]
            f[1] = f[1] + Fs[i][1]
            f[2] = f[2] + Fs[i][2]
        tau[i] = nq[2]


def mdh_rnea(double[:, :] dh, double[:] flange, double[:] mass,
             double[:, :] com, double[:, :, :] inertia,
             double[:] q, double[:] qd, double[:] qdd, double[:] grav,
             fext=None):
    cdef int n = dh.shape[0]
    if n > MAXN:
        raise ValueError(f"chains longer than {MAXN} joints unsupported")
    out = np.empty(n)
    cdef double[:] tau = out
    cdef double fx[6]
    cdef double[:] fv
    cdef int i
    cdef double qb[MAXN]
    cdef double qdb[MAXN]
    cdef double qddb[MAXN]
    cdef double gb[3]
    for i in range(n):
        qb[i] = q[i]; qdb[i] = qd[i]; qddb[i] = qdd[i]
    for i in range(3):
        gb[i] = grav[i]
    if fext is None:
        _rnea(n, dh, flange, mass, com, inertia, qb, qdb, qddb, gb, NULL, &tau[0])
    else:
        fv = np.ascontiguousarray(fext, dtype=np.float64)
        for i in range(6):
            fx[i] = fv[i]
        _rnea(n, dh, flange, mass, com, inertia, qb, qdb, qddb, gb, fx, &tau[0])
    return out


def mdh_bias(double[:, :] dh, double[:] flange, double[:] mass,
             double[:, :] com, double[:, :, :] inertia,
             double[:] q, double[:] qd, double[:] grav):
    cdef int n = dh.shape[0]
    if n > MAXN:
        raise ValueError(f"chains longer than {MAXN} joints unsupported")
    out = np.empty(n)
    cdef double[:] tau = out
    cdef double qb[MAXN]
    cdef double qdb[MAXN]
    cdef double qddb[MAXN]
    cdef double gb[3]
    cdef int i
    for i in range(n):
        qb[i] = q[i]; qdb[i] = qd[i]; qddb[i] = 0.0
    for i in range(3):
        gb[i] = grav[i]
    _rnea(n, dh, flange, mass, com, inertia, qb, qdb, qddb, gb, NULL, &tau[0])
    return out


def mdh_mass(double[:, :] dh, double[:] flange, double[:] mass,
             double[:, :] com, double[:, :, :] inertia, double[:] q):
    cdef int n = dh.shape[0]
    if n > MAXN:
        raise ValueError(f"chains longer than {MAXN} joints unsupported")
    out = np.empty((n, n))
    cdef double[:, :] M = out
    cdef double col[MAXN]
    cdef double qb[MAXN]
    cdef double qdb[MAXN]
    cdef double qddb[MAXN]
    cdef double gb[3]
    cdef int i, j
    for i in range(n):
        qb[i] = q[i]; qdb[i] = 0.0; qddb[i] = 0.0
    gb[0] = gb[1] = gb[2] = 0.0
    for j in range(n):
        qddb[j] = 1.0
        _rnea(n, dh, flange, mass, com, inertia, qb, qdb, qddb, gb, NULL, col)
        for i in range(n):
            M[i, j] = col[i]
        qddb[j] = 0.0
    # symmetrize in place
    cdef double v
    for i in range(n):
        for j in range(i + 1, n):
            v = 0.5 * (M[i, j] + M[j, i])
            M[i, j] = v
            M[j, i] = v
    return out
