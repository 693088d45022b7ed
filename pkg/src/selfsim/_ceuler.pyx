# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Euler kernels; same interface as ``selfsim._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt

from selfsim.errors import DomainError

cnp.import_array()

BACKEND = "cython"


cdef struct Thermo:
    double rho, m, n, en, kin, e, p


cdef int _thermo(double rho, double m, double n, double en, double gamma,
                 Thermo* t) noexcept nogil:
    if not rho > 0.0:
        return 1
    t.rho = rho
    t.m = m
    t.n = n
    t.en = en
    t.kin = 0.5 * (m * m + n * n) / rho
    t.e = (en - t.kin) / rho
    if not t.e > 0.0:
        return 2
    t.p = (gamma - 1.0) * rho * t.e
    return 0


cdef inline void _raise(int code, double rho, double en) except *:
    if code == 1:
        raise DomainError(f"nonpositive density {rho!r}")
    raise DomainError("nonpositive internal energy")


cdef int _thermo_u(object u, double gamma, Thermo* t) except -1:
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef int code = _thermo(uv[0], uv[1], uv[2], uv[3], gamma, t)
    if code:
        _raise(code, uv[0], uv[3])
    return 0


cdef void _flux(Thermo* t, int axis, double* out) noexcept nogil:
    if axis == 0:
        out[0] = t.m
        out[1] = t.m * t.m / t.rho + t.p
        out[2] = t.m * t.n / t.rho
        out[3] = t.m * (t.en + t.p) / t.rho
    else:
        out[0] = t.n
        out[1] = t.m * t.n / t.rho
        out[2] = t.n * t.n / t.rho + t.p
        out[3] = t.n * (t.en + t.p) / t.rho


cdef void _jac(Thermo* t, double gamma, double* ax, double* ay) noexcept nogil:
    # ax, ay: row-major 4x4 buffers
    cdef double rho = t.rho, m = t.m, n = t.n, p = t.p, e = t.e
    cdef double c2 = gamma * p / rho
    cdef double temp = p / rho
    cdef double p_s = (gamma - 1.0) * p
    cdef double q2 = m * m + n * n
    cdef double r1 = 1.0 / rho
    cdef double r2 = r1 * r1
    cdef double r3 = r2 * r1
    cdef double h = e + p * r1
    cdef double fx[16]
    cdef double fy[16]
    cdef double su[4]
    cdef int i, j
    fx[0] = 0.0; fx[1] = 1.0; fx[2] = 0.0; fx[3] = 0.0
    fx[4] = -m * m * r2 + c2; fx[5] = 2.0 * m * r1; fx[6] = 0.0; fx[7] = p_s
    fx[8] = -m * n * r2; fx[9] = n * r1; fx[10] = m * r1; fx[11] = 0.0
    fx[12] = -m * q2 * r3 + m * c2 * r1
    fx[13] = 1.5 * m * m * r2 + 0.5 * n * n * r2 + h
    fx[14] = m * n * r2
    fx[15] = m * temp + m * p_s * r1
    fy[0] = 0.0; fy[1] = 0.0; fy[2] = 1.0; fy[3] = 0.0
    fy[4] = -m * n * r2; fy[5] = n * r1; fy[6] = m * r1; fy[7] = 0.0
    fy[8] = -n * n * r2 + c2; fy[9] = 0.0; fy[10] = 2.0 * n * r1; fy[11] = p_s
    fy[12] = -n * q2 * r3 + n * c2 * r1
    fy[13] = m * n * r2
    fy[14] = 1.5 * n * n * r2 + 0.5 * m * m * r2 + h
    fy[15] = n * temp + n * p_s * r1
    su[0] = 0.5 * q2 * r2 / p - gamma / ((gamma - 1.0) * rho)
    su[1] = -m * r1 / p
    su[2] = -n * r1 / p
    su[3] = 1.0 / p
    for i in range(4):
        for j in range(3):
            ax[4 * i + j] = fx[4 * i + j] + fx[4 * i + 3] * su[j]
            ay[4 * i + j] = fy[4 * i + j] + fy[4 * i + 3] * su[j]
        ax[4 * i + 3] = fx[4 * i + 3] * su[3]
        ay[4 * i + 3] = fy[4 * i + 3] * su[3]


def flux(u, double gamma, int axis):
    cdef Thermo t
    _thermo_u(u, gamma, &t)
    out = np.empty(4)
    cdef double[::1] ov = out
    _flux(&t, axis, &ov[0])
    return out


def jacobians(u, double gamma):
    cdef Thermo t
    _thermo_u(u, gamma, &t)
    ax = np.empty((4, 4))
    ay = np.empty((4, 4))
    cdef double[:, ::1] axv = ax
    cdef double[:, ::1] ayv = ay
    _jac(&t, gamma, &axv[0, 0], &ayv[0, 0])
    return ax, ay


cdef inline double _entropy_s(Thermo* t, double gamma) noexcept nogil:
    return log(t.p / t.rho ** gamma) / (gamma - 1.0)


def entropy(u, double gamma):
    cdef Thermo t
    _thermo_u(u, gamma, &t)
    cdef double s = _entropy_s(&t, gamma)
    return -t.rho * s, -t.m * s, -t.n * s


def entropy_grad(u, double gamma):
    cdef Thermo t
    _thermo_u(u, gamma, &t)
    cdef double s = _entropy_s(&t, gamma)
    out = np.empty(4)
    cdef double[::1] ov = out
    ov[0] = gamma / (gamma - 1.0) - s - t.kin / t.p
    ov[1] = t.m / t.p
    ov[2] = t.n / t.p
    ov[3] = -t.rho / t.p
    return out


def entropy_hess(u, double gamma):
    cdef Thermo t
    _thermo_u(u, gamma, &t)
    cdef double g1 = gamma - 1.0
    cdef double p = t.p, rho = t.rho, kin = t.kin, m = t.m, n = t.n
    cdef double pu[4]
    cdef double ku[4]
    cdef double su[4]
    cdef int j
    pu[0] = g1 * kin / rho; pu[1] = -g1 * m / rho; pu[2] = -g1 * n / rho; pu[3] = g1
    ku[0] = -kin / rho; ku[1] = m / rho; ku[2] = n / rho; ku[3] = 0.0
    for j in range(4):
        su[j] = pu[j] / (g1 * p)
    su[0] -= gamma / (g1 * rho)
    out = np.empty((4, 4))
    cdef double[:, ::1] h = out
    cdef double ip2 = 1.0 / (p * p)
    for j in range(4):
        h[0, j] = -su[j] - ku[j] / p + kin * pu[j] * ip2
        h[1, j] = -m * pu[j] * ip2
        h[2, j] = -n * pu[j] * ip2
        h[3, j] = rho * pu[j] * ip2
    h[1, 1] += 1.0 / p
    h[2, 2] += 1.0 / p
    h[3, 0] -= 1.0 / p
    return out


def flux_batch(us, double gamma, int axis):
    cdef double[:, ::1] uv = np.ascontiguousarray(us, dtype=np.float64)
    cdef Py_ssize_t k, nrow = uv.shape[0]
    out = np.empty((nrow, 4))
    cdef double[:, ::1] ov = out
    cdef Thermo t
    cdef int code
    for k in range(nrow):
        code = _thermo(uv[k, 0], uv[k, 1], uv[k, 2], uv[k, 3], gamma, &t)
        if code:
            _raise(code, uv[k, 0], uv[k, 3])
        _flux(&t, axis, &ov[k, 0])
    return out


def jacobians_batch(us, double gamma):
    cdef double[:, ::1] uv = np.ascontiguousarray(us, dtype=np.float64)
    cdef Py_ssize_t k, nrow = uv.shape[0]
    ax = np.empty((nrow, 4, 4))
    ay = np.empty((nrow, 4, 4))
    cdef double[:, :, ::1] axv = ax
    cdef double[:, :, ::1] ayv = ay
    cdef Thermo t
    cdef int code
    for k in range(nrow):
        code = _thermo(uv[k, 0], uv[k, 1], uv[k, 2], uv[k, 3], gamma, &t)
        if code:
            _raise(code, uv[k, 0], uv[k, 3])
        _jac(&t, gamma, &axv[k, 0, 0], &ayv[k, 0, 0])
    return ax, ay


def entropy_batch(us, double gamma):
    cdef double[:, ::1] uv = np.ascontiguousarray(us, dtype=np.float64)
    cdef Py_ssize_t k, nrow = uv.shape[0]
    out = np.empty((nrow, 3))
    cdef double[:, ::1] ov = out
    cdef Thermo t
    cdef int code
    cdef double s
    for k in range(nrow):
        code = _thermo(uv[k, 0], uv[k, 1], uv[k, 2], uv[k, 3], gamma, &t)
        if code:
            _raise(code, uv[k, 0], uv[k, 3])
        s = _entropy_s(&t, gamma)
        ov[k, 0] = -t.rho * s
        ov[k, 1] = -t.m * s
        ov[k, 2] = -t.n * s
    return out


# -- wave vector fields ------------------------------------------------------

cdef int _lambdas(Thermo* t, double gamma, double* lam) noexcept nogil:
    cdef double rc = sqrt(gamma * t.p * t.rho)
    cdef double disc = t.m * t.m + t.n * t.n - rc * rc
    if not disc > 0.0:
        return 3
    cdef double root = sqrt(disc)
    cdef double den = t.m * t.m - rc * rc
    cdef double a = (t.m * t.n - rc * root) / den
    cdef double b = (t.m * t.n + rc * root) / den
    lam[0] = a if a < b else b
    lam[1] = t.n / t.m
    lam[2] = b if a < b else a
    return 0


cdef int _lu4(double* a, int* piv) noexcept nogil:
    # in-place LU with partial pivoting of a row-major 4x4 matrix
    cdef int i, j, k, best
    cdef double big, tmp
    for k in range(4):
        best = k
        big = fabs(a[4 * k + k])
        for i in range(k + 1, 4):
            if fabs(a[4 * i + k]) > big:
                big = fabs(a[4 * i + k])
                best = i
        if big == 0.0:
            return 4
        piv[k] = best
        if best != k:
            for j in range(4):
                tmp = a[4 * k + j]
                a[4 * k + j] = a[4 * best + j]
                a[4 * best + j] = tmp
        for i in range(k + 1, 4):
            a[4 * i + k] /= a[4 * k + k]
            for j in range(k + 1, 4):
                a[4 * i + j] -= a[4 * i + k] * a[4 * k + j]
    return 0


cdef void _lusolve4(double* lu, int* piv, double* b) noexcept nogil:
    cdef int i, j
    cdef double tmp
    for i in range(4):
        if piv[i] != i:
            tmp = b[i]
            b[i] = b[piv[i]]
            b[piv[i]] = tmp
    for i in range(4):
        for j in range(i):
            b[i] -= lu[4 * i + j] * b[j]
    for i in range(3, -1, -1):
        for j in range(i + 1, 4):
            b[i] -= lu[4 * i + j] * b[j]
        b[i] /= lu[4 * i + i]


cdef int _projected(double* u, double gamma, int alpha, double* ref, int p,
                    double* z, double* ax) noexcept nogil:
    # z (4 x p, column-major) = P_G^alpha (f_U^x)^{-1} ref, ref column-major 4 x p
    cdef Thermo t
    cdef double ay[16]
    cdef double lu[16]
    cdef double g[16]
    cdef double col[4]
    cdef double tmp[4]
    cdef double lam[3]
    cdef int piv[4]
    cdef int i, j, k, c, beta, code
    code = _thermo(u[0], u[1], u[2], u[3], gamma, &t)
    if code:
        return code
    code = _lambdas(&t, gamma, lam)
    if code:
        return code
    _jac(&t, gamma, ax, ay)
    for i in range(16):
        lu[i] = ax[i]
    code = _lu4(lu, piv)
    if code:
        return code
    for j in range(4):
        for i in range(4):
            col[i] = ay[4 * i + j]
        _lusolve4(lu, piv, col)
        for i in range(4):
            g[4 * i + j] = col[i]
    for c in range(p):
        for i in range(4):
            col[i] = ref[4 * c + i]
        _lusolve4(lu, piv, col)
        for beta in range(3):
            if beta == alpha:
                continue
            for i in range(4):
                tmp[i] = 0.0
                for k in range(4):
                    tmp[i] += g[4 * i + k] * col[k]
            for i in range(4):
                col[i] = (tmp[i] - lam[beta] * col[i]) / (lam[alpha] - lam[beta])
        for i in range(4):
            z[4 * c + i] = col[i]
    return 0


cdef _fail(int code):
    if code == 1:
        raise DomainError("nonpositive density")
    if code == 2:
        raise DomainError("nonpositive internal energy")
    if code == 3:
        raise DomainError("state is not supersonic")
    raise DomainError("singular flux Jacobian")


def lambdas(u, double gamma):
    cdef Thermo t
    cdef double lam[3]
    _thermo_u(u, gamma, &t)
    cdef int code = _lambdas(&t, gamma, lam)
    if code:
        _fail(code)
    return (lam[0], lam[1], lam[2])


def gnl_field(u, double gamma, int alpha, ref, lbar):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(ref, dtype=np.float64).reshape(-1)
    cdef double[::1] lv = np.ascontiguousarray(lbar, dtype=np.float64)
    cdef double z[4]
    cdef double ax[16]
    cdef int i, j
    cdef int code = _projected(&uv[0], gamma, alpha, &rv[0], 1, z, ax)
    if code:
        _fail(code)
    cdef double s = 0.0
    for i in range(4):
        for j in range(4):
            s += lv[i] * ax[4 * i + j] * z[j]
    out = np.empty(4)
    cdef double[::1] ov = out
    for i in range(4):
        ov[i] = z[i] / s
    return out


def leaf_field(u, double gamma, int alpha, ref, rows, int leg, double max_inv_norm):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    # column-major copy of the 4 x 2 reference frame
    cdef double[::1] rv = np.ascontiguousarray(np.asarray(ref, dtype=np.float64).T).reshape(-1)
    cdef double[:, ::1] lv = np.ascontiguousarray(rows, dtype=np.float64)
    if lv.shape[0] != 2 or rv.shape[0] != 8:
        raise ValueError("compiled leaf field supports two-dimensional leaves only")
    cdef double z[8]
    cdef double ax[16]
    cdef double axz[8]
    cdef double mat[4]
    cdef int i, j, k, c
    cdef int code = _projected(&uv[0], gamma, alpha, &rv[0], 2, z, ax)
    if code:
        _fail(code)
    for c in range(2):
        for i in range(4):
            axz[4 * c + i] = 0.0
            for k in range(4):
                axz[4 * c + i] += ax[4 * i + k] * z[4 * c + k]
    for i in range(2):
        for c in range(2):
            mat[2 * i + c] = 0.0
            for k in range(4):
                mat[2 * i + c] += lv[i, k] * axz[4 * c + k]
    cdef double det = mat[0] * mat[3] - mat[1] * mat[2]
    if det == 0.0:
        from selfsim.errors import FrameError
        raise FrameError("leaf chart degenerated: singular frame")
    cdef double i00 = mat[3] / det, i01 = -mat[1] / det
    cdef double i10 = -mat[2] / det, i11 = mat[0] / det
    if sqrt(i00 * i00 + i01 * i01 + i10 * i10 + i11 * i11) > max_inv_norm:
        from selfsim.errors import FrameError
        raise FrameError("leaf chart degenerated: eigenspace nearly orthogonal to the base rows")
    cdef double w0 = i00 if leg == 0 else i01
    cdef double w1 = i10 if leg == 0 else i11
    out = np.empty(4)
    cdef double[::1] ov = out
    for i in range(4):
        ov[i] = z[i] * w0 + z[4 + i] * w1
    return out
