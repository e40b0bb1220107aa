# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: density grids, click statistics, yields, Jacobi eigen.

Mirrors fp_qsdc._core_py function for function; keep formulas in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, pow, sin, sqrt

cnp.import_array()

AXIS_Z, AXIS_X, AXIS_Y = 0, 1, 2

cdef double PI = 3.141592653589793238462643383279502884


def density_grid(i_nodes, theta_nodes, double vt):
    """Joint intensity/polar density of the passive source on a tensor grid."""
    cdef double[::1] iv = np.ascontiguousarray(i_nodes, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_nodes, dtype=np.float64)
    cdef Py_ssize_t ni = iv.shape[0], nt = tv.shape[0]
    out = np.empty((ni, nt))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t a, b
    cdef double x, c, c2, pref = vt * PI * PI
    for a in range(ni):
        x = iv[a] / (2.0 * vt)
        for b in range(nt):
            c = cos(0.5 * tv[b])
            c2 = c * c
            o[a, b] = 1.0 / (pref * sqrt(1.0 - x * c2) * sqrt(1.0 - x * (1.0 - c2)))
    return out


cdef inline double _bloch_component(double theta, double phi, int axis) nogil:
    if axis == 0:
        return cos(theta)
    if axis == 1:
        return sin(theta) * cos(phi)
    return sin(theta) * sin(phi)


def click_grid(i_nodes, theta_nodes, phi_nodes, int axis, double sign,
               double eta_channel, double eta_det, double dark, double e_d):
    """Pointwise gain Q and error-weighted gain E*Q on a tensor grid."""
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis code {axis}")
    cdef double[::1] iv = np.ascontiguousarray(i_nodes, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_nodes, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(phi_nodes, dtype=np.float64)
    cdef Py_ssize_t ni = iv.shape[0], nt = tv.shape[0], np_ = pv.shape[0]
    q_out = np.empty((ni, nt, np_))
    eq_out = np.empty((ni, nt, np_))
    cdef double[:, :, ::1] q = q_out
    cdef double[:, :, ::1] eq = eq_out
    cdef Py_ssize_t a, b, g
    cdef double w, cc, ek, el, e0, qk, ql
    cdef double omp = 1.0 - dark
    cdef double eta = eta_channel * eta_det
    with nogil:
        for b in range(nt):
            for g in range(np_):
                w = sign * _bloch_component(tv[b], pv[g], axis)
                for a in range(ni):
                    cc = iv[a] * eta
                    ek = exp(-cc * (1.0 - w) * 0.5)
                    el = exp(-cc * (1.0 + w) * 0.5)
                    e0 = exp(-cc)
                    qk = omp * ek - omp * omp * e0
                    ql = omp * el - omp * omp * e0
                    q[a, b, g] = qk + ql
                    eq[a, b, g] = e_d * qk + (1.0 - e_d) * ql
    return q_out, eq_out


def yield_grid(theta_nodes, phi_nodes, int axis, double sign, int n,
               double eta_channel, double eta_det, double dark, double e_d):
    """Closed-form n-photon yield Y_n and error yield e_n*Y_n on a grid."""
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis code {axis}")
    cdef double[::1] tv = np.ascontiguousarray(theta_nodes, dtype=np.float64)
    cdef double[::1] pv = np.ascontiguousarray(phi_nodes, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0], np_ = pv.shape[0]
    y_out = np.empty((nt, np_))
    ey_out = np.empty((nt, np_))
    cdef double[:, ::1] y = y_out
    cdef double[:, ::1] ey = ey_out
    cdef Py_ssize_t b, g
    cdef double w, pa, pb, pc
    cdef double omp = 1.0 - dark
    cdef double ee = eta_channel * eta_det
    cdef double base = pow(1.0 - ee, n)
    with nogil:
        for b in range(nt):
            for g in range(np_):
                w = sign * _bloch_component(tv[b], pv[g], axis)
                pa = pow(1.0 - ee * (1.0 - w) * 0.5, n)
                pb = pow(1.0 - ee * (1.0 + w) * 0.5, n)
                pc = base
                y[b, g] = omp * pa + omp * pb - 2.0 * omp * omp * pc
                ey[b, g] = e_d * omp * pa + (1.0 - e_d) * omp * pb - omp * omp * pc
    return y_out, ey_out


def herm_eig(a, double tol=1e-14, int max_sweeps=60):
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi."""
    a_arr = np.array(a, dtype=np.complex128, order="C")
    cdef Py_ssize_t m = a_arr.shape[0]
    if a_arr.ndim != 2 or a_arr.shape[1] != m:
        raise ValueError("matrix must be square")
    v_arr = np.eye(m, dtype=np.complex128)
    if m == 1:
        return a_arr.real.ravel().copy(), v_arr
    cdef double complex[:, ::1] A = a_arr
    cdef double complex[:, ::1] V = v_arr
    cdef Py_ssize_t p, q, k, sweep
    cdef double scale = 1e-300, off, r, tau, t, cth, sth, app, aqq
    cdef double complex apq, phase, gp, gq
    cdef bint converged = 0
    for p in range(m):
        for q in range(m):
            if fabs(A[p, q].real) > scale:
                scale = fabs(A[p, q].real)
            if fabs(A[p, q].imag) > scale:
                scale = fabs(A[p, q].imag)
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(m):
            for q in range(m):
                if p != q:
                    off += (A[p, q].real * A[p, q].real
                            + A[p, q].imag * A[p, q].imag)
        off = sqrt(off)
        if off <= tol * scale * m:
            converged = 1
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = A[p, q]
                r = sqrt(apq.real * apq.real + apq.imag * apq.imag)
                if r <= tol * scale:
                    continue
                phase = apq / r
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                elif tau > 0:
                    t = -1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (-tau + sqrt(1.0 + tau * tau))
                cth = 1.0 / sqrt(1.0 + t * t)
                sth = t * cth
                for k in range(m):
                    gp = cth * A[k, p] + sth * phase.conjugate() * A[k, q]
                    gq = -sth * phase * A[k, p] + cth * A[k, q]
                    A[k, p] = gp
                    A[k, q] = gq
                for k in range(m):
                    gp = cth * A[p, k] + sth * phase * A[q, k]
                    gq = -sth * phase.conjugate() * A[p, k] + cth * A[q, k]
                    A[p, k] = gp
                    A[q, k] = gq
                for k in range(m):
                    gp = cth * V[k, p] + sth * phase.conjugate() * V[k, q]
                    gq = -sth * phase * V[k, p] + cth * V[k, q]
                    V[k, p] = gp
                    V[k, q] = gq
    if not converged:
        raise ArithmeticError(
            f"Jacobi sweep limit reached; residual off-diagonal norm {off:.3e}")
    w = np.diag(a_arr).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v_arr[:, order]
