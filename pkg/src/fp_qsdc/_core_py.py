"""Pure-python (numpy) implementations of the hot numeric kernels.

The compiled extension ``fp_qsdc._core`` provides the same four functions;
:mod:`fp_qsdc.backend` picks whichever is available at import time.  Keep the
two implementations in lockstep: the backend parity tests compare them
elementwise.
"""

from __future__ import annotations

import numpy as np

AXIS_Z, AXIS_X, AXIS_Y = 0, 1, 2


def density_grid(i_nodes, theta_nodes, vt):
    """Joint intensity/polar density of the passive source on a tensor grid.

    Returns an array of shape ``(len(i_nodes), len(theta_nodes))``.
    """
    i = np.asarray(i_nodes, dtype=float)[:, None]
    th = np.asarray(theta_nodes, dtype=float)[None, :]
    x = i / (2.0 * vt)
    c2 = np.cos(0.5 * th) ** 2
    s2 = 1.0 - c2
    return 1.0 / (vt * np.pi ** 2 * np.sqrt(1.0 - x * c2) * np.sqrt(1.0 - x * s2))


def _weight(theta_nodes, phi_nodes, axis):
    th = np.asarray(theta_nodes, dtype=float)[:, None]
    ph = np.asarray(phi_nodes, dtype=float)[None, :]
    if axis == AXIS_Z:
        return np.cos(th) + 0.0 * ph
    if axis == AXIS_X:
        return np.sin(th) * np.cos(ph)
    if axis == AXIS_Y:
        return np.sin(th) * np.sin(ph)
    raise ValueError(f"unknown axis code {axis}")


def click_grid(i_nodes, theta_nodes, phi_nodes, axis, sign,
               eta_channel, eta_det, dark, e_d):
    """Pointwise gain Q and error-weighted gain E*Q on a tensor grid.

    ``axis``/``sign`` select the measured state: the squared projection onto
    the triggering detector is ``(1 + sign*w)/2`` with ``w`` the Bloch
    component along the measurement axis.  Output shape is
    ``(nI, nTheta, nPhi)``.
    """
    w = sign * _weight(theta_nodes, phi_nodes, axis)[None, :, :]
    c = np.asarray(i_nodes, dtype=float)[:, None, None] * (eta_channel * eta_det)
    omp = 1.0 - dark
    ek = np.exp(-c * (1.0 - w) * 0.5)   # survives the wrong-detector projection
    el = np.exp(-c * (1.0 + w) * 0.5)
    e0 = np.exp(-c)
    qk = omp * ek - omp * omp * e0
    ql = omp * el - omp * omp * e0
    return qk + ql, e_d * qk + (1.0 - e_d) * ql


def yield_grid(theta_nodes, phi_nodes, axis, sign, n,
               eta_channel, eta_det, dark, e_d):
    """Closed-form n-photon yield Y_n and error yield e_n*Y_n on a grid.

    Output shape is ``(nTheta, nPhi)``.  Intensity does not enter: these are
    per-photon-number quantities.
    """
    w = sign * _weight(theta_nodes, phi_nodes, axis)
    ee = eta_channel * eta_det
    omp = 1.0 - dark
    a = (1.0 - ee * (1.0 - w) * 0.5) ** n
    b = (1.0 - ee * (1.0 + w) * 0.5) ** n
    c = (1.0 - ee) ** n
    y = omp * a + omp * b - 2.0 * omp * omp * c
    ey = e_d * omp * a + (1.0 - e_d) * omp * b - omp * omp * c
    return y, ey


def herm_eig(a, tol=1e-14, max_sweeps=60):
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors in the columns.  Raises ``ArithmeticError`` if the off
    diagonal has not been annihilated after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=complex)
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError("matrix must be square")
    v = np.eye(m, dtype=complex)
    if m == 1:
        return a.real.ravel().copy(), v
    scale = max(float(np.abs(a).max()), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol * scale * m:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                r = abs(apq)
                if r <= tol * scale:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = (-1.0 if tau > 0 else 1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = t * cth
                # unitary columns: |p> -> c|p> + s*conj(phase)|q>,
                #                  |q> -> -s*phase|p> + c|q>
                gp = cth * a[:, p] + sth * np.conj(phase) * a[:, q]
                gq = -sth * phase * a[:, p] + cth * a[:, q]
                a[:, p], a[:, q] = gp, gq
                gp = cth * a[p, :] + sth * phase * a[q, :]
                gq = -sth * np.conj(phase) * a[p, :] + cth * a[q, :]
                a[p, :], a[q, :] = gp, gq
                gp = cth * v[:, p] + sth * np.conj(phase) * v[:, q]
                gq = -sth * phase * v[:, p] + cth * v[:, q]
                v[:, p], v[:, q] = gp, gq
    else:
        raise ArithmeticError(
            f"Jacobi sweep limit reached; residual off-diagonal norm {off:.3e}")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
