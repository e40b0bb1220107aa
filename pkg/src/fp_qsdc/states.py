"""Post-selected n-photon density matrices and trace distances.

An n-photon emission in state (theta, phi) decomposes over the Fock basis
|m>_H |n-m>_V with coefficients set by powers of cos(theta/2), sin(theta/2)
and azimuthal phases exp(-i phi (m1-m2)).  Averaging over a post-selection
interval turns the angular randomness into a mixed state; the trace distance
between two intensity classes' states bounds how differently an eavesdropper
may treat them, which feeds the decoy linear programs.

Weighting convention: within a union of intervals each member is weighted by
its (I, theta) mass with the azimuth averaged conditionally over the member's
own phi window.  Scopes within one basis are insensitive to this choice; it
matters only for cross-basis unions, where it reproduces the printed one- and
two-photon results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import backend
from .params import SourceParams
from .quadrature import QuadratureSpec, axis_nodes, refine_vector
from .source import SelectionInterval, f_mass_grid, make_interval

CLASS_ORDER = ("d1", "d2", "s")


@dataclass(frozen=True)
class PhotonDensityMatrix:
    """Normalized n-photon state in the Fock basis {|m>_H |n-m>_V}."""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        m = self.entries
        if m.shape != (self.n + 1, self.n + 1):
            raise ValueError("entry matrix has wrong shape for photon number")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("density matrix is not normalized")

    def eigenvalues(self) -> np.ndarray:
        return backend.herm_eig(self.entries)[0]


def _norm_coef(n: int) -> np.ndarray:
    lf = [math.lgamma(k + 1) for k in range(n + 1)]
    out = np.empty((n + 1, n + 1))
    for m1 in range(n + 1):
        for m2 in range(n + 1):
            out[m1, m2] = math.exp(
                lf[n] - 0.5 * (lf[m1] + lf[n - m1] + lf[m2] + lf[n - m2]))
    return out


def _phi_window_integral(lo: float, hi: float, dm: int) -> complex:
    if dm == 0:
        return complex(hi - lo)
    if abs((hi - lo) - 2.0 * math.pi) < 1e-12:
        return 0.0 + 0.0j  # full circle kills every coherence exactly
    return (np.exp(-1j * dm * hi) - np.exp(-1j * dm * lo)) / (-1j * dm)


def _moment_layout(intervals, n_values):
    """Slices of the concatenated moment vector, one per (interval, theta range)."""
    layout = []
    offset = 0
    for k, interval in enumerate(intervals):
        for tr in interval.theta_ranges:
            width = sum(2 * n + 1 for n in n_values)
            layout.append((k, tr, offset, width))
            offset += width
    return layout, offset


def density_matrices(intervals: SelectionInterval | Sequence[SelectionInterval],
                     n_values: Sequence[int], src: SourceParams,
                     mode: str = "full",
                     spec: QuadratureSpec = QuadratureSpec()
                     ) -> list[PhotonDensityMatrix]:
    """Post-selected states for several photon numbers on one shared grid.

    ``mode`` is ``"full"`` (azimuthal coherences kept, integrated in closed
    form per phi window) or ``"paper_diagonal"`` (coherences dropped).
    """
    if mode not in ("full", "paper_diagonal"):
        raise ValueError(f"unknown mode {mode!r}")
    if isinstance(intervals, SelectionInterval):
        intervals = [intervals]
    n_values = list(n_values)
    if any(n < 0 for n in n_values):
        raise ValueError("photon numbers must be >= 0")
    layout, total = _moment_layout(intervals, n_values)

    def estimate(nodes: int) -> np.ndarray:
        out = np.empty(total)
        for k, tr, offset, _ in layout:
            interval = intervals[k]
            _, grid = f_mass_grid(src, interval.i_range, tr, nodes)
            tv, _ = axis_nodes(nodes, *tr)
            marg = grid.sum(axis=0)
            cs, sn = np.cos(tv / 2.0), np.sin(tv / 2.0)
            pos = offset
            for n in n_values:
                for a in range(2 * n + 1):
                    out[pos] = marg @ (cs ** a * sn ** (2 * n - a))
                    pos += 1
        return out

    moments = refine_vector(estimate, spec)
    results = []
    base = 0
    strides = {}
    for n in n_values:
        strides[n] = base
        base += 2 * n + 1
    for n in n_values:
        rho = np.zeros((n + 1, n + 1), dtype=complex)
        coef = _norm_coef(n)
        for k, tr, offset, _ in layout:
            interval = intervals[k]
            t_vec = moments[offset + strides[n]: offset + strides[n] + 2 * n + 1]
            phi_meas = interval.phi_measure
            for m1 in range(n + 1):
                for m2 in range(n + 1):
                    dm = m1 - m2
                    pf = sum(_phi_window_integral(lo, hi, dm)
                             for lo, hi in interval.phi_ranges) / phi_meas
                    if pf == 0:
                        continue
                    rho[m1, m2] += coef[m1, m2] * t_vec[m1 + m2] * pf
        if mode == "paper_diagonal":
            rho = np.diag(np.diag(rho))
        rho = 0.5 * (rho + rho.conj().T)  # scrub rounding asymmetry
        results.append(PhotonDensityMatrix(n=n, entries=rho / np.trace(rho).real))
    return results


def density_matrix(intervals, n: int, src: SourceParams, mode: str = "full",
                   spec: QuadratureSpec = QuadratureSpec()) -> PhotonDensityMatrix:
    """Post-selected n-photon state of one interval (or a union of them)."""
    return density_matrices(intervals, [n], src, mode, spec)[0]


def trace_distance(rho_a: PhotonDensityMatrix, rho_b: PhotonDensityMatrix) -> float:
    """Sum of absolute eigenvalues of the difference (twice the usual metric)."""
    if rho_a.n != rho_b.n:
        raise ValueError("photon numbers differ")
    w, _ = backend.herm_eig(rho_a.entries - rho_b.entries)
    return float(np.abs(w).sum())


@dataclass(frozen=True)
class TraceDistanceTable:
    """Distances between intensity classes, per photon number.

    ``scope`` is ``"union"`` for the basis' two-state union or a state label.
    """

    basis: str
    scope: str
    values: dict[tuple[int, str, str], float]

    def get(self, n: int, class_i: str, class_j: str) -> float:
        if class_i == class_j:
            return 0.0
        key = (n, class_i, class_j)
        if key in self.values:
            return self.values[key]
        return self.values[(n, class_j, class_i)]


def distance_table(basis: str, scope: str, src: SourceParams,
                   n_values: Sequence[int], mode: str = "full",
                   spec: QuadratureSpec = QuadratureSpec()) -> TraceDistanceTable:
    """Pairwise class distances for one basis at the requested photon numbers."""
    state = None if scope == "union" else scope
    per_class = {
        c: density_matrices(make_interval(src, basis, state, c), n_values,
                            src, mode, spec)
        for c in CLASS_ORDER
    }
    values = {}
    for pos, n in enumerate(n_values):
        for a in range(len(CLASS_ORDER)):
            for b in range(a + 1, len(CLASS_ORDER)):
                ca, cb = CLASS_ORDER[a], CLASS_ORDER[b]
                values[(n, ca, cb)] = trace_distance(per_class[ca][pos],
                                                     per_class[cb][pos])
    return TraceDistanceTable(basis=basis, scope=scope, values=values)


def _all_basis_union(src: SourceParams) -> list[SelectionInterval]:
    """Signal-state union over the three bases with the full intensity range."""
    out = []
    for basis in ("Z", "X", "Y"):
        iv = make_interval(src, basis, None, "s")
        out.append(replace(iv, i_range=(0.0, src.intensity_max)))
    return out


def single_photon_union(src: SourceParams, mode: str = "full",
                        spec: QuadratureSpec = QuadratureSpec()
                        ) -> PhotonDensityMatrix:
    """One-photon state over all three bases; maximally mixed by symmetry."""
    return density_matrix(_all_basis_union(src), 1, src, mode, spec)


def two_photon_matrix(src: SourceParams, mode: str = "full",
                      spec: QuadratureSpec = QuadratureSpec()
                      ) -> PhotonDensityMatrix:
    """Two-photon state over all three bases (the symmetric-interval setting)."""
    return density_matrix(_all_basis_union(src), 2, src, mode, spec)
