"""Statistics of the fully passive source.

The source interferes four phase-random coherent pulses; the surviving mode
carries a random intensity I and a random polarization (theta, phi) on the
Bloch sphere.  This module provides the joint density f(I, theta) restricted
to I <= 2vt, the post-selection intervals that slice (I, theta, phi) into
basis/state/intensity classes, interval probabilities and Poisson photon
number moments, and a brute-force phase sampler used as the cross-check
oracle for all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import backend
from .params import ConfigError, SourceParams
from .quadrature import QuadratureSpec, axis_nodes, refine_vector

TWO_PI = 2.0 * math.pi

#: State labels per basis; the first state of each pair sits at the positive
#: end of the measurement axis.
BASIS_STATES = {"Z": ("H", "V"), "X": ("D", "A"), "Y": ("R", "L")}

_PHI_CENTER = {"D": 0.0, "A": math.pi, "R": math.pi / 2, "L": 3 * math.pi / 2}

_AXIS_CODE = {"Z": backend.AXIS_Z, "X": backend.AXIS_X, "Y": backend.AXIS_Y}


def density(i, theta, vt: float):
    """Joint density f(I, theta) of the post-selected source output.

    Normalized on I in (0, 2vt], theta in [0, pi]; diverges like an inverse
    square root toward I = 2vt at theta = 0 or pi.  Raises ``ValueError``
    outside the support (callers clip their domains instead of relying on
    this).
    """
    i = np.asarray(i, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(i <= 0.0) or np.any(i > 2.0 * vt):
        raise ValueError("intensity outside the support (0, 2*vt]")
    if np.any(theta < 0.0) or np.any(theta > math.pi):
        raise ValueError("theta outside [0, pi]")
    x = i / (2.0 * vt)
    c2 = np.cos(theta / 2.0) ** 2
    rad = (1.0 - x * c2) * (1.0 - x * (1.0 - c2))
    if np.any(rad <= 0.0):
        raise ValueError("evaluation on the singular boundary")
    val = 1.0 / (vt * math.pi ** 2 * np.sqrt(rad))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class SelectionInterval:
    """A post-selection region in (I, theta, phi).

    ``state`` is ``None`` for the union of a basis' two states.  Angular
    ranges are lists of (lo, hi) pairs; phi ranges may extend below zero to
    express windows that straddle phi = 0.
    """

    basis: str
    state: str | None
    intensity_class: str
    theta_ranges: tuple[tuple[float, float], ...]
    phi_ranges: tuple[tuple[float, float], ...]
    i_range: tuple[float, float]

    @property
    def phi_measure(self) -> float:
        return sum(hi - lo for lo, hi in self.phi_ranges)

    @property
    def label(self) -> str:
        state = self.state if self.state is not None else "*"
        return f"S[{self.basis},{state}]^{self.intensity_class}"

    def contains(self, i, theta, phi):
        """Vectorized membership test (used by the sampling oracle)."""
        i = np.asarray(i)
        theta = np.asarray(theta)
        phi = np.asarray(phi)
        ilo, ihi = self.i_range
        ok = (i > ilo) & (i <= ihi)
        tok = np.zeros_like(ok)
        for lo, hi in self.theta_ranges:
            tok |= (theta >= lo) & (theta <= hi)
        pok = np.zeros_like(ok)
        for lo, hi in self.phi_ranges:
            width = hi - lo
            if width >= TWO_PI - 1e-12:
                pok |= True
            else:
                # distance to the window center, wrapped onto [0, pi]
                center = 0.5 * (lo + hi)
                d = np.abs(np.mod(phi - center + math.pi, TWO_PI) - math.pi)
                pok |= d <= width / 2.0
        return ok & tok & pok


def make_interval(src: SourceParams, basis: str, state: str | None,
                  intensity_class: str) -> SelectionInterval:
    """Build the standard post-selection interval for one basis/state/class."""
    if basis not in BASIS_STATES:
        raise ConfigError(f"unknown basis {basis!r}")
    states = BASIS_STATES[basis]
    if state is not None and state not in states:
        raise ConfigError(f"state {state!r} does not belong to basis {basis}")
    wanted = states if state is None else (state,)
    theta_ranges: list[tuple[float, float]] = []
    phi_ranges: list[tuple[float, float]] = []
    if basis == "Z":
        dz = src.delta_z
        for st in wanted:
            theta_ranges.append((0.0, dz) if st == "H" else (math.pi - dz, math.pi))
        phi_ranges.append((0.0, TWO_PI))
    else:
        dx = src.delta_x
        theta_ranges.append((math.pi / 2 - dx, math.pi / 2 + dx))
        for st in wanted:
            c = _PHI_CENTER[st]
            phi_ranges.append((c - dx, c + dx))
    return SelectionInterval(
        basis=basis,
        state=state,
        intensity_class=intensity_class,
        theta_ranges=tuple(theta_ranges),
        phi_ranges=tuple(phi_ranges),
        i_range=src.class_range(intensity_class),
    )


def full_domain(src: SourceParams) -> SelectionInterval:
    """The whole support, used for normalization checks."""
    return SelectionInterval(
        basis="Z", state=None, intensity_class="s",
        theta_ranges=((0.0, math.pi),),
        phi_ranges=((0.0, TWO_PI),),
        i_range=(0.0, 2.0 * src.vt_product),
    )


def _touches_upper_edge(i_range: tuple[float, float], vt: float) -> bool:
    return i_range[1] >= 2.0 * vt * (1.0 - 1e-12)


def f_mass_grid(src: SourceParams, i_range, theta_range, nodes: int):
    """Density grid with quadrature weights folded in.

    Returns ``(i_nodes, grid)`` where ``grid.sum()`` is the f-integral over
    the rectangle.  The intensity axis is desingularized when the range
    touches 2vt.
    """
    iv, wi = axis_nodes(nodes, *i_range,
                        singular_hi=_touches_upper_edge(i_range, src.vt_product))
    tv, wt = axis_nodes(nodes, *theta_range)
    grid = backend.density_grid(iv, tv, src.vt_product) * np.outer(wi, wt)
    return iv, grid


def interval_probability(interval: SelectionInterval, src: SourceParams,
                         spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Unconditional probability that an emission falls in the interval.

    The azimuth phi is uniform on the full circle, so the phi direction
    contributes its measure over 2 pi; the (I, theta) part is quadrature.
    """

    def estimate(nodes: int) -> np.ndarray:
        total = 0.0
        for tr in interval.theta_ranges:
            total += f_mass_grid(src, interval.i_range, tr, nodes)[1].sum()
        return np.array([total])

    mass = float(refine_vector(estimate, spec)[0])
    return mass * interval.phi_measure / TWO_PI


def poisson_moments(interval: SelectionInterval, src: SourceParams,
                    n_values: Sequence[int],
                    spec: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Interval averages of the Poisson weights exp(-I) I^n / n!.

    All requested orders are reduced on one shared grid together with the
    normalizing mass, so ratios (and their sum over n) stay consistent to
    machine precision.
    """
    n_values = list(n_values)
    log_fact = [math.lgamma(n + 1) for n in n_values]

    def estimate(nodes: int) -> np.ndarray:
        mass = 0.0
        sums = np.zeros(len(n_values))
        for tr in interval.theta_ranges:
            iv, grid = f_mass_grid(src, interval.i_range, tr, nodes)
            mass += grid.sum()
            marginal = grid.sum(axis=1)
            logi = np.log(iv)
            for k, n in enumerate(n_values):
                pois = np.exp(-iv + n * logi - log_fact[k])
                sums[k] += marginal @ pois
        return np.concatenate([[mass], sums])

    out = refine_vector(estimate, spec)
    return out[1:] / out[0]


def poisson_moment(interval: SelectionInterval, src: SourceParams, n: int,
                   spec: QuadratureSpec = QuadratureSpec()) -> float:
    if n < 0:
        raise ValueError("photon number must be >= 0")
    return float(poisson_moments(interval, src, [n], spec)[0])


@dataclass(frozen=True)
class BlochSample:
    """One emitted pulse: intensity, Bloch angles and the (unused) global phase."""

    i: float
    theta: float
    phi: float
    psi: float


class SampleBatch:
    """Column-wise batch of source samples from the phase-space oracle."""

    def __init__(self, i: np.ndarray, theta: np.ndarray, phi: np.ndarray,
                 psi: np.ndarray):
        self.i = i
        self.theta = theta
        self.phi = phi
        self.psi = psi

    def __len__(self) -> int:
        return self.i.size

    def __getitem__(self, idx: int) -> BlochSample:
        return BlochSample(float(self.i[idx]), float(self.theta[idx]),
                           float(self.phi[idx]), float(self.psi[idx]))

    def __iter__(self) -> Iterator[BlochSample]:
        for k in range(len(self)):
            yield self[k]


def phases_to_sample(alpha, beta, gamma, delta, vt: float):
    """Map the four interfering pulse phases to (I, theta, phi, psi).

    Sign flips of the interfered amplitudes move into the phases: a common
    flip shifts the global phase psi, a relative flip shifts phi by pi.
    The intensity may exceed 2vt here; the sampler rejects those draws.
    """
    c1 = np.cos((np.asarray(alpha) - beta) / 2.0)
    c2 = np.cos((np.asarray(gamma) - delta) / 2.0)
    intensity = 2.0 * vt * (c1 * c1 + c2 * c2)
    theta = 2.0 * np.arctan2(np.abs(c2), np.abs(c1))
    flip = (c1 < 0) != (c2 < 0)
    phi = np.mod((gamma + delta) / 2.0 - (alpha + beta) / 2.0
                 + math.pi * flip, TWO_PI)
    psi = np.mod((alpha + beta) / 2.0 + math.pi * (c1 < 0), TWO_PI)
    return intensity, theta, phi, psi


def sample_source(seed: int, count: int, src: SourceParams) -> SampleBatch:
    """Draw source emissions by simulating the four random pulse phases.

    This is the independent oracle for :func:`density` and
    :func:`interval_probability`: four phases are drawn uniformly, the
    interference output is computed exactly, and draws with intensity above
    2vt (exactly half of them on average, excluded by the density's
    convention) are rejected.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    vt = src.vt_product
    chunks_i, chunks_t, chunks_p, chunks_s = [], [], [], []
    have = 0
    while have < count:
        m = max(2048, int((count - have) * 2.2))
        alpha, beta, gamma, delta = rng.uniform(0.0, TWO_PI, size=(4, m))
        intensity, theta, phi, psi = phases_to_sample(alpha, beta, gamma,
                                                      delta, vt)
        keep = intensity <= 2.0 * vt
        chunks_i.append(intensity[keep])
        chunks_t.append(theta[keep])
        chunks_p.append(phi[keep])
        chunks_s.append(psi[keep])
        have += int(keep.sum())
    return SampleBatch(
        np.concatenate(chunks_i)[:count],
        np.concatenate(chunks_t)[:count],
        np.concatenate(chunks_p)[:count],
        np.concatenate(chunks_s)[:count],
    )


def mc_interval_probability(batch: SampleBatch,
                            interval: SelectionInterval) -> tuple[float, float]:
    """Monte-Carlo estimate (value, standard error) of a selection probability."""
    hits = interval.contains(batch.i, batch.theta, batch.phi)
    p = float(hits.mean())
    se = math.sqrt(max(p * (1.0 - p), 1e-300) / len(batch))
    return p, se
