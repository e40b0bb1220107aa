"""Detector click statistics and interval-averaged gains and error rates.

Both measuring parties use a two-detector threshold setup: a pulse of
intensity I reaches the measurement with efficiency eta_channel, splits onto
the two detectors according to the squared projections of its polarization
onto the measurement basis, and each detector fires independently with
efficiency eta_det plus a dark count floor.  Misalignment flips the outcome
label with probability e_d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .params import ChannelSpec, SystemParams
from .quadrature import QuadratureSpec, axis_nodes, refine_vector
from .source import SelectionInterval, SourceParams, f_mass_grid

_AXIS_CODE = {"Z": backend.AXIS_Z, "X": backend.AXIS_X, "Y": backend.AXIS_Y}
_STATE_SIGN = {"H": 1.0, "V": -1.0, "D": 1.0, "A": -1.0, "R": 1.0, "L": -1.0}


@dataclass(frozen=True)
class ClickModel:
    """Detection parameters for one transmission round."""

    eta_channel: float
    eta_det: float
    dark_count: float
    misalignment: float

    @classmethod
    def for_round(cls, system: SystemParams, channel: ChannelSpec) -> "ClickModel":
        """Bind the detector of whoever measures in this round.

        Alice measures the first round (BA), Bob the return round (BAB);
        they differ only in the misalignment figure.
        """
        e_d = system.err_opt_a if channel.round_tag == "BA" else system.err_opt_b
        return cls(eta_channel=channel.efficiency, eta_det=system.eta_det,
                   dark_count=system.dark_count, misalignment=e_d)


@dataclass(frozen=True)
class IntervalStats:
    """Aggregates of one post-selection interval for one round."""

    p_select: float
    q_gain: float
    e_rate: float
    eq_product: float
    poisson: np.ndarray  # <P_I(n)> for n = 0..n_cut


def click_prob_state(n: int, f2_k: float, f2_l: float,
                     model: ClickModel) -> tuple[float, float]:
    """Probability that n arriving photons trigger detector k (resp. l).

    ``f2_k``/``f2_l`` are the squared projections of the state onto the two
    detector modes and must sum to one.
    """
    if n < 0:
        raise ValueError("photon number must be >= 0")
    if abs(f2_k + f2_l - 1.0) > 1e-12:
        raise ValueError("squared projections must sum to 1")
    omp = 1.0 - model.dark_count
    e = model.eta_det
    p_k = omp * (1.0 - f2_l * e) ** n - omp * omp * (1.0 - e) ** n
    p_l = omp * (1.0 - f2_k * e) ** n - omp * omp * (1.0 - e) ** n
    return p_k, p_l


def gain_error_pointwise(i: float, theta: float, phi: float, basis: str,
                         state: str, model: ClickModel) -> tuple[float, float]:
    """Gain Q and error rate E for a fixed emitted state.

    The basis fixes which Bloch component feeds the detector split
    (Z: cos(theta), X: sin(theta)cos(phi), Y: sin(theta)sin(phi)); the state
    picks the detector counted as correct.
    """
    q, eq = backend.click_grid(
        np.array([i]), np.array([theta]), np.array([phi]),
        _AXIS_CODE[basis], _STATE_SIGN[state],
        model.eta_channel, model.eta_det, model.dark_count, model.misalignment)
    q = float(q[0, 0, 0])
    eq = float(eq[0, 0, 0])
    return q, eq / q


def _subregions(interval: SelectionInterval):
    """Yield (theta_range, phi_range, state_sign) rectangles of an interval.

    For basis unions each sub-range belongs to one of the two states, whose
    sign orients the error-rate convention toward that state's detector.
    """
    if interval.state is not None:
        sign = _STATE_SIGN[interval.state]
        for tr in interval.theta_ranges:
            for pr in interval.phi_ranges:
                yield tr, pr, sign
    elif interval.basis == "Z":
        for tr, sign in zip(interval.theta_ranges, (1.0, -1.0)):
            for pr in interval.phi_ranges:
                yield tr, pr, sign
    else:
        for pr, sign in zip(interval.phi_ranges, (1.0, -1.0)):
            for tr in interval.theta_ranges:
                yield tr, pr, sign


def interval_stats(interval: SelectionInterval, src: SourceParams,
                   model: ClickModel, n_cut: int,
                   spec: QuadratureSpec = QuadratureSpec()) -> IntervalStats:
    """Interval averages <Q>, <E>, <EQ> and <P_I(n)> for one round.

    All quantities are reduced on one shared tensor grid (I x theta x phi per
    sub-rectangle) so that normalizations cancel exactly.  The phi direction
    uses half the node budget; for the Z basis the integrands are
    phi-independent and a single node stands in for the full circle.
    """
    axis = _AXIS_CODE[interval.basis]
    log_fact = [math.lgamma(n + 1) for n in range(n_cut + 1)]

    def estimate(nodes: int) -> np.ndarray:
        n_phi = max(8, nodes // 2)
        mass = 0.0
        acc = np.zeros(3)  # Q, E, EQ sums
        pois_acc = np.zeros(n_cut + 1)
        for (tlo, thi), (plo, phi_hi), sign in _subregions(interval):
            iv, grid = f_mass_grid(src, interval.i_range, (tlo, thi), nodes)
            tv, _ = axis_nodes(nodes, tlo, thi)
            if interval.basis == "Z":
                pv = np.zeros(1)
                pw = np.ones(1)
            else:
                pv, pw = axis_nodes(n_phi, plo, phi_hi)
            q, eq = backend.click_grid(
                iv, tv, pv, axis, sign,
                model.eta_channel, model.eta_det, model.dark_count,
                model.misalignment)
            w3 = grid[:, :, None] * pw[None, None, :]
            pmass = pw.sum()
            mass += grid.sum() * pmass
            acc[0] += float((q * w3).sum())
            acc[1] += float((eq / q * w3).sum())
            acc[2] += float((eq * w3).sum())
            marginal = grid.sum(axis=1) * pmass
            logi = np.log(iv)
            for n in range(n_cut + 1):
                pois_acc[n] += marginal @ np.exp(-iv + n * logi - log_fact[n])
        return np.concatenate([[mass], acc, pois_acc])

    out = refine_vector(estimate, spec)
    mass = out[0]
    # Unconditional selection probability.  For X/Y the accumulated mass
    # carries the raw phi measure, so one division by the full circle remains;
    # for Z the single phi node stands for the phi average already.
    if interval.basis == "Z":
        p_select = mass * interval.phi_measure / (2.0 * math.pi)
    else:
        p_select = mass / (2.0 * math.pi)
    return IntervalStats(
        p_select=float(p_select),
        q_gain=float(out[1] / mass),
        e_rate=float(out[2] / mass),
        eq_product=float(out[3] / mass),
        poisson=out[4:] / mass,
    )


def theoretical_yields(interval: SelectionInterval, src: SourceParams,
                       model: ClickModel, n: int,
                       spec: QuadratureSpec = QuadratureSpec()
                       ) -> tuple[float, float]:
    """Closed-form interval averages <Y_n> and <e_n Y_n>.

    These never enter the security bound; they serve as the feasibility
    oracle for the decoy linear programs.
    """
    axis = _AXIS_CODE[interval.basis]

    def estimate(nodes: int) -> np.ndarray:
        n_phi = max(8, nodes // 2)
        mass = 0.0
        ysum = 0.0
        eysum = 0.0
        for (tlo, thi), (plo, phi_hi), sign in _subregions(interval):
            _, grid = f_mass_grid(src, interval.i_range, (tlo, thi), nodes)
            tv, _ = axis_nodes(nodes, tlo, thi)
            if interval.basis == "Z":
                pv = np.zeros(1)
                pw = np.ones(1)
            else:
                pv, pw = axis_nodes(n_phi, plo, phi_hi)
            y, ey = backend.yield_grid(
                tv, pv, axis, sign, n,
                model.eta_channel, model.eta_det, model.dark_count,
                model.misalignment)
            tphi = grid.sum(axis=0)  # theta marginal of the f mass
            mass += grid.sum() * pw.sum()
            ysum += float(tphi @ y @ pw)
            eysum += float(tphi @ ey @ pw)
        return np.array([mass, ysum, eysum])

    out = refine_vector(estimate, spec)
    return float(out[1] / out[0]), float(out[2] / out[0])


def simulate_clicks(i: float, theta: float, phi: float, basis: str, state: str,
                    model: ClickModel, trials: int, seed: int):
    """Photon-level stochastic oracle for the closed-form Q and E.

    Samples the full chain per trial: Poisson emission, channel loss,
    binomial split onto the two detectors, detector thinning, dark counts.
    Only exclusive clicks count (one detector fires, the other stays
    silent), matching the closed-form trigger probabilities.  Returns
    ``(q, e, q_stderr, e_stderr)``.
    """
    rng = np.random.default_rng(seed)
    if basis == "Z":
        w = math.cos(theta)
    elif basis == "X":
        w = math.sin(theta) * math.cos(phi)
    else:
        w = math.sin(theta) * math.sin(phi)
    f2_k = (1.0 + _STATE_SIGN[state] * w) / 2.0
    emitted = rng.poisson(i, trials)
    arrived = rng.binomial(emitted, min(model.eta_channel, 1.0))
    to_k = rng.binomial(arrived, f2_k)
    k_fire = rng.binomial(to_k, model.eta_det) > 0
    l_fire = rng.binomial(arrived - to_k, model.eta_det) > 0
    k_fire |= rng.random(trials) < model.dark_count
    l_fire |= rng.random(trials) < model.dark_count
    k_only = k_fire & ~l_fire
    l_only = l_fire & ~k_fire
    e_d = model.misalignment
    b = k_only.astype(float) + l_only.astype(float)
    a = e_d * k_only + (1.0 - e_d) * l_only
    q = float(b.mean())
    e = float(a.mean() / q)
    q_se = float(b.std(ddof=1) / math.sqrt(trials))
    e_se = float((a - e * b).std(ddof=1) / (q * math.sqrt(trials)))
    return q, e, q_se, e_se
