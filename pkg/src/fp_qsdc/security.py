"""Wiretap secrecy capacity assembly and the full evaluation pipeline.

Per basis, the legitimate rate is the return-round gain times one minus the
binary entropy of its error rate.  The eavesdropper's information splits by
photon number: vacuum leaks nothing, single photons leak h(2 e_1) with e_1
bounded by the decoy LPs, and everything at two photons and above is
conservatively surrendered in full.  The per-pulse figure of merit weights
each basis' capacity by its post-selection probability.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import backend
from .clickstats import ClickModel, IntervalStats, interval_stats
from .decoy_lp import SinglePhotonBounds, single_photon_bounds
from .params import SourceParams, SystemParams, derive_channel
from .quadrature import QuadratureSpec
from .source import BASIS_STATES, make_interval
from .states import CLASS_ORDER, TraceDistanceTable, distance_table

#: Default quadrature for reporting-quality evaluations.
QUAD_DEFAULT = QuadratureSpec(nodes=32, rel_tol=1e-7, max_refinements=4)
#: Fixed-rule profile for optimizer sweeps (no refinement passes).
QUAD_FAST = QuadratureSpec(nodes=24, rel_tol=1e-7, max_refinements=0)


def binary_entropy(x: float) -> float:
    """Shannon entropy of a binary variable, continuous at the endpoints."""
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise ValueError(f"probability {x!r} outside [0, 1]")
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def mutual_info_ab(stats_bab: IntervalStats) -> float:
    """Information shared with the receiver per selected signal pulse."""
    return stats_bab.q_gain * (1.0 - binary_entropy(stats_bab.e_rate))


@dataclass(frozen=True)
class EveBoundInputs:
    """Signal-interval quantities feeding the eavesdropper bound."""

    q_ba: float          # first-round gain of the signal class
    p0: float            # <P_I(0)> on the signal class
    p1: float            # <P_I(1)>
    y0_alice: float      # zero-photon yield at the first-round receiver
    kappa: float         # efficiency advantage max{1, gamma_E / gamma_A}


@dataclass(frozen=True)
class EveInfo:
    q1: float            # single-photon gain available to the eavesdropper
    q2_plus: float       # multiphoton gain, fully leaked
    h1: float            # information per single photon
    value: float         # total leaked information


def zero_photon_yield(system: SystemParams) -> float:
    """Dark-count-only click probability of a two-detector measurement."""
    pd = system.dark_count
    return 2.0 * pd * (1.0 - pd)


def eve_info(bounds: SinglePhotonBounds, inputs: EveBoundInputs) -> EveInfo:
    """Conservative split of the first-round gain into leak classes.

    The single-photon slice is credited with the guaranteed yield only; the
    entire unexplained remainder of the gain (after the vacuum term and the
    per-photon-number dark-count correction) is treated as multiphoton and
    leaks completely.  Negative slices are clamped to zero.
    """
    y0 = inputs.y0_alice
    q1 = max(0.0, inputs.p1 * (bounds.y1_min - y0)) * inputs.kappa
    residual = (inputs.q_ba
                - inputs.p0 * y0
                - inputs.p1 * bounds.y1_min
                - (1.0 - inputs.p0 - inputs.p1) * y0)
    q2_plus = max(0.0, residual) * inputs.kappa
    if bounds.e1_max >= 0.25:
        h1 = 1.0
    else:
        h1 = binary_entropy(2.0 * bounds.e1_max)
    return EveInfo(q1=q1, q2_plus=q2_plus, h1=h1,
                   value=q1 * h1 + q2_plus)


def capacity(info_ab: float, eve: EveInfo) -> float:
    """Secrecy message capacity of one basis, clamped at zero."""
    return max(0.0, info_ab - eve.value)


def transmission_rate(capacities: dict[str, float],
                      probabilities: dict[str, float]) -> float:
    """Post-selection-weighted aggregate rate per emitted pulse."""
    return sum(probabilities[k] * capacities[k] for k in capacities)


@dataclass(frozen=True)
class BasisReport:
    basis: str
    p_select: float
    q_bab: float
    e_bab: float
    q_ba: float
    e_ba: float
    info_ab: float
    eve_q1: float
    eve_q2_plus: float
    eve_info: float
    y1_min: float
    e1y1_max: float
    e1_max: float
    capacity: float
    yield_status: str
    error_status: str


@dataclass(frozen=True)
class SecrecyReport:
    """Full outcome of one pipeline evaluation."""

    attenuation_db: float
    distance_km: float
    intensity: float
    delta_x: float
    delta_z: float
    kappa: float
    n_cut: int
    matrix_mode: str
    rate: float
    bases: dict[str, BasisReport]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bases"] = {k: asdict(v) for k, v in self.bases.items()}
        return out

    CSV_FIELDS = (
        "attenuation_db", "distance_km", "intensity", "delta_x", "delta_z",
        "rate",
        "p_select_z", "capacity_z", "q_bab_z", "e_bab_z", "e1_max_z", "y1_min_z",
        "p_select_x", "capacity_x", "q_bab_x", "e_bab_x", "e1_max_x", "y1_min_x",
    )

    def csv_row(self) -> dict[str, float]:
        z, x = self.bases["Z"], self.bases["X"]
        return {
            "attenuation_db": self.attenuation_db,
            "distance_km": self.distance_km,
            "intensity": self.intensity,
            "delta_x": self.delta_x,
            "delta_z": self.delta_z,
            "rate": self.rate,
            "p_select_z": z.p_select, "capacity_z": z.capacity,
            "q_bab_z": z.q_bab, "e_bab_z": z.e_bab,
            "e1_max_z": z.e1_max, "y1_min_z": z.y1_min,
            "p_select_x": x.p_select, "capacity_x": x.capacity,
            "q_bab_x": x.q_bab, "e_bab_x": x.e_bab,
            "e1_max_x": x.e1_max, "y1_min_x": x.y1_min,
        }


def _basis_pipeline(basis: str, system: SystemParams, src: SourceParams,
                    model_ba: ClickModel, model_bab: ClickModel,
                    mode: str, spec: QuadratureSpec) -> BasisReport:
    n_cut = system.n_cut
    union = {c: make_interval(src, basis, None, c) for c in CLASS_ORDER}
    stats_ba = {c: interval_stats(union[c], src, model_ba, n_cut, spec)
                for c in CLASS_ORDER}
    stats_bab = interval_stats(union["s"], src, model_bab, n_cut, spec)
    d_union = distance_table(basis, "union", src, range(2, n_cut + 1), mode, spec)
    # The two states of a basis mirror each other exactly (the sampler tests
    # pin this), so one state's error LP covers the worst case.
    first_state = BASIS_STATES[basis][0]
    d_state = distance_table(basis, first_state, src, range(1, n_cut + 1),
                             mode, spec)
    bounds = single_photon_bounds(stats_ba, d_union, d_state, n_cut, basis)
    sig = stats_ba["s"]
    inputs = EveBoundInputs(
        q_ba=sig.q_gain, p0=float(sig.poisson[0]), p1=float(sig.poisson[1]),
        y0_alice=zero_photon_yield(system), kappa=system.eve_advantage)
    eve = eve_info(bounds, inputs)
    info_ab = mutual_info_ab(stats_bab)
    return BasisReport(
        basis=basis,
        p_select=sig.p_select,
        q_bab=stats_bab.q_gain, e_bab=stats_bab.e_rate,
        q_ba=sig.q_gain, e_ba=sig.e_rate,
        info_ab=info_ab,
        eve_q1=eve.q1, eve_q2_plus=eve.q2_plus, eve_info=eve.value,
        y1_min=bounds.y1_min, e1y1_max=bounds.e1y1_max, e1_max=bounds.e1_max,
        capacity=capacity(info_ab, eve),
        yield_status=bounds.yield_status, error_status=bounds.error_status)


def evaluate_point(system: SystemParams, src: SourceParams,
                   attenuation_db: float, mode: str = "full",
                   spec: QuadratureSpec = QUAD_DEFAULT) -> SecrecyReport:
    """Evaluate the secrecy rate pipeline at one operating point.

    The Y basis duplicates the X basis by construction (identical interval
    geometry and a fixed phase rotation of the states), so only Z and X are
    computed and Y is mirrored.
    """
    ba, bab = derive_channel(system, attenuation_db)
    model_ba = ClickModel.for_round(system, ba)
    model_bab = ClickModel.for_round(system, bab)
    bases = {}
    for basis in ("Z", "X"):
        bases[basis] = _basis_pipeline(basis, system, src, model_ba, model_bab,
                                       mode, spec)
    caps = {"Z": bases["Z"].capacity, "X": bases["X"].capacity,
            "Y": bases["X"].capacity}
    probs = {"Z": bases["Z"].p_select, "X": bases["X"].p_select,
             "Y": bases["X"].p_select}
    from .params import attenuation_to_km
    return SecrecyReport(
        attenuation_db=attenuation_db,
        distance_km=attenuation_to_km(system, attenuation_db),
        intensity=src.intensity_max, delta_x=src.delta_x, delta_z=src.delta_z,
        kappa=system.eve_advantage, n_cut=system.n_cut, matrix_mode=mode,
        rate=transmission_rate(caps, probs),
        bases=bases)


# ---------------------------------------------------------------------------
# Actively modulated reference


def _perfect_gain(mu: float, eta_channel: float, system: SystemParams,
                  e_d: float) -> tuple[float, float, float]:
    """(Q, E, EQ) of a perfectly prepared state at point intensity mu."""
    q, eq = backend.click_grid(
        np.array([mu]), np.array([0.0]), np.array([0.0]),
        backend.AXIS_Z, 1.0, eta_channel, system.eta_det, system.dark_count, e_d)
    q = float(q[0, 0, 0])
    eq = float(eq[0, 0, 0])
    return q, eq / q, eq


def active_baseline(system: SystemParams, attenuation_db: float,
                    mu: float) -> float:
    """Capacity of the actively modulated reference protocol.

    Same security assembly, but with exact single-intensity Poisson
    statistics, perfect states, and ideal three-intensity decoy bounds (the
    decoy states are identical to the signal states, so all cross-class
    couplings vanish).
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    n_cut = system.n_cut
    ba, bab = derive_channel(system, attenuation_db)
    mus = {"d1": 0.05 * mu, "d2": 0.1 * mu, "s": mu}
    stats = {}
    for cls, m in mus.items():
        q, e, eq = _perfect_gain(m, ba.efficiency, system, system.err_opt_a)
        ns = np.arange(n_cut + 1)
        pois = np.exp(-m + ns * math.log(m) -
                      np.array([math.lgamma(n + 1) for n in ns]))
        stats[cls] = IntervalStats(p_select=1.0, q_gain=q, e_rate=e,
                                   eq_product=eq, poisson=pois)
    zero = TraceDistanceTable(
        basis="Z", scope="union",
        values={(n, a, b): 0.0
                for n in range(1, n_cut + 1)
                for a in CLASS_ORDER for b in CLASS_ORDER if a != b})
    bounds = single_photon_bounds(stats, zero, zero, n_cut, "active")
    sig = stats["s"]
    inputs = EveBoundInputs(
        q_ba=sig.q_gain, p0=float(sig.poisson[0]), p1=float(sig.poisson[1]),
        y0_alice=zero_photon_yield(system), kappa=system.eve_advantage)
    eve = eve_info(bounds, inputs)
    q_bab, e_bab, _ = _perfect_gain(mu, bab.efficiency, system, system.err_opt_b)
    info_ab = q_bab * (1.0 - binary_entropy(e_bab))
    return capacity(info_ab, eve)


def active_best(system: SystemParams, attenuation_db: float,
                mu_lo: float = 1e-4, mu_hi: float = 1.0) -> tuple[float, float]:
    """Optimize the reference protocol's intensity; returns (mu, capacity).

    The positive-capacity window in mu narrows to a sliver near the cutoff
    attenuation, so the coarse stage needs a dense grid.
    """
    grid = np.geomspace(mu_lo, mu_hi, 60)
    vals = [active_baseline(system, attenuation_db, m) for m in grid]
    k = int(np.argmax(vals))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    # golden-section polish on the bracketing interval
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = active_baseline(system, attenuation_db, c)
    fd = active_baseline(system, attenuation_db, d)
    for _ in range(40):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = active_baseline(system, attenuation_db, c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = active_baseline(system, attenuation_db, d)
    mu = c if fc >= fd else d
    return float(mu), float(max(fc, fd, vals[k]))
