"""Acceptance criteria, one test per criterion.

Each test prints a PASS/FAIL line with its runtime (run pytest with -s to
see them) and enforces the stated tolerance.  The runtime budgets assume the
compiled kernel extension is available; the pure-python fallback stays
within them too, with less headroom.
"""

import json
import math
import time

import numpy as np
import pytest

from fp_qsdc import backend, cli
from fp_qsdc.clickstats import (ClickModel, gain_error_pointwise,
                                interval_stats, simulate_clicks,
                                theoretical_yields)
from fp_qsdc.decoy_lp import (build_error_lp, build_yield_lp,
                              feasibility_violation, solve_lp)
from fp_qsdc.optimizer import active_max_distance, max_distance
from fp_qsdc.params import SourceParams, SystemParams, derive_channel
from fp_qsdc.quadrature import QuadratureSpec
from fp_qsdc.security import QUAD_FAST, evaluate_point
from fp_qsdc.source import (full_domain, interval_probability, make_interval,
                            mc_interval_probability, sample_source)
from fp_qsdc.states import (CLASS_ORDER, distance_table, single_photon_union,
                            trace_distance)

ANCHORS = (
    (2.0, 0.0895, 0.0490 * math.pi, 0.0546 * math.pi, 5.76e-5),
    (4.0, 0.0471, 0.0367 * math.pi, 0.0408 * math.pi, 9.92e-6),
    (6.0, 0.0168, 0.0152 * math.pi, 0.0214 * math.pi, 4.99e-7),
)

PAPER_2DB = SourceParams(intensity_max=0.0895, delta_x=0.0490 * math.pi,
                         delta_z=0.0546 * math.pi)


def report(num: int, ok: bool, elapsed: float, detail: str):
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} {verdict} ({elapsed:.1f} s): {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_density_normalization():
    t0 = time.monotonic()
    src = SourceParams(intensity_max=1.0, delta_x=0.1, delta_z=0.1)
    p = interval_probability(full_domain(src), src,
                             QuadratureSpec(nodes=32, rel_tol=1e-7))
    elapsed = time.monotonic() - t0
    ok = abs(p - 1.0) <= 1e-6 and elapsed < 1.0
    report(1, ok, elapsed, f"full-domain integral = {p:.9f}")


def test_criterion_2_sampler_oracle():
    t0 = time.monotonic()
    batch = sample_source(20240901, 10 ** 6, PAPER_2DB)
    details = []
    ok = True
    for basis in ("Z", "X"):
        interval = make_interval(PAPER_2DB, basis, None, "s")
        quad = interval_probability(interval, PAPER_2DB)
        mc, se = mc_interval_probability(batch, interval)
        dev = abs(quad - mc) / se
        ok &= dev <= 3.0
        details.append(f"{basis}: {dev:.2f} sigma")
    elapsed = time.monotonic() - t0
    ok &= elapsed < 30.0
    report(2, ok, elapsed, "; ".join(details))


def test_criterion_3_click_oracle():
    t0 = time.monotonic()
    system = SystemParams()
    ba, _ = derive_channel(system, 2.0)
    model = ClickModel.for_round(system, ba)
    rng = np.random.default_rng(20240903)
    worst = 0.0
    for k in range(5):
        i = float(rng.uniform(0.02, 0.3))
        theta = float(rng.uniform(0.0, math.pi))
        phi = float(rng.uniform(0.0, 2 * math.pi))
        basis = ("Z", "X", "Y")[k % 3]
        state = {"Z": "H", "X": "D", "Y": "R"}[basis]
        q, e = gain_error_pointwise(i, theta, phi, basis, state, model)
        q_mc, e_mc, q_se, e_se = simulate_clicks(i, theta, phi, basis, state,
                                                 model, 10 ** 7, seed=41 + k)
        worst = max(worst, abs(q - q_mc) / q_se, abs(e - e_mc) / e_se)
    elapsed = time.monotonic() - t0
    ok = worst <= 3.0 and elapsed < 120.0
    report(3, ok, elapsed, f"worst deviation {worst:.2f} sigma "
                           "(5 points, 1e7 trials)")


def test_criterion_4_single_photon_state():
    t0 = time.monotonic()
    rho = single_photon_union(PAPER_2DB)
    err = np.abs(rho.entries - np.diag([0.5, 0.5])).max()
    elapsed = time.monotonic() - t0
    report(4, err <= 1e-6, elapsed,
           f"max deviation from diag(1/2, 1/2): {err:.2e}")


def test_criterion_5_lp_soundness():
    t0 = time.monotonic()
    system = SystemParams()
    n_cut = system.n_cut
    ok = True
    worst_viol = 0.0
    worst_solve = 0.0
    for db in (2.0, 4.0, 6.0):
        ba, _ = derive_channel(system, db)
        model = ClickModel.for_round(system, ba)
        for basis in ("Z", "X"):
            state = {"Z": "H", "X": "D"}[basis]
            stats = {c: interval_stats(make_interval(PAPER_2DB, basis, None, c),
                                       PAPER_2DB, model, n_cut)
                     for c in CLASS_ORDER}
            d_union = distance_table(basis, "union", PAPER_2DB,
                                     range(2, n_cut + 1))
            d_state = distance_table(basis, state, PAPER_2DB,
                                     range(1, n_cut + 1))
            lp_y = build_yield_lp(stats, d_union, n_cut, basis)
            lp_e = build_error_lp(stats, d_state, n_cut, basis)
            t_solve = time.monotonic()
            sol_y = solve_lp(lp_y)
            worst_solve = max(worst_solve, time.monotonic() - t_solve)
            t_solve = time.monotonic()
            sol_e = solve_lp(lp_e)
            worst_solve = max(worst_solve, time.monotonic() - t_solve)
            y_th = np.array([
                [theoretical_yields(make_interval(PAPER_2DB, basis, None, c),
                                    PAPER_2DB, model, n)[0]
                 for n in range(n_cut + 1)] for c in CLASS_ORDER]).ravel()
            ey_th = np.array([
                [theoretical_yields(make_interval(PAPER_2DB, basis, state, c),
                                    PAPER_2DB, model, n)[1]
                 for n in range(n_cut + 1)] for c in CLASS_ORDER]).ravel()
            worst_viol = max(worst_viol, feasibility_violation(lp_y, y_th),
                             feasibility_violation(lp_e, ey_th))
            y1_th = y_th[2 * (n_cut + 1) + 1]
            ey1_th = ey_th[2 * (n_cut + 1) + 1]
            ok &= sol_y.status == "optimal" and sol_e.status == "optimal"
            ok &= sol_y.objective <= y1_th + 1e-9
            ok &= sol_e.objective >= ey1_th - 1e-9
    ok &= worst_viol <= 1e-6 and worst_solve < 0.1
    elapsed = time.monotonic() - t0
    report(5, ok, elapsed,
           f"theory-point violation {worst_viol:.1e} (factored-moment gap), "
           f"slowest solve {worst_solve * 1e3:.1f} ms")


KAPPA_SET = (1.0, 1.0 / 0.7, 1.0 / (0.7 * 0.21))


def _anchor_ratios(kappa: float, mode: str) -> list[float]:
    system = SystemParams(eve_advantage=kappa)
    out = []
    for db, intensity, dx, dz, target in ANCHORS:
        src = SourceParams(intensity_max=intensity, delta_x=dx, delta_z=dz)
        out.append(evaluate_point(system, src, db, mode).rate / target)
    return out


def test_criterion_6_paper_anchor_points():
    t0 = time.monotonic()
    by_kappa = {k: _anchor_ratios(k, "full") for k in KAPPA_SET}

    def badness(ratios):
        if min(ratios) <= 0.0:
            return math.inf
        return max(abs(math.log(r)) for r in ratios)

    best_kappa = min(KAPPA_SET, key=lambda k: badness(by_kappa[k]))
    ratios = by_kappa[best_kappa]
    ok = all(0.5 <= r <= 2.0 for r in ratios)
    # continuous calibration can only move kappa off the discrete set; the
    # anchor deviations are monotone in kappa, so refine by golden section
    lo, hi = 1.0, 1.5
    gr = (math.sqrt(5) - 1) / 2
    c, d = hi - gr * (hi - lo), lo + gr * (hi - lo)
    fc, fd = badness(_anchor_ratios(c, "full")), badness(_anchor_ratios(d, "full"))
    for _ in range(8):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - gr * (hi - lo)
            fc = badness(_anchor_ratios(c, "full"))
        else:
            lo, c, fc = c, d, fd
            d = lo + gr * (hi - lo)
            fd = badness(_anchor_ratios(d, "full"))
    kappa_star = c if fc <= fd else d
    if badness(by_kappa[best_kappa]) <= min(fc, fd):
        kappa_star = best_kappa
    calibrated = _anchor_ratios(kappa_star, "full")
    ok &= all(0.8 <= r <= 1.25 for r in calibrated)
    diag_ratios = _anchor_ratios(best_kappa, "paper_diagonal")
    ok &= all(0.5 <= r <= 2.0 for r in diag_ratios)
    elapsed = time.monotonic() - t0
    ok &= elapsed < 600.0
    report(6, ok, elapsed,
           f"best kappa in set = {best_kappa:.3f} with ratios "
           f"{[f'{r:.3f}' for r in ratios]}; calibrated kappa = "
           f"{kappa_star:.4f} ratios {[f'{r:.3f}' for r in calibrated]}; "
           f"diagonal-mode ratios {[f'{r:.3f}' for r in diag_ratios]}")


def test_criterion_7_max_distance_and_reference_ratio():
    t0 = time.monotonic()
    system = SystemParams()
    passive = max_distance(system)
    active = active_max_distance(system, km_resolution=0.01)
    ratio = passive.distance_km / active.distance_km
    elapsed = time.monotonic() - t0
    ok = 15.2 <= passive.distance_km <= 18.6
    ok &= 0.90 <= ratio <= 0.99
    ok &= elapsed < 1800.0
    report(7, ok, elapsed,
           f"passive {passive.distance_km:.2f} km "
           f"({passive.attenuation_db:.2f} dB), active "
           f"{active.distance_km:.2f} km, ratio {ratio:.4f}")


def test_criterion_8_curve_shape_orderings():
    t0 = time.monotonic()
    system = SystemParams()
    caps: dict[tuple, dict[str, float]] = {}
    for db in (1.0, 6.0):
        for intensity in (0.1, 0.01):
            for delta in (0.01 * math.pi, 0.05 * math.pi):
                src = SourceParams(intensity_max=intensity, delta_x=delta,
                                   delta_z=delta)
                rep = evaluate_point(system, src, db, spec=QUAD_FAST)
                caps[(db, intensity, delta)] = {
                    "Z": rep.bases["Z"].capacity, "X": rep.bases["X"].capacity}
    small, large = 0.01 * math.pi, 0.05 * math.pi
    checks = []
    for basis in ("Z", "X"):
        def c(db, i, d, _b=basis):
            return caps[(db, i, d)][_b]

        checks += [
            # smaller intervals never hurt the capacity
            c(1.0, 0.1, small) > c(1.0, 0.1, large),
            c(1.0, 0.01, small) > c(1.0, 0.01, large),
            # bright pulses win at low loss ...
            c(1.0, 0.1, small) > c(1.0, 0.01, small),
            c(1.0, 0.1, large) > c(1.0, 0.01, large),
            # ... and lose at high loss
            c(6.0, 0.01, small) > c(6.0, 0.1, small),
            c(6.0, 0.01, small) > 0.0,
            c(6.0, 0.01, large) >= c(6.0, 0.1, large),
            c(6.0, 0.1, small) >= c(6.0, 0.1, large),
        ]
    elapsed = time.monotonic() - t0
    report(8, all(checks), elapsed,
           f"{sum(checks)}/{len(checks)} orderings hold (Z and X)")


def test_criterion_9_property_suite(tmp_path, monkeypatch):
    t0 = time.monotonic()
    details = []
    # eigensolver residuals
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(40):
        m = int(rng.integers(2, 11))
        x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        h = 0.5 * (x + x.conj().T)
        w, v = backend.herm_eig(h)
        worst = max(worst, np.linalg.norm(h @ v - v @ np.diag(w))
                    / np.linalg.norm(h))
    ok = worst <= 1e-10
    details.append(f"eigen residual {worst:.1e}")
    # triangle inequality on a real distance table
    table = distance_table("X", "union", PAPER_2DB, range(1, 6))
    for n in range(1, 6):
        d12 = table.get(n, "d1", "d2")
        d13 = table.get(n, "d1", "s")
        d23 = table.get(n, "d2", "s")
        ok &= d13 <= d12 + d23 + 1e-9
        ok &= d12 <= d13 + d23 + 1e-9
        ok &= d23 <= d12 + d13 + 1e-9
    details.append("triangle inequality holds")
    # capacity clamp and X/Y mirror
    system = SystemParams()
    rep = evaluate_point(system, PAPER_2DB, 30.0, spec=QUAD_FAST)
    ok &= rep.rate == 0.0 and all(b.capacity >= 0.0 for b in rep.bases.values())
    details.append("capacity clamped at 30 dB")
    ba, _ = derive_channel(system, 2.0)
    model = ClickModel.for_round(system, ba)
    sx = interval_stats(make_interval(PAPER_2DB, "X", None, "s"), PAPER_2DB,
                        model, 4)
    sy = interval_stats(make_interval(PAPER_2DB, "Y", None, "s"), PAPER_2DB,
                        model, 4)
    ok &= abs(sx.q_gain - sy.q_gain) <= 1e-10
    details.append("C_X = C_Y geometry")
    # sweep determinism under a fixed seed/config
    monkeypatch.setenv("FP_QSDC_JOBS", "2")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "sweep": {"from_db": 1.0, "to_db": 3.0, "step_db": 1.0}}))
    out = tmp_path / "sweep"
    argv = ["sweep", "--config", str(config), "--fast", "--out", str(out)]
    assert cli.main(argv) == 0
    first = out.with_suffix(".csv").read_bytes()
    assert cli.main(argv) == 0
    ok &= out.with_suffix(".csv").read_bytes() == first
    details.append("sweep CSV byte-identical")
    elapsed = time.monotonic() - t0
    report(9, ok, elapsed, "; ".join(details))
