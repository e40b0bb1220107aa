"""Self-check suite: every closed-form path against its independent oracle.

Checks are deliberately redundant with the unit tests; this module exists so
a deployed installation can re-verify itself from the command line against
the stochastic oracles at any sample budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .clickstats import (ClickModel, interval_stats, simulate_clicks,
                         theoretical_yields)
from .decoy_lp import build_error_lp, build_yield_lp, feasibility_violation, solve_lp
from .params import Config, derive_channel
from .quadrature import QuadratureSpec
from .source import (full_domain, interval_probability, make_interval,
                     mc_interval_probability, sample_source)
from .states import CLASS_ORDER, distance_table

# Tolerance for the factored-moment LP feasibility of the closed-form yields:
# the constraints use <P_I(n)><Y_n> while the exact identity couples the
# joint average, so the oracle point may overshoot by the covariance term.
_FACTORED_MOMENT_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str):
        self.checks.append(CheckResult(name, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [vars(c) for c in self.checks],
        }


def _check_normalization(report: ValidationReport, config: Config):
    p = interval_probability(full_domain(config.source), config.source,
                             QuadratureSpec(nodes=32, rel_tol=1e-7))
    report.add("density_normalization", abs(p - 1.0) <= 1e-6,
               f"full-domain probability {p:.9f}")


def _check_sampler(report: ValidationReport, config: Config, seed: int,
                   samples: int):
    batch = sample_source(seed, samples, config.source)
    for basis in ("Z", "X"):
        interval = make_interval(config.source, basis, None, "s")
        quad = interval_probability(interval, config.source)
        mc, se = mc_interval_probability(batch, interval)
        dev = abs(quad - mc) / se
        report.add(f"sampler_vs_quadrature_{basis}", dev <= 3.0,
                   f"quad {quad:.6f} vs mc {mc:.6f} ({dev:.2f} sigma, "
                   f"{samples} samples)")


def _check_clicks(report: ValidationReport, config: Config, seed: int,
                  trials: int, points: int = 5):
    rng = np.random.default_rng(seed)
    ba, _ = derive_channel(config.system, 2.0)
    model = ClickModel.for_round(config.system, ba)
    worst = 0.0
    for k in range(points):
        i = float(rng.uniform(0.01, 0.3))
        theta = float(rng.uniform(0.0, math.pi))
        phi = float(rng.uniform(0.0, 2 * math.pi))
        basis = ("Z", "X", "Y")[k % 3]
        state = {"Z": "H", "X": "D", "Y": "R"}[basis]
        from .clickstats import gain_error_pointwise
        q, e = gain_error_pointwise(i, theta, phi, basis, state, model)
        q_mc, e_mc, q_se, e_se = simulate_clicks(
            i, theta, phi, basis, state, model, trials, seed + 17 * k)
        worst = max(worst, abs(q - q_mc) / q_se, abs(e - e_mc) / e_se)
    report.add("click_closed_form_vs_simulation", worst <= 3.0,
               f"worst deviation {worst:.2f} sigma over {points} random "
               f"points at {trials} trials")


def _check_lp(report: ValidationReport, config: Config):
    system, src = config.system, config.source
    n_cut = system.n_cut
    ok = True
    details = []
    for db in (2.0, 4.0, 6.0):
        ba, _ = derive_channel(system, db)
        model = ClickModel.for_round(system, ba)
        for basis in ("Z", "X"):
            union = {c: make_interval(src, basis, None, c) for c in CLASS_ORDER}
            stats = {c: interval_stats(union[c], src, model, n_cut)
                     for c in CLASS_ORDER}
            d_union = distance_table(basis, "union", src, range(2, n_cut + 1))
            state = make_interval(src, basis,
                                  {"Z": "H", "X": "D"}[basis], "s").state
            d_state = distance_table(basis, state, src, range(1, n_cut + 1))
            lp_y = build_yield_lp(stats, d_union, n_cut, basis)
            lp_e = build_error_lp(stats, d_state, n_cut, basis)
            sol_y = solve_lp(lp_y)
            sol_e = solve_lp(lp_e)
            y_th = np.array([
                [theoretical_yields(union[c], src, model, n)[0]
                 for n in range(n_cut + 1)] for c in CLASS_ORDER]).ravel()
            ey_th = np.array([
                [theoretical_yields(make_interval(src, basis, state, c),
                                    src, model, n)[1]
                 for n in range(n_cut + 1)] for c in CLASS_ORDER]).ravel()
            v_y = feasibility_violation(lp_y, y_th)
            v_e = feasibility_violation(lp_e, ey_th)
            y1_th = y_th[2 * (n_cut + 1) + 1]
            ey1_th = ey_th[2 * (n_cut + 1) + 1]
            point_ok = (sol_y.status == "optimal" and sol_e.status == "optimal"
                        and v_y <= _FACTORED_MOMENT_TOL
                        and v_e <= _FACTORED_MOMENT_TOL
                        and sol_y.objective <= y1_th + 1e-9
                        and sol_e.objective >= ey1_th - 1e-9)
            ok &= point_ok
            details.append(f"{db}dB/{basis}: viol {max(v_y, v_e):.1e}, "
                           f"Y1 {sol_y.objective:.3e}<={y1_th:.3e}")
    report.add("lp_soundness_vs_theory_yields", ok, "; ".join(details))


def _check_eigensolver(report: ValidationReport, seed: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(40):
        m = int(rng.integers(2, 9))
        x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        h = 0.5 * (x + x.conj().T)
        w, v = backend.herm_eig(h)
        res = np.linalg.norm(h @ v - v @ np.diag(w)) / max(np.linalg.norm(h), 1e-300)
        worst = max(worst, res)
    report.add("eigensolver_residual", worst <= 1e-10,
               f"worst relative residual {worst:.2e} over 40 random matrices")


def _check_ncut_sensitivity(report: ValidationReport, config: Config):
    """Diagnostic: the yield bound must tighten (grow) with the truncation."""
    from dataclasses import replace
    src = config.source
    values = {}
    for n_cut in (5, 7, 10):
        system = replace(config.system, n_cut=n_cut)
        ba, _ = derive_channel(system, 2.0)
        model = ClickModel.for_round(system, ba)
        stats = {c: interval_stats(make_interval(src, "Z", None, c), src,
                                   model, n_cut) for c in CLASS_ORDER}
        d_union = distance_table("Z", "union", src, range(2, n_cut + 1))
        sol = solve_lp(build_yield_lp(stats, d_union, n_cut, "Z"))
        values[n_cut] = sol.objective
    monotone = values[5] <= values[7] + 1e-12 and values[7] <= values[10] + 1e-12
    report.add("ncut_sensitivity", monotone,
               "Y1 lower bound by n_cut: " +
               ", ".join(f"{k}: {v:.6e}" for k, v in values.items()))


def _check_symmetry(report: ValidationReport, config: Config):
    src = config.source
    pairs = [(("Z", "H"), ("Z", "V")), (("X", "D"), ("X", "A")),
             (("X", "D"), ("Y", "R")), (("Y", "R"), ("Y", "L"))]
    worst = 0.0
    for (b1, s1), (b2, s2) in pairs:
        p1 = interval_probability(make_interval(src, b1, s1, "s"), src)
        p2 = interval_probability(make_interval(src, b2, s2, "s"), src)
        worst = max(worst, abs(p1 - p2))
    report.add("state_symmetry", worst <= 1e-9,
               f"worst probability mismatch {worst:.2e}")


def run_validation(config: Config, seed: int = 20240901,
                   samples: int = 10 ** 6, trials: int = 10 ** 7,
                   quick: bool = False) -> ValidationReport:
    """Run every oracle check; ``quick`` shrinks the stochastic budgets."""
    if quick:
        samples = min(samples, 10 ** 5)
        trials = min(trials, 10 ** 6)
    report = ValidationReport()
    _check_normalization(report, config)
    _check_sampler(report, config, seed, samples)
    _check_clicks(report, config, seed + 1, trials)
    _check_lp(report, config)
    _check_eigensolver(report, seed + 2)
    _check_ncut_sensitivity(report, config)
    _check_symmetry(report, config)
    return report
