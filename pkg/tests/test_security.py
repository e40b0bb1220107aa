import math
from dataclasses import replace

import pytest

from fp_qsdc.clickstats import ClickModel, IntervalStats, interval_stats
from fp_qsdc.decoy_lp import SinglePhotonBounds
from fp_qsdc.params import SourceParams, SystemParams, derive_channel
from fp_qsdc.security import (QUAD_FAST, EveBoundInputs, active_baseline,
                              active_best, binary_entropy, capacity,
                              eve_info, evaluate_point, mutual_info_ab,
                              transmission_rate, zero_photon_yield)
from fp_qsdc.source import make_interval

import numpy as np

PAPER = SourceParams(intensity_max=0.0895, delta_x=0.0490 * math.pi,
                     delta_z=0.0546 * math.pi)


def make_stats(q=0.1, e=0.11, eq=None, p=(0.9, 0.09, 0.01)):
    return IntervalStats(p_select=0.1, q_gain=q, e_rate=e,
                         eq_product=q * e if eq is None else eq,
                         poisson=np.array(p))


class TestEntropyAndMutualInfo:
    def test_entropy_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == 1.0

    def test_entropy_rejects_outside_unit_interval(self):
        with pytest.raises(ValueError):
            binary_entropy(1.2)
        with pytest.raises(ValueError):
            binary_entropy(-0.2)

    def test_balanced_errors_carry_nothing(self):
        assert mutual_info_ab(make_stats(q=0.3, e=0.5)) == 0.0

    def test_noiseless_channel_carries_gain(self):
        assert mutual_info_ab(make_stats(q=0.3, e=0.0)) == pytest.approx(0.3)

    def test_reference_value(self):
        assert mutual_info_ab(make_stats(q=0.1, e=0.11)) == pytest.approx(
            0.0500084, abs=1e-6)


class TestEveInfo:
    INPUTS = EveBoundInputs(q_ba=7.2e-3, p0=0.95, p1=0.045,
                            y0_alice=1.6e-7, kappa=1.0)

    def test_quarter_error_leaks_single_photons_fully(self):
        bounds = SinglePhotonBounds(0.1, 0.025, 0.25, "optimal", "optimal")
        assert eve_info(bounds, self.INPUTS).h1 == 1.0

    def test_fully_explained_gain_leaves_no_multiphoton(self):
        y1 = 0.9
        p0, p1 = 0.9, 0.1
        y0 = zero_photon_yield(SystemParams())
        inputs = EveBoundInputs(q_ba=p0 * y0 + p1 * y1, p0=p0, p1=p1,
                                y0_alice=y0, kappa=1.0)
        bounds = SinglePhotonBounds(y1, 0.001 * y1, 0.001, "optimal", "optimal")
        assert eve_info(bounds, inputs).q2_plus <= 1e-18  # clamp up to fp dust

    def test_kappa_scales_leak(self):
        bounds = SinglePhotonBounds(0.1, 0.001, 0.01, "optimal", "optimal")
        base = eve_info(bounds, self.INPUTS)
        doubled = eve_info(bounds, replace(self.INPUTS, kappa=2.0))
        assert doubled.value == pytest.approx(2.0 * base.value, rel=1e-12)

    def test_capacity_clamped_at_zero(self):
        bounds = SinglePhotonBounds(0.0, 0.0, 0.5, "optimal", "optimal")
        eve = eve_info(bounds, self.INPUTS)
        assert capacity(1e-9, eve) == 0.0


class TestTransmissionRate:
    def test_zero_capacities(self):
        caps = {"Z": 0.0, "X": 0.0, "Y": 0.0}
        probs = {"Z": 0.1, "X": 0.01, "Y": 0.01}
        assert transmission_rate(caps, probs) == 0.0

    def test_weighted_sum(self):
        caps = {"Z": 1e-3, "X": 2e-3, "Y": 2e-3}
        probs = {"Z": 0.1, "X": 0.01, "Y": 0.01}
        assert transmission_rate(caps, probs) == pytest.approx(1.4e-4)


@pytest.fixture(scope="module")
def report_2db(system):
    return evaluate_point(system, PAPER, 2.0, spec=QUAD_FAST)


class TestPipeline:
    def test_positive_capacities_at_low_loss(self, report_2db):
        z, x = report_2db.bases["Z"], report_2db.bases["X"]
        assert z.capacity > 0.0
        assert x.capacity > 0.0
        assert z.capacity != pytest.approx(x.capacity, rel=1e-3)
        assert z.eve_info < z.info_ab
        assert z.e1_max < 0.25

    def test_anchor_scale(self, report_2db):
        assert 0.5 <= report_2db.rate / 5.76e-5 <= 2.0

    def test_rate_bounded_by_selection_probability(self, report_2db):
        total_p = (report_2db.bases["Z"].p_select
                   + 2 * report_2db.bases["X"].p_select)
        assert 0.0 <= report_2db.rate <= total_p

    def test_x_and_y_bases_identical(self, system):
        ba, _ = derive_channel(system, 2.0)
        model = ClickModel.for_round(system, ba)
        sx = interval_stats(make_interval(PAPER, "X", None, "s"), PAPER,
                            model, 4)
        sy = interval_stats(make_interval(PAPER, "Y", None, "s"), PAPER,
                            model, 4)
        assert sx.p_select == pytest.approx(sy.p_select, rel=1e-12)
        assert sx.q_gain == pytest.approx(sy.q_gain, rel=1e-10)
        assert sx.e_rate == pytest.approx(sy.e_rate, rel=1e-10)

    def test_beyond_cutoff_is_dead(self, system):
        report = evaluate_point(system, PAPER, 30.0, spec=QUAD_FAST)
        assert report.rate == 0.0
        assert all(b.capacity == 0.0 for b in report.bases.values())

    def test_rate_degrades_with_attenuation(self, system):
        rates = [evaluate_point(system, PAPER, db, spec=QUAD_FAST).rate
                 for db in (1.0, 3.0, 5.0)]
        assert rates[0] > rates[1] > rates[2] >= 0.0

    def test_eve_advantage_never_helps(self, system, report_2db):
        stronger = replace(system, eve_advantage=1.5)
        report = evaluate_point(stronger, PAPER, 2.0, spec=QUAD_FAST)
        assert report.rate <= report_2db.rate

    def test_report_serialization(self, report_2db):
        d = report_2db.to_dict()
        assert d["rate"] == report_2db.rate
        assert set(d["bases"]) == {"Z", "X"}
        row = report_2db.csv_row()
        assert set(row) == set(report_2db.CSV_FIELDS)


class TestActiveBaseline:
    def test_vacuum_source_is_useless(self, system):
        assert active_baseline(system, 2.0, 1e-6) <= 1e-8

    def test_rejects_nonpositive_intensity(self, system):
        with pytest.raises(ValueError):
            active_baseline(system, 2.0, 0.0)

    def test_reference_beats_passive_rate(self, system):
        for db in (2.0, 4.0):
            _, cap = active_best(system, db)
            passive = evaluate_point(system, PAPER, db, spec=QUAD_FAST).rate
            assert cap >= passive

    def test_optimum_is_interior(self, system):
        mu, cap = active_best(system, 2.0)
        assert 1e-4 < mu < 1.0
        assert cap > 0.0
        assert active_baseline(system, 2.0, mu) == pytest.approx(cap, rel=1e-9)
