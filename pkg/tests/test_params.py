import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fp_qsdc.params import (ChannelSpec, Config, ConfigError, SourceParams,
                            SweepSpec, SystemParams, attenuation_to_km,
                            derive_channel, km_to_attenuation, load_config)
from fp_qsdc.quadrature import QuadratureSpec
from fp_qsdc.source import interval_probability, make_interval


def test_lossless_channel_keeps_intrinsic_efficiency():
    ba, _ = derive_channel(SystemParams(), 0.0)
    assert ba.efficiency == pytest.approx(0.21, rel=1e-15)


def test_two_db_round_trip_transmittance():
    _, bab = derive_channel(SystemParams(), 2.0)
    assert bab.transmittance == pytest.approx(0.6309573444801932, rel=1e-13)


def test_ba_round_gets_half_the_attenuation():
    ba, bab = derive_channel(SystemParams(), 2.0)
    assert ba.attenuation_db == pytest.approx(1.0)
    assert bab.attenuation_db == pytest.approx(2.0)


def test_distance_mapping_matches_fiber_loss():
    system = SystemParams()
    assert attenuation_to_km(system, 2.0) == pytest.approx(5.0)
    assert attenuation_to_km(system, 6.0) == pytest.approx(15.0)
    assert km_to_attenuation(system, 5.0) == pytest.approx(2.0)


def test_negative_attenuation_rejected():
    with pytest.raises(ConfigError):
        derive_channel(SystemParams(), -0.1)


@given(st.floats(0.0, 40.0), st.floats(0.01, 10.0))
@settings(max_examples=60, deadline=None)
def test_transmittance_monotone_in_attenuation(db, extra):
    system = SystemParams()
    _, a = derive_channel(system, db)
    _, b = derive_channel(system, db + extra)
    assert b.transmittance < a.transmittance
    assert b.efficiency <= a.efficiency


def test_round_trip_efficiency_nested():
    ba, bab = derive_channel(SystemParams(), 3.7)
    assert bab.efficiency <= ba.efficiency


def test_system_invariants():
    with pytest.raises(ConfigError, match="eta_det"):
        SystemParams(eta_det=1.5)
    with pytest.raises(ConfigError, match="eve_advantage"):
        SystemParams(eve_advantage=0.5)
    with pytest.raises(ConfigError, match="n_cut"):
        SystemParams(n_cut=1)
    with pytest.raises(ConfigError, match="dark_count"):
        SystemParams(dark_count=1.0)


def test_source_invariants_and_defaults():
    src = SourceParams(intensity_max=0.1, delta_x=0.05, delta_z=0.05)
    assert src.i_vac == pytest.approx(0.005)
    assert src.i_d == pytest.approx(0.01)
    assert src.vt_product == pytest.approx(0.05)
    with pytest.raises(ConfigError, match="delta_x must be positive"):
        SourceParams(intensity_max=0.1, delta_x=0.0, delta_z=0.05)
    with pytest.raises(ConfigError, match="boundaries"):
        SourceParams(intensity_max=0.1, delta_x=0.05, delta_z=0.05,
                     i_vac=0.02, i_d=0.01)
    with pytest.raises(ConfigError, match="vt_product"):
        SourceParams(intensity_max=0.1, delta_x=0.05, delta_z=0.05,
                     vt_product=0.04)


def test_class_ranges_partition_intensity_axis():
    src = SourceParams(intensity_max=0.2, delta_x=0.05, delta_z=0.05)
    d1, d2, s = (src.class_range(c) for c in ("d1", "d2", "s"))
    assert d1 == pytest.approx((0.0, 0.01))
    assert d2 == pytest.approx((0.01, 0.02))
    assert s == pytest.approx((0.02, 0.2))
    assert d1[1] == d2[0] and d2[1] == s[0]
    with pytest.raises(ConfigError):
        src.class_range("signal")


def test_channel_spec_round_tag():
    with pytest.raises(ConfigError):
        ChannelSpec(1.0, 0.5, "AB")


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({
        "params": {"eta_det": 0.7, "dark_count": 8e-8},
        "source": {"intensity_max": 0.0895, "delta_x": 0.0490 * math.pi,
                   "delta_z": 0.0546 * math.pi},
        "sweep": {"from_db": 1.0, "to_db": 3.0, "step_db": 1.0},
    }))
    config = load_config(path)
    assert config.system.eta_det == 0.7
    assert config.sweep.points() == [1.0, 2.0, 3.0]


def test_load_config_names_bad_field(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"source": {
        "intensity_max": 0.1, "delta_x": 0.0, "delta_z": 0.05}}))
    with pytest.raises(ConfigError, match="delta_x must be positive"):
        load_config(path)
    path.write_text(json.dumps({"params": {"eta_Det": 0.7}}))
    with pytest.raises(ConfigError, match="eta_Det"):
        load_config(path)
    path.write_text(json.dumps({"detector": {}}))
    with pytest.raises(ConfigError, match="detector"):
        load_config(path)
    path.write_text("not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")


def test_omitted_vt_matches_explicit_default(tmp_path):
    """The vt default is I/2; probabilities must match an explicit setting."""
    implicit = SourceParams(intensity_max=0.0895, delta_x=0.15, delta_z=0.17)
    explicit = SourceParams(intensity_max=0.0895, delta_x=0.15, delta_z=0.17,
                            vt_product=0.04475)
    spec = QuadratureSpec(nodes=24, rel_tol=1e-9)
    for basis in ("Z", "X"):
        p_imp = interval_probability(make_interval(implicit, basis, None, "s"),
                                     implicit, spec)
        p_exp = interval_probability(make_interval(explicit, basis, None, "s"),
                                     explicit, spec)
        assert p_imp == pytest.approx(p_exp, rel=1e-14)


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(from_db=3.0, to_db=2.0)
    with pytest.raises(ConfigError):
        SweepSpec(step_db=0.0)
    assert SweepSpec(from_db=0.5, to_db=2.0, step_db=0.5).points() == \
        [0.5, 1.0, 1.5, 2.0]


def test_with_point_rescales_boundaries():
    config = Config()
    moved = config.with_point(intensity=0.2)
    assert moved.source.i_vac == pytest.approx(0.01)
    assert moved.source.vt_product == pytest.approx(0.1)
    assert moved.source.delta_x == config.source.delta_x
