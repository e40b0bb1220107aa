"""Device, source and channel parameters.

Defaults reproduce the simulation scenario of the reference experiment:
intrinsic optical efficiencies 0.21 (one way) and 0.088 (round trip), dark
count 8e-8, misalignment 1.31% / 0.26%, detector efficiency 0.7.  A single
"channel attenuation" figure always means the round trip; the outbound leg
gets half of it, matching 0.2 dB/km of fiber each way (2 dB <-> 5 km).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


@dataclass(frozen=True)
class SystemParams:
    """Device/channel constants plus the eavesdropper-model knob."""

    eta_opt_ba: float = 0.21
    eta_opt_bab: float = 0.088
    dark_count: float = 8e-8
    err_opt_a: float = 0.0131
    err_opt_b: float = 0.0026
    eta_det: float = 0.7
    fiber_loss_db_per_km: float = 0.2
    eve_advantage: float = 1.0
    n_cut: int = 7

    def __post_init__(self):
        _require(0.0 < self.eta_opt_ba <= 1.0, "eta_opt_ba must be in (0, 1]")
        _require(0.0 < self.eta_opt_bab <= 1.0, "eta_opt_bab must be in (0, 1]")
        _require(0.0 <= self.dark_count < 1.0, "dark_count must be in [0, 1)")
        _require(0.0 <= self.err_opt_a < 0.5, "err_opt_a must be in [0, 0.5)")
        _require(0.0 <= self.err_opt_b < 0.5, "err_opt_b must be in [0, 0.5)")
        _require(0.0 < self.eta_det <= 1.0, "eta_det must be in (0, 1]")
        _require(self.fiber_loss_db_per_km > 0.0,
                 "fiber_loss_db_per_km must be positive")
        _require(self.eve_advantage >= 1.0, "eve_advantage must be >= 1")
        _require(self.n_cut >= 2, "n_cut must be >= 2")


@dataclass(frozen=True)
class SourceParams:
    """Passive-source intensity boundaries and post-selection half-widths.

    Omitted boundaries default to the standard fractions of the signal
    intensity: i_vac = 0.05 I, i_d = 0.1 I.  ``vt_product`` defaults to I/2 so
    that the source's maximal output intensity 2vt coincides with the signal
    interval's upper edge.
    """

    intensity_max: float
    delta_x: float
    delta_z: float
    i_vac: float | None = None
    i_d: float | None = None
    vt_product: float | None = None

    def __post_init__(self):
        _require(self.intensity_max > 0, "intensity_max must be positive")
        if self.i_vac is None:
            object.__setattr__(self, "i_vac", 0.05 * self.intensity_max)
        if self.i_d is None:
            object.__setattr__(self, "i_d", 0.1 * self.intensity_max)
        if self.vt_product is None:
            object.__setattr__(self, "vt_product", 0.5 * self.intensity_max)
        _require(self.delta_x > 0, "delta_x must be positive")
        _require(self.delta_z > 0, "delta_z must be positive")
        _require(self.delta_x < math.pi / 2, "delta_x must be below pi/2")
        _require(self.delta_z < math.pi / 2, "delta_z must be below pi/2")
        _require(0.0 <= self.i_vac < self.i_d < self.intensity_max,
                 "intensity boundaries must satisfy 0 <= i_vac < i_d < intensity_max")
        _require(2.0 * self.vt_product >= self.intensity_max,
                 "vt_product too small: 2*vt_product must cover intensity_max")

    def class_range(self, intensity_class: str) -> tuple[float, float]:
        """Intensity interval (lo, hi] of a decoy class."""
        try:
            return {
                "d1": (0.0, self.i_vac),
                "d2": (self.i_vac, self.i_d),
                "s": (self.i_d, self.intensity_max),
            }[intensity_class]
        except KeyError:
            raise ConfigError(
                f"unknown intensity class {intensity_class!r} "
                "(expected 'd1', 'd2' or 's')") from None


@dataclass(frozen=True)
class ChannelSpec:
    """One transmission round: fiber attenuation plus intrinsic optics."""

    attenuation_db: float
    eta_opt: float
    round_tag: str  # "BA" or "BAB"

    def __post_init__(self):
        _require(self.attenuation_db >= 0.0, "attenuation_db must be >= 0")
        _require(self.round_tag in ("BA", "BAB"), "round_tag must be BA or BAB")

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.attenuation_db / 10.0)

    @property
    def efficiency(self) -> float:
        """Overall transmission efficiency of the round."""
        return self.transmittance * self.eta_opt


def derive_channel(params: SystemParams,
                   total_attenuation_db: float) -> tuple[ChannelSpec, ChannelSpec]:
    """Split a round-trip attenuation figure into the BA and BAB rounds."""
    _require(total_attenuation_db >= 0.0, "attenuation_db must be >= 0")
    ba = ChannelSpec(total_attenuation_db / 2.0, params.eta_opt_ba, "BA")
    bab = ChannelSpec(total_attenuation_db, params.eta_opt_bab, "BAB")
    return ba, bab


def attenuation_to_km(params: SystemParams, total_attenuation_db: float) -> float:
    """Communication distance corresponding to a round-trip attenuation."""
    return total_attenuation_db / (2.0 * params.fiber_loss_db_per_km)


def km_to_attenuation(params: SystemParams, distance_km: float) -> float:
    return distance_km * 2.0 * params.fiber_loss_db_per_km


@dataclass(frozen=True)
class SweepSpec:
    """Attenuation sweep requested by a config file or the CLI."""

    from_db: float = 0.5
    to_db: float = 8.0
    step_db: float = 0.5
    optimize: bool = False
    # Optional pulse repetition rate; when set, reported rates are scaled
    # from per-pulse to per-second.
    pulse_rate_hz: float | None = None

    def __post_init__(self):
        _require(self.from_db >= 0.0, "from_db must be >= 0")
        _require(self.to_db > self.from_db, "to_db must exceed from_db")
        _require(self.step_db > 0.0, "step_db must be positive")
        if self.pulse_rate_hz is not None:
            _require(self.pulse_rate_hz > 0.0, "pulse_rate_hz must be positive")

    def points(self) -> list[float]:
        out = []
        db = self.from_db
        while db <= self.to_db + 1e-9:
            out.append(round(db, 9))
            db += self.step_db
        return out


@dataclass(frozen=True)
class Config:
    system: SystemParams = field(default_factory=SystemParams)
    source: SourceParams = field(
        default_factory=lambda: SourceParams(
            intensity_max=0.0895, delta_x=0.0490 * math.pi, delta_z=0.0546 * math.pi))
    sweep: SweepSpec = field(default_factory=SweepSpec)

    def with_point(self, intensity=None, delta_x=None, delta_z=None) -> "Config":
        """Copy of the config with overridden source point parameters."""
        updates = {}
        if intensity is not None:
            # Boundaries and vt scale with the signal intensity unless the
            # config pinned them explicitly; rescale keeps the standard ratios.
            updates["intensity_max"] = intensity
            updates["i_vac"] = None
            updates["i_d"] = None
            updates["vt_product"] = None
        if delta_x is not None:
            updates["delta_x"] = delta_x
        if delta_z is not None:
            updates["delta_z"] = delta_z
        return replace(self, source=replace(self.source, **updates)) if updates else self


_SECTION_TYPES = {"params": SystemParams, "source": SourceParams, "sweep": SweepSpec}


def _build_section(name: str, cls, data: dict):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown field {key!r} in config section {name!r}")
    for key, value in data.items():
        if key == "n_cut":
            if not isinstance(value, int):
                raise ConfigError("n_cut must be an integer")
        elif key == "optimize":
            if not isinstance(value, bool):
                raise ConfigError("optimize must be a boolean")
        elif value is not None and not isinstance(value, (int, float)) \
                or isinstance(value, bool) and key != "optimize":
            raise ConfigError(f"field {key!r} must be a number")
    return cls(**data)


def load_config(path: str | Path) -> Config:
    """Read and validate a JSON config file.

    The file holds up to three objects: ``params`` (device constants),
    ``source`` (intensity boundaries and interval half-widths) and ``sweep``.
    Missing fields fall back to the defaults above.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    for key in raw:
        if key not in _SECTION_TYPES:
            raise ConfigError(f"unknown config section {key!r}")
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        if name in raw:
            sections[name] = _build_section(name, cls, raw[name])
    return Config(
        system=sections.get("params", SystemParams()),
        source=sections.get("source", Config().source),
        sweep=sections.get("sweep", SweepSpec()),
    )
