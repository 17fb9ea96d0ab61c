"""Hardware constraint model: channels, interaction strength, geometry limits."""

from __future__ import annotations

import json
import math
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .signal import Pulse

__all__ = [
    "ChannelSpec",
    "Device",
    "Violation",
    "ValidationError",
    "REFERENCE_DEVICE",
    "BASES",
    "load_device",
    "get_device",
    "DEVICE_ENV_VAR",
]

GROUND_RYDBERG = "ground-rydberg"
DIGITAL = "digital"
BASES = (GROUND_RYDBERG, DIGITAL)
ADDRESSINGS = ("Global", "Local")

DEVICE_ENV_VAR = "RYDSEQ_DEVICE_FILE"


@dataclass(frozen=True)
class Violation:
    """One broken constraint, reported as data rather than raised."""

    code: str
    message: str

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message}


class ValidationError(ValueError):
    def __init__(self, violations: list[Violation] | Violation | str):
        if isinstance(violations, str):
            violations = [Violation("invalid", violations)]
        elif isinstance(violations, Violation):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


@dataclass(frozen=True)
class ChannelSpec:
    id: str
    addressing: str
    basis: str
    max_amplitude: float
    detuning_range: tuple[float, float]
    min_duration: int = 1
    retarget_time: int = 0
    max_targets: int | None = None

    def __post_init__(self):
        if self.addressing not in ADDRESSINGS:
            raise ValueError(f"addressing must be one of {ADDRESSINGS}")
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}")
        if not self.max_amplitude > 0:
            raise ValueError("max_amplitude must be positive")
        lo, hi = self.detuning_range
        if not lo <= 0 <= hi:
            raise ValueError("detuning_range must contain 0")
        object.__setattr__(self, "detuning_range", (float(lo), float(hi)))
        if int(self.min_duration) != self.min_duration or self.min_duration < 1:
            raise ValueError("min_duration must be an integer >= 1")
        if int(self.retarget_time) != self.retarget_time or self.retarget_time < 0:
            raise ValueError("retarget_time must be a non-negative integer")
        if self.addressing == "Global":
            object.__setattr__(self, "retarget_time", 0)
            object.__setattr__(self, "max_targets", None)
        elif self.max_targets is not None and self.max_targets < 1:
            raise ValueError("max_targets must be at least 1")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "addressing": self.addressing,
            "basis": self.basis,
            "max_amplitude": self.max_amplitude,
            "detuning_range": list(self.detuning_range),
            "min_duration": self.min_duration,
            "retarget_time": self.retarget_time,
            "max_targets": self.max_targets,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> ChannelSpec:
        return cls(
            id=data["id"],
            addressing=data["addressing"],
            basis=data["basis"],
            max_amplitude=float(data["max_amplitude"]),
            detuning_range=tuple(data["detuning_range"]),
            min_duration=int(data.get("min_duration", 1)),
            retarget_time=int(data.get("retarget_time", 0)),
            max_targets=data.get("max_targets"),
        )


@dataclass(frozen=True)
class Device:
    """A neutral-atom processor's constraints.

    ``c6`` is the van der Waals coefficient divided by hbar, in
    rad·µm⁶/µs, so that ``c6 / R**6`` is an angular frequency in rad/µs.
    """

    name: str
    c6: float
    min_atom_distance: float
    max_radius_from_center: float
    max_atom_count: int
    channels: Mapping[str, ChannelSpec]
    supported_bases: frozenset[str] = field(default=frozenset(BASES))

    def __post_init__(self):
        if not self.c6 > 0:
            raise ValueError("c6 must be positive")
        if not self.min_atom_distance > 0:
            raise ValueError("min_atom_distance must be positive")
        chans = self.channels
        if not isinstance(chans, Mapping):
            ids = [c.id for c in chans]
            if len(set(ids)) != len(ids):
                raise ValueError("channel ids must be unique")
            chans = {c.id: c for c in chans}
        for key, spec in chans.items():
            if key != spec.id:
                raise ValueError(f"channel key {key!r} does not match its id {spec.id!r}")
        object.__setattr__(self, "channels", MappingProxyType(dict(chans)))
        bases = frozenset(self.supported_bases)
        if not bases <= set(BASES):
            raise ValueError(f"unknown bases in {sorted(bases)}")
        object.__setattr__(self, "supported_bases", bases)

    def __hash__(self) -> int:
        return hash((self.name, self.c6, tuple(self.channels)))

    def rydberg_blockade_radius(self, omega: float) -> float:
        """Blockade radius in µm for a Rabi frequency ``omega`` in rad/µs."""
        if not omega > 0:
            raise ValueError(f"omega must be positive, got {omega}")
        return (self.c6 / omega) ** (1 / 6)

    def rabi_from_blockade(self, radius: float) -> float:
        """Rabi frequency in rad/µs whose blockade radius is ``radius`` µm."""
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        return self.c6 / radius**6

    def interaction(self, distance: float) -> float:
        return self.c6 / distance**6

    def channel(self, channel_id: str) -> ChannelSpec:
        try:
            return self.channels[channel_id]
        except KeyError:
            raise KeyError(
                f"device {self.name!r} has no channel {channel_id!r}; "
                f"available: {sorted(self.channels)}"
            ) from None

    def validate_pulse(self, channel_id: str, pulse: Pulse) -> list[Violation]:
        """Constraint violations of ``pulse`` on the given channel (empty if ok)."""
        spec = self.channel(channel_id)
        out = []
        peak = float(np.max(pulse.amplitude.samples))
        if peak > spec.max_amplitude * (1 + 1e-12):
            out.append(
                Violation(
                    "amplitude",
                    f"peak amplitude {peak:.6g} rad/µs exceeds {spec.max_amplitude:.6g} "
                    f"on channel {channel_id!r}",
                )
            )
        lo, hi = spec.detuning_range
        det = pulse.detuning.samples
        if det.min() < lo - 1e-12 * abs(lo) or det.max() > hi + 1e-12 * abs(hi):
            out.append(
                Violation(
                    "detuning",
                    f"detuning in [{det.min():.6g}, {det.max():.6g}] rad/µs leaves "
                    f"[{lo:.6g}, {hi:.6g}] on channel {channel_id!r}",
                )
            )
        if pulse.duration < spec.min_duration:
            out.append(
                Violation(
                    "duration",
                    f"duration {pulse.duration} ns is below the minimum "
                    f"{spec.min_duration} ns on channel {channel_id!r}",
                )
            )
        return out

    def validate_register(self, register) -> list[Violation]:
        from .register import validate_register

        return validate_register(self, register)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "c6": self.c6,
            "min_atom_distance": self.min_atom_distance,
            "max_radius_from_center": self.max_radius_from_center,
            "max_atom_count": self.max_atom_count,
            "channels": [c.to_json() for c in self.channels.values()],
            "supported_bases": sorted(self.supported_bases),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Device:
        return cls(
            name=data["name"],
            c6=float(data["c6"]),
            min_atom_distance=float(data["min_atom_distance"]),
            max_radius_from_center=float(data["max_radius_from_center"]),
            max_atom_count=int(data["max_atom_count"]),
            channels=[ChannelSpec.from_json(c) for c in data["channels"]],
            supported_bases=frozenset(data.get("supported_bases", BASES)),
        )


_TWO_PI = 2 * math.pi

# C6 chosen so that an 8 µm blockade radius maps to 19.10672378540039 rad/µs.
REFERENCE_DEVICE = Device(
    name="reference_device",
    c6=19.10672378540039 * 8**6,
    min_atom_distance=4.0,
    max_radius_from_center=50.0,
    max_atom_count=100,
    channels=[
        ChannelSpec(
            "rydberg_global",
            "Global",
            GROUND_RYDBERG,
            max_amplitude=2.5 * _TWO_PI,
            detuning_range=(-20 * _TWO_PI, 20 * _TWO_PI),
            min_duration=16,
        ),
        ChannelSpec(
            "rydberg_local",
            "Local",
            GROUND_RYDBERG,
            max_amplitude=10 * _TWO_PI,
            detuning_range=(-20 * _TWO_PI, 20 * _TWO_PI),
            min_duration=16,
            retarget_time=220,
            max_targets=4,
        ),
        ChannelSpec(
            "raman_local",
            "Local",
            DIGITAL,
            max_amplitude=4 * _TWO_PI,
            detuning_range=(-20 * _TWO_PI, 20 * _TWO_PI),
            min_duration=16,
            retarget_time=220,
            max_targets=4,
        ),
    ],
)

_BUILTIN = {REFERENCE_DEVICE.name: REFERENCE_DEVICE}


def load_device(path: str | os.PathLike) -> Device:
    with open(path, encoding="utf-8") as fh:
        return Device.from_json(json.load(fh))


def get_device(spec: str | Mapping | Device | None = None) -> Device:
    """Resolve a device from a name, an inline JSON mapping or a file path.

    ``None`` falls back to the file named by ``RYDSEQ_DEVICE_FILE`` and then
    to the built-in reference device.
    """
    if isinstance(spec, Device):
        return spec
    if isinstance(spec, Mapping):
        return Device.from_json(spec)
    if spec is None:
        env = os.environ.get(DEVICE_ENV_VAR)
        return load_device(env) if env else REFERENCE_DEVICE
    if spec in _BUILTIN:
        return _BUILTIN[spec]
    if Path(spec).is_file():
        return load_device(spec)
    raise KeyError(f"unknown device {spec!r}")
