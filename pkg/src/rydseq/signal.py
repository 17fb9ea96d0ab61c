"""Waveforms and pulses.

Every waveform is sampled once per 1 ns clock tick and carries values in
rad/µs. Integrals are therefore ``sum(samples) * 1e-3`` rad.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .params import check_finite, deferrable, parametrizable

__all__ = [
    "Waveform",
    "ConstantWaveform",
    "RampWaveform",
    "BlackmanWaveform",
    "ArbitraryWaveform",
    "Pulse",
    "wf_samples",
    "wf_integral",
    "blackman_from_max_val",
    "make_pulse",
    "constant_detuning",
    "constant_amplitude",
    "constant_pulse",
]

TWO_PI = 2 * math.pi
NS_TO_US = 1e-3

# coefficients of the Blackman window
_A0, _A1, _A2 = 0.42, 0.5, 0.08


def _check_duration(duration) -> int:
    d = float(duration)
    if not math.isfinite(d) or abs(d - round(d)) > 1e-9:
        raise ValueError(f"duration must be an integer number of ns, got {duration}")
    d = int(round(d))
    if d < 1:
        raise ValueError(f"duration must be at least 1 ns, got {d}")
    return d


class Waveform:
    """Base class: a real control signal sampled on the 1 ns grid."""

    kind: str = ""

    def __init__(self, duration):
        self._duration = _check_duration(duration)

    @property
    def duration(self) -> int:
        return self._duration

    @cached_property
    def samples(self) -> np.ndarray:
        s = np.ascontiguousarray(self._render(), dtype=float)
        s.setflags(write=False)
        return s

    def _render(self) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    @property
    def integral(self) -> float:
        """Area in rad."""
        return float(np.sum(self.samples)) * NS_TO_US

    @property
    def params(self) -> dict:
        raise NotImplementedError  # pragma: no cover

    def _key(self):
        return (self.kind, self.duration, tuple(sorted(self.params.items())))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Waveform):
            return NotImplemented
        if self.kind != other.kind or self.duration != other.duration:
            return False
        return np.array_equal(self.samples, other.samples)

    def __hash__(self) -> int:
        return hash((self.kind, self.duration, self.samples.tobytes()))

    def __repr__(self) -> str:
        p = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}(duration={self.duration}, {p})"


@deferrable("ConstantWaveform")
class ConstantWaveform(Waveform):
    kind = "constant"

    def __init__(self, duration, value):
        super().__init__(duration)
        self.value = check_finite(value, "value")

    def _render(self):
        return np.full(self.duration, self.value)

    @property
    def params(self):
        return {"value": self.value}


@deferrable("RampWaveform")
class RampWaveform(Waveform):
    """Linear ramp from ``start`` (first tick) to ``stop`` (last tick)."""

    kind = "ramp"

    def __init__(self, duration, start, stop):
        super().__init__(duration)
        self.start = check_finite(start, "start")
        self.stop = check_finite(stop, "stop")

    def _render(self):
        if self.duration == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.duration)

    @property
    def params(self):
        return {"start": self.start, "stop": self.stop}


def _blackman_window(duration: int) -> np.ndarray:
    # Sampled at tick midpoints: sum is 0.42*T exactly for T >= 3 and the
    # window is symmetric under k -> T-1-k.
    x = (np.arange(duration) + 0.5) / duration
    return _A0 - _A1 * np.cos(TWO_PI * x) + _A2 * np.cos(2 * TWO_PI * x)


@deferrable("BlackmanWaveform")
class BlackmanWaveform(Waveform):
    """Blackman window of a given duration, scaled to enclose ``area`` rad."""

    kind = "blackman"

    def __init__(self, duration, area):
        super().__init__(duration)
        self.area = check_finite(area, "area")

    def _render(self):
        w = _blackman_window(self.duration)
        return w * (self.area / (np.sum(w) * NS_TO_US))

    @property
    def params(self):
        return {"area": self.area}

    @staticmethod
    @parametrizable("BlackmanWaveform.from_max_val")
    def from_max_val(max_val, area) -> BlackmanWaveform:
        """Shortest Blackman pulse of ``area`` whose peak stays within ``max_val``."""
        max_val = check_finite(max_val, "max_val")
        area = check_finite(area, "area")
        if max_val == 0 or area == 0 or (max_val > 0) != (area > 0):
            raise ValueError("max_val and area must be non-zero and share the same sign")
        # the 1e-9 slack keeps exact multiples from being bumped up a tick
        duration = max(math.ceil(area / (_A0 * max_val) / NS_TO_US - 1e-9), 1)
        wf = BlackmanWaveform(duration, area)
        # very short windows do not sum to 0.42*T; lengthen until the peak fits
        # (odd T samples the peak itself, so allow rounding noise)
        while np.max(np.abs(wf.samples)) > abs(max_val) * (1 + 1e-12):
            wf = BlackmanWaveform(wf.duration + 1, area)
        return wf


blackman_from_max_val = BlackmanWaveform.from_max_val


@deferrable("ArbitraryWaveform")
class ArbitraryWaveform(Waveform):
    kind = "arbitrary"

    def __init__(self, samples):
        arr = np.array(samples, dtype=float).ravel()
        if not np.all(np.isfinite(arr)):
            raise ValueError("arbitrary waveform samples must be finite")
        super().__init__(arr.size)
        self._values = arr

    def _render(self):
        return self._values.copy()

    @property
    def params(self):
        return {"samples": self._values.tolist()}


def wf_samples(wf: Waveform) -> np.ndarray:
    return wf.samples


def wf_integral(wf: Waveform) -> float:
    return wf.integral


def _normalize_phase(phase: float) -> float:
    p = math.fmod(check_finite(phase, "phase"), TWO_PI)
    if p < 0:
        p += TWO_PI
    # snap so that phases differing by 2*pi store identically
    p = round(p, 12)
    return 0.0 if p >= round(TWO_PI, 12) else p


@deferrable("Pulse")
class Pulse:
    """Amplitude waveform, detuning waveform and a constant phase on one transition."""

    def __init__(self, amplitude: Waveform, detuning: Waveform, phase: float):
        if not isinstance(amplitude, Waveform) or not isinstance(detuning, Waveform):
            raise TypeError("amplitude and detuning must be waveforms")
        if amplitude.duration != detuning.duration:
            raise ValueError(
                f"amplitude and detuning durations differ "
                f"({amplitude.duration} != {detuning.duration})"
            )
        if np.any(amplitude.samples < 0):
            raise ValueError("amplitude samples must be non-negative")
        self.amplitude = amplitude
        self.detuning = detuning
        self.phase = _normalize_phase(phase)

    @property
    def duration(self) -> int:
        return self.amplitude.duration

    @staticmethod
    @parametrizable("Pulse.constant_detuning")
    def constant_detuning(amplitude, detuning, phase) -> Pulse:
        return Pulse(amplitude, ConstantWaveform(amplitude.duration, detuning), phase)

    @staticmethod
    @parametrizable("Pulse.constant_amplitude")
    def constant_amplitude(amplitude, detuning, phase) -> Pulse:
        return Pulse(ConstantWaveform(detuning.duration, amplitude), detuning, phase)

    @staticmethod
    @parametrizable("Pulse.constant_pulse")
    def constant_pulse(duration, amplitude, detuning, phase) -> Pulse:
        return Pulse(
            ConstantWaveform(duration, amplitude),
            ConstantWaveform(duration, detuning),
            phase,
        )

    def with_phase(self, phase: float) -> Pulse:
        return Pulse(self.amplitude, self.detuning, phase)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pulse):
            return NotImplemented
        return (
            self.amplitude == other.amplitude
            and self.detuning == other.detuning
            and self.phase == other.phase
        )

    def __hash__(self) -> int:
        return hash((self.amplitude, self.detuning, self.phase))

    def __repr__(self) -> str:
        return f"Pulse(amp={self.amplitude!r}, det={self.detuning!r}, phase={self.phase:.6g})"


make_pulse = Pulse
constant_detuning = Pulse.constant_detuning
constant_amplitude = Pulse.constant_amplitude
constant_pulse = Pulse.constant_pulse
