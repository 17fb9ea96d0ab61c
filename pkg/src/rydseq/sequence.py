"""Per-channel pulse timelines with cross-channel scheduling rules.

Every builder call is recorded. While a sequence holds only concrete values
the calls are also executed immediately; once a variable is used the
sequence becomes parametrized and later calls are only recorded, to be
replayed by :meth:`Sequence.build`.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import wraps
from typing import Any

import numpy as np

from .device import Device, ValidationError
from .params import Variable, evaluate, is_parametrized, variables_in
from .register import Register
from .signal import Pulse

__all__ = ["TimeSlot", "Sequence", "SequenceError", "Call", "PROTOCOLS"]

PROTOCOLS = ("min-delay", "wait-for-all", "no-delay")
_TWO_PI = 2 * math.pi


class SequenceError(RuntimeError):
    """Illegal builder call (sealed sequence, unknown channel, bad target...)."""


@dataclass(frozen=True)
class TimeSlot:
    kind: str
    start: int
    end: int
    targets: frozenset[str]
    pulse: Pulse | None = None

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    kwargs: dict = field(default_factory=dict)


@dataclass
class _Channel:
    name: str
    spec: Any
    targets: frozenset[str] | None = None
    slots: list[TimeSlot] = field(default_factory=list)

    @property
    def end(self) -> int:
        return self.slots[-1].end if self.slots else 0


def _builder(always_run: bool = False):
    def deco(method):
        @wraps(method)
        def wrapper(self, *args, **kwargs):
            if self._measured:
                raise SequenceError("the sequence was measured; no further changes are allowed")
            param = is_parametrized(args) or is_parametrized(kwargs)
            if param:
                if always_run:
                    raise SequenceError(f"{method.__name__}() does not accept variables")
                unknown = variables_in((args, kwargs)) - set(self._variables)
                if unknown:
                    raise SequenceError(f"variables {sorted(unknown)} are not declared here")
            if always_run or not (param or self._parametrized):
                method(self, *args, **kwargs)
            if param:
                self._parametrized = True
            self._calls.append(Call(method.__name__, args, dict(kwargs)))

        return wrapper

    return deco


def _as_qubit_set(qubits) -> frozenset[str]:
    if isinstance(qubits, str):
        return frozenset([qubits])
    return frozenset(qubits)


class Sequence:
    """Pulse schedule on a register, checked against a device.

    Example::

        seq = Sequence(reg, REFERENCE_DEVICE)
        seq.declare_channel("ising", "rydberg_global")
        seq.add(pulse, "ising")
        seq.measure("ground-rydberg")
    """

    def __init__(self, register: Register, device: Device):
        violations = device.validate_register(register)
        if violations:
            raise ValidationError(violations)
        self.register = register
        self.device = device
        self._channels: dict[str, _Channel] = {}
        self._phase_ref: dict[tuple[str, str], float] = {}
        self._measurement: str | None = None
        self._measured = False
        self._parametrized = False
        self._variables: dict[str, Variable] = {}
        self._calls: list[Call] = []

    # -- introspection -----------------------------------------------------

    @property
    def qubit_ids(self) -> tuple[str, ...]:
        return self.register.qubit_ids

    @property
    def declared_channels(self) -> dict[str, Any]:
        return {name: ch.spec for name, ch in self._channels.items()}

    @property
    def available_channels(self) -> dict[str, Any]:
        used = {ch.spec.id for ch in self._channels.values()}
        return {cid: spec for cid, spec in self.device.channels.items() if cid not in used}

    @property
    def variables(self) -> dict[str, Variable]:
        return dict(self._variables)

    @property
    def calls(self) -> tuple[Call, ...]:
        return tuple(self._calls)

    @property
    def measurement_basis(self) -> str | None:
        return self._measurement

    @property
    def used_bases(self) -> set[str]:
        return {ch.spec.basis for ch in self._channels.values()}

    def is_parametrized(self) -> bool:
        return self._parametrized

    def is_measured(self) -> bool:
        return self._measured

    def _require_concrete(self, what: str) -> None:
        if self._parametrized:
            raise SequenceError(f"cannot {what} a parametrized sequence; call build() first")

    def _channel(self, name: str) -> _Channel:
        try:
            return self._channels[name]
        except KeyError:
            raise SequenceError(f"channel {name!r} has not been declared") from None

    def slots(self, channel: str) -> tuple[TimeSlot, ...]:
        self._require_concrete("inspect")
        return tuple(self._channel(channel).slots)

    def current_target(self, channel: str) -> frozenset[str] | None:
        return self._channel(channel).targets

    def channel_end(self, channel: str) -> int:
        self._require_concrete("inspect")
        return self._channel(channel).end

    def phase_reference(self, qubit: str, basis: str) -> float:
        return self._phase_ref.get((qubit, basis), 0.0)

    def get_duration(self, channel: str | None = None) -> int:
        """Total duration in ns (max channel end), or one channel's end."""
        self._require_concrete("time")
        if channel is not None:
            return self._channel(channel).end
        return max((ch.end for ch in self._channels.values()), default=0)

    total_duration = property(get_duration)

    # -- builder calls -----------------------------------------------------

    @_builder(always_run=True)
    def declare_channel(self, name: str, channel_id: str, initial_target=None) -> None:
        if name in self._channels:
            raise SequenceError(f"a channel named {name!r} is already declared")
        if channel_id not in self.device.channels:
            raise SequenceError(
                f"device {self.device.name!r} has no channel {channel_id!r}"
            )
        if channel_id not in self.available_channels:
            raise SequenceError(f"channel {channel_id!r} can only be declared once")
        spec = self.device.channels[channel_id]
        ch = _Channel(name, spec)
        if spec.addressing == "Global":
            if initial_target is not None:
                raise SequenceError("Global channels always target the entire register")
            ch.targets = frozenset(self.qubit_ids)
        elif initial_target is not None:
            targets = self._checked_targets(initial_target, spec)
            ch.targets = targets
            ch.slots.append(TimeSlot("target", 0, 0, targets))
        self._channels[name] = ch

    def declare_variable(self, name: str, size: int = 1) -> Variable:
        if name in self._variables:
            raise SequenceError(f"variable {name!r} is already declared")
        if self._measured:
            raise SequenceError("the sequence was measured; no further changes are allowed")
        var = Variable(name, size)
        self._variables[name] = var
        return var

    def _checked_targets(self, qubits, spec) -> frozenset[str]:
        targets = _as_qubit_set(qubits)
        if not targets:
            raise SequenceError("at least one qubit must be targeted")
        unknown = [q for q in targets if q not in self.register]
        if unknown:
            raise SequenceError(f"unknown qubits {sorted(unknown)}")
        if spec.max_targets is not None and len(targets) > spec.max_targets:
            raise SequenceError(
                f"channel {spec.id!r} can target at most {spec.max_targets} qubits at once"
            )
        return targets

    @_builder()
    def target(self, qubits, channel: str) -> None:
        ch = self._channel(channel)
        if ch.spec.addressing == "Global":
            raise SequenceError(f"channel {channel!r} is Global and cannot be retargeted")
        targets = self._checked_targets(qubits, ch.spec)
        start = ch.end
        # the very first target of a channel is free
        cost = 0 if ch.targets is None else ch.spec.retarget_time
        ch.slots.append(TimeSlot("target", start, start + cost, targets))
        ch.targets = targets

    @_builder()
    def add(self, pulse: Pulse, channel: str, protocol: str = "min-delay") -> None:
        ch = self._channel(channel)
        if protocol not in PROTOCOLS:
            raise SequenceError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
        if not isinstance(pulse, Pulse):
            raise TypeError("add() expects a Pulse")
        if ch.targets is None:
            raise SequenceError(f"channel {channel!r} has no target yet")
        violations = self.device.validate_pulse(ch.spec.id, pulse)
        if violations:
            raise ValidationError(violations)

        basis = ch.spec.basis
        refs = {self._phase_ref.get((q, basis), 0.0) for q in ch.targets}
        ref = next(iter(refs))
        if any(_phase_distance(r, ref) > 1e-9 for r in refs):
            raise SequenceError(
                f"targets of channel {channel!r} have different phase references in basis {basis!r}"
            )

        t0 = self._start_time(ch, protocol)
        if t0 > ch.end:
            ch.slots.append(TimeSlot("delay", ch.end, t0, ch.targets))
        shifted = pulse if ref == 0.0 else pulse.with_phase(pulse.phase + ref)
        ch.slots.append(TimeSlot("pulse", t0, t0 + pulse.duration, ch.targets, shifted))

    def _start_time(self, ch: _Channel, protocol: str) -> int:
        if protocol == "no-delay":
            return ch.end
        if protocol == "wait-for-all":
            return max(c.end for c in self._channels.values())
        t0 = ch.end
        for other in self._channels.values():
            if other is ch:
                continue
            for slot in other.slots:
                if slot.kind == "pulse" and slot.targets & ch.targets:
                    t0 = max(t0, slot.end)
        return t0

    @_builder()
    def align(self, *channels: str) -> None:
        if len(channels) < 2:
            raise SequenceError("align() needs at least two channels")
        if len(set(channels)) != len(channels):
            raise SequenceError("align() got duplicate channel names")
        chans = [self._channel(c) for c in channels]
        t_end = max(c.end for c in chans)
        for c in chans:
            if c.end < t_end:
                c.slots.append(TimeSlot("delay", c.end, t_end, c.targets or frozenset()))

    @_builder()
    def delay(self, duration, channel: str) -> None:
        ch = self._channel(channel)
        d = float(duration)
        if not math.isfinite(d) or abs(d - round(d)) > 1e-9:
            raise SequenceError(f"delay must be an integer number of ns, got {duration}")
        d = int(round(d))
        if d < 0:
            raise SequenceError(f"delay must be non-negative, got {d}")
        if d:
            ch.slots.append(TimeSlot("delay", ch.end, ch.end + d, ch.targets or frozenset()))

    @_builder()
    def phase_shift(self, phi: float, *qubits: str, basis: str = "digital") -> None:
        """Shift the phase reference of ``qubits`` in ``basis`` by ``phi`` rad (no time)."""
        if basis not in self.device.supported_bases:
            raise SequenceError(f"basis {basis!r} is not supported by {self.device.name!r}")
        if not qubits:
            raise SequenceError("phase_shift() needs at least one qubit")
        for q in qubits:
            if q not in self.register:
                raise SequenceError(f"unknown qubit {q!r}")
        phi = float(phi)
        for q in qubits:
            key = (q, basis)
            self._phase_ref[key] = (self._phase_ref.get(key, 0.0) + phi) % _TWO_PI

    @_builder(always_run=True)
    def measure(self, basis: str = "ground-rydberg") -> None:
        if basis not in self.device.supported_bases:
            raise SequenceError(
                f"basis {basis!r} is not supported; choose from {sorted(self.device.supported_bases)}"
            )
        self._measurement = basis
        self._measured = True

    # -- parametrization ---------------------------------------------------

    def build(self, **values) -> Sequence:
        """Replay the recorded calls with concrete variable values."""
        missing = set(self._variables) - set(values)
        extra = set(values) - set(self._variables)
        if missing or extra:
            msg = []
            if missing:
                msg.append(f"missing values for {sorted(missing)}")
            if extra:
                msg.append(f"unknown variables {sorted(extra)}")
            raise SequenceError("; ".join(msg))
        vals = {}
        for name, var in self._variables.items():
            arr = np.atleast_1d(np.asarray(values[name], dtype=float))
            if arr.ndim != 1 or arr.size != var.size:
                raise SequenceError(
                    f"variable {name!r} has size {var.size}, got {arr.size} value(s)"
                )
            if not np.all(np.isfinite(arr)):
                raise SequenceError(f"variable {name!r} received non-finite values")
            vals[name] = arr

        new = Sequence(self.register, self.device)
        for call in self._calls:
            args = evaluate(call.args, vals)
            kwargs = evaluate(call.kwargs, vals)
            if call.name == "delay":
                args, kwargs = _round_delay(call, args, kwargs)
            getattr(new, call.name)(*args, **kwargs)
        return new

    # -- output ------------------------------------------------------------

    def draw_data(self) -> dict:
        """Per-channel slot description with per-ns amplitude/detuning values."""
        self._require_concrete("draw")
        channels = []
        for ch in self._channels.values():
            slots = []
            for s in ch.slots:
                entry = {
                    "kind": s.kind,
                    "start": s.start,
                    "end": s.end,
                    "targets": sorted(s.targets, key=self.register.index),
                }
                if s.pulse is not None:
                    entry["amplitude"] = s.pulse.amplitude.samples.tolist()
                    entry["detuning"] = s.pulse.detuning.samples.tolist()
                    entry["phase"] = s.pulse.phase
                slots.append(entry)
            channels.append(
                {
                    "name": ch.name,
                    "channel_id": ch.spec.id,
                    "addressing": ch.spec.addressing,
                    "basis": ch.spec.basis,
                    "end": ch.end,
                    "slots": slots,
                }
            )
        return {
            "duration": self.get_duration(),
            "measurement": self._measurement,
            "channels": channels,
        }

    def __str__(self) -> str:
        if self._parametrized:
            lines = ["Parametrized sequence; recorded calls:"]
            lines += [f"  {c.name}{c.args!r} {c.kwargs or ''}".rstrip() for c in self._calls]
            return "\n".join(lines)
        from .draw import render_text

        return render_text(self)


def _phase_distance(a: float, b: float) -> float:
    d = abs(a - b) % _TWO_PI
    return min(d, _TWO_PI - d)


def _round_delay(call: Call, args, kwargs):
    raw = call.args[0] if call.args else call.kwargs.get("duration")
    if not is_parametrized(raw):
        return args, kwargs
    if call.args:
        args = (int(math.floor(float(args[0]) + 0.5)),) + tuple(args[1:])
    else:
        kwargs = dict(kwargs, duration=int(math.floor(float(kwargs["duration"]) + 0.5)))
    return args, kwargs


def same_structure(a: Sequence, b: Sequence) -> bool:
    """True when both sequences have the same channels and slot kinds in order."""
    if list(a.declared_channels) != list(b.declared_channels):
        return False
    for name in a.declared_channels:
        ka = [(s.kind, s.targets) for s in a.slots(name)]
        kb = [(s.kind, s.targets) for s in b.slots(name)]
        if ka != kb:
            return False
    return True


def iter_pulse_slots(seq: Sequence) -> Iterable[tuple[str, TimeSlot]]:
    for name in seq.declared_channels:
        for slot in seq.slots(name):
            if slot.kind == "pulse":
                yield name, slot

