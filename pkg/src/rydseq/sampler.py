"""Flatten a scheduled sequence into per-qubit, per-basis drive samples."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .device import BASES
from .sequence import Sequence, SequenceError

__all__ = ["DriveSamples", "sample_sequence", "OverlapError"]


class OverlapError(SequenceError):
    """Two channels drive the same qubit and transition at the same tick."""


@dataclass(frozen=True)
class DriveSamples:
    """Drive arrays indexed ``[basis][qubit_index, tick]`` (rad/µs and rad)."""

    duration: int
    qubits: tuple[str, ...]
    bases: tuple[str, ...]
    amp: dict[str, np.ndarray]
    det: dict[str, np.ndarray]
    phase: dict[str, np.ndarray]

    def get(self, qubit: str, basis: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        i = self.qubits.index(qubit)
        if basis not in self.amp:
            z = np.zeros(self.duration)
            return z, z.copy(), z.copy()
        return self.amp[basis][i], self.det[basis][i], self.phase[basis][i]

    def to_csv(self, fh=None) -> str | None:
        """Write ``tick,qubit,basis,amp,det,phase`` rows; returns text if ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tick", "qubit", "basis", "amp", "det", "phase"])
        for basis in self.bases:
            for i, q in enumerate(self.qubits):
                a, d, p = self.amp[basis][i], self.det[basis][i], self.phase[basis][i]
                for t in range(self.duration):
                    w.writerow([t, q, basis, repr(float(a[t])), repr(float(d[t])), repr(float(p[t]))])
        return buf.getvalue() if fh is None else None

    def __eq__(self, other) -> bool:
        if not isinstance(other, DriveSamples):
            return NotImplemented
        if (self.duration, self.qubits, self.bases) != (other.duration, other.qubits, other.bases):
            return False
        return all(
            np.array_equal(getattr(self, f)[b], getattr(other, f)[b])
            for f in ("amp", "det", "phase")
            for b in self.bases
        )


def sample_sequence(seq: Sequence) -> DriveSamples:
    """Write every pulse slot into its targets' arrays.

    Global channels target every qubit, so they broadcast. Raises
    :class:`OverlapError` when two non-zero amplitudes meet on the same
    (qubit, basis, tick).
    """
    if seq.is_parametrized():
        raise SequenceError("cannot sample a parametrized sequence; call build() first")
    T = seq.get_duration()
    qubits = seq.qubit_ids
    n = len(qubits)
    bases = tuple(b for b in BASES if b in seq.used_bases)
    amp = {b: np.zeros((n, T)) for b in bases}
    det = {b: np.zeros((n, T)) for b in bases}
    phase = {b: np.zeros((n, T)) for b in bases}
    owner = {b: np.full((n, T), -1, dtype=np.int64) for b in bases}

    for c_idx, (name, spec) in enumerate(seq.declared_channels.items()):
        b = spec.basis
        for slot in seq.slots(name):
            if slot.kind != "pulse":
                continue
            p = slot.pulse
            a_s = p.amplitude.samples
            d_s = p.detuning.samples
            sl = slice(slot.start, slot.end)
            on = a_s > 0
            for q in slot.targets:
                i = seq.register.index(q)
                clash = (owner[b][i, sl] != -1) & (owner[b][i, sl] != c_idx) & on
                if np.any(clash) and np.any(amp[b][i, sl][clash] > 0):
                    t = slot.start + int(np.argmax(clash))
                    raise OverlapError(
                        f"qubit {q!r} is driven by two channels in basis {b!r} at t={t} ns"
                    )
                amp[b][i, sl] += a_s
                det[b][i, sl] += d_s
                phase[b][i, sl] = np.where(on, p.phase, phase[b][i, sl])
                owner[b][i, sl] = np.where(on, c_idx, owner[b][i, sl])

    for arrs in (amp, det, phase):
        for a in arrs.values():
            a.setflags(write=False)
    return DriveSamples(T, qubits, bases, amp, det, phase)
