"""State-vector emulation of a sequence on its register.

Units: hbar = 1, energies in rad/µs, times in µs. Atom ``i`` of the register
is the ``i``-th tensor factor (most significant digit of the state index).
Single-atom levels are ordered r < g < h, restricted to the levels the
sequence actually addresses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .device import BASES, DIGITAL, GROUND_RYDBERG, Device
from .register import Register
from .sampler import DriveSamples, sample_sequence
from .sequence import Sequence, SequenceError

__all__ = [
    "LevelStructure",
    "SimConfig",
    "SimResults",
    "build_hamiltonian",
    "run",
    "LeakageError",
    "MEASUREMENT_BITS",
]

_ALL_LEVELS = ("r", "g", "h")
# (lower, upper) level of each addressed transition
TRANSITIONS = {GROUND_RYDBERG: ("g", "r"), DIGITAL: ("g", "h")}
# outcome bit of each level when measuring in a basis
MEASUREMENT_BITS = {
    GROUND_RYDBERG: {"r": 1, "g": 0, "h": 0},
    DIGITAL: {"r": 0, "g": 0, "h": 1},
}
BASIS_LEVELS = {GROUND_RYDBERG: ("r", "g"), DIGITAL: ("g", "h")}

# Gauss-node weights of the 4th-order commutator-free Magnus step
_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_A1 = 0.25 + math.sqrt(3) / 6
_A2 = 0.25 - math.sqrt(3) / 6


class LeakageError(ValueError):
    """Population outside the requested basis exceeds the tolerance."""


@dataclass(frozen=True)
class LevelStructure:
    levels: tuple[str, ...]
    n_atoms: int

    @classmethod
    def from_bases(cls, bases, n_atoms: int) -> LevelStructure:
        wanted = set()
        for b in bases:
            if b not in TRANSITIONS:
                raise ValueError(f"unknown basis {b!r}")
            wanted.update(TRANSITIONS[b])
        if not wanted:
            wanted = set(TRANSITIONS[GROUND_RYDBERG])
        return cls(tuple(l for l in _ALL_LEVELS if l in wanted), n_atoms)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def dim(self) -> int:
        return self.n_levels**self.n_atoms

    @cached_property
    def digits(self) -> np.ndarray:
        """``digits[s, i]`` = level index of atom ``i`` in basis state ``s``."""
        s = np.arange(self.dim)
        powers = self.n_levels ** np.arange(self.n_atoms - 1, -1, -1)
        return (s[:, None] // powers[None, :]) % self.n_levels

    def index(self, labels) -> int:
        """Basis-state index of per-atom level labels, e.g. ``"gr"`` or ``["g", "r"]``."""
        labels = list(labels)
        if len(labels) != self.n_atoms:
            raise ValueError("need one level label per atom")
        idx = 0
        for lab in labels:
            idx = idx * self.n_levels + self.levels.index(lab)
        return idx

    def basis_state(self, labels) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(labels)] = 1.0
        return psi

    def projector_diag(self, atom: int, level: str) -> np.ndarray:
        """Diagonal of |level><level| on ``atom``."""
        return (self.digits[:, atom] == self.levels.index(level)).astype(float)


@dataclass(frozen=True)
class SimConfig:
    sampling_rate: float = 1.0
    initial_state: np.ndarray | None = None
    leakage_tol: float = 1e-2
    seed: int | None = None
    max_dimension: int = 2**14

    def __post_init__(self):
        if not 0 < self.sampling_rate <= 1:
            raise ValueError("sampling_rate must lie in (0, 1]")
        if self.leakage_tol < 0:
            raise ValueError("leakage_tol must be non-negative")

    @property
    def step_ns(self) -> int:
        return max(1, int(round(1 / self.sampling_rate)))


class _Model:
    """Precomputed operator structure for one (register, level structure)."""

    def __init__(self, register: Register, device: Device, structure: LevelStructure, bases):
        self.structure = structure
        n = structure.n_atoms
        L = structure.n_levels
        digits = structure.digits
        dim = structure.dim

        diag = np.zeros(dim)
        if "r" in structure.levels:
            n_r = digits == structure.levels.index("r")
            dist = register.distances()
            for i in range(n):
                for j in range(i):
                    diag += device.c6 / dist[i, j] ** 6 * (n_r[:, i] & n_r[:, j])
        self.static_diag = diag

        lo, hi, chan, zsign = [], [], [], []
        self.channels: list[tuple[int, str]] = []
        for b in bases:
            a_lvl, b_lvl = (structure.levels.index(x) for x in TRANSITIONS[b])
            for i in range(n):
                c = len(self.channels)
                self.channels.append((i, b))
                shift = (b_lvl - a_lvl) * L ** (n - 1 - i)
                low_states = np.nonzero(digits[:, i] == a_lvl)[0]
                lo.append(low_states)
                hi.append(low_states + shift)
                chan.append(np.full(low_states.size, c))
                z = np.zeros(dim)
                z[digits[:, i] == b_lvl] = 1.0
                z[digits[:, i] == a_lvl] = -1.0
                zsign.append(z)
        cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)
        self.lo = cat(lo, np.int64)
        self.hi = cat(hi, np.int64)
        self.chan = cat(chan, np.int64)
        self.zsign = np.array(zsign) if zsign else np.zeros((0, dim))

    def drive_arrays(self, samples: DriveSamples) -> tuple[np.ndarray, np.ndarray]:
        """Per-channel complex couplings and detunings, shape (n_channels, T)."""
        T = samples.duration
        coup = np.zeros((len(self.channels), T), dtype=complex)
        det = np.zeros((len(self.channels), T))
        for c, (i, b) in enumerate(self.channels):
            coup[c] = 0.5 * samples.amp[b][i] * np.exp(-1j * samples.phase[b][i])
            det[c] = samples.det[b][i]
        return coup, det

    def hamiltonian(self, coupling: np.ndarray, detuning: np.ndarray) -> np.ndarray:
        return kernels.fill_hamiltonian(
            self.static_diag, self.lo, self.hi, self.chan, self.zsign,
            np.ascontiguousarray(coupling, dtype=np.complex128),
            np.ascontiguousarray(detuning, dtype=np.float64),
        )


def _structure_for(seq: Sequence, samples: DriveSamples) -> LevelStructure:
    bases = list(samples.bases)
    if not bases and seq.measurement_basis:
        bases = [seq.measurement_basis]
    return LevelStructure.from_bases(bases, len(seq.qubit_ids))


def build_hamiltonian(
    samples: DriveSamples,
    register: Register,
    device: Device,
    structure: LevelStructure,
    tick: int,
) -> np.ndarray:
    """Dense H(t)/hbar at ``tick`` (rad/µs): drives on every addressed transition plus
    the C6/R^6 interaction between Rydberg-excited atoms."""
    if not 0 <= tick < max(samples.duration, 1):
        raise IndexError(f"tick {tick} outside [0, {samples.duration})")
    model = _Model(register, device, structure, samples.bases)
    if samples.duration == 0:
        return model.hamiltonian(np.zeros(len(model.channels), complex), np.zeros(len(model.channels)))
    coup, det = model.drive_arrays(samples)
    return model.hamiltonian(coup[:, tick], det[:, tick])


def _expm_hermitian(ham: np.ndarray, dt: float) -> np.ndarray:
    # zero-phase drives give a real symmetric H; the real solver is much cheaper
    if not np.any(ham.imag):
        ham = ham.real
    w, v = np.linalg.eigh(ham)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def run(seq: Sequence, config: SimConfig | None = None) -> SimResults:
    """Evolve the initial state through the whole sequence.

    Time is cut into macro-steps of ``round(1/sampling_rate)`` ns. Each step
    uses a fourth-order commutator-free Magnus propagator built from the
    Hamiltonian at the two Gauss nodes of the step (two dense exponentials).
    A step whose nodes fall in the same tick is propagated exactly.
    Consecutive identical steps reuse one propagator.
    """
    config = config or SimConfig()
    if seq.is_parametrized():
        raise SequenceError("cannot simulate a parametrized sequence; call build() first")
    samples = sample_sequence(seq)
    structure = _structure_for(seq, samples)
    if structure.dim > config.max_dimension:
        raise MemoryError(
            f"Hilbert space dimension {structure.dim} exceeds the cap of {config.max_dimension}"
        )
    model = _Model(seq.register, seq.device, structure, samples.bases)

    if config.initial_state is None:
        psi0 = structure.basis_state("g" * structure.n_atoms)
    else:
        psi0 = np.asarray(config.initial_state, dtype=complex).ravel()
        if psi0.shape != (structure.dim,):
            raise ValueError(f"initial state must have dimension {structure.dim}")
        if abs(np.linalg.norm(psi0) - 1) > 1e-12:
            raise ValueError("initial state must be normalized")

    T = samples.duration
    step = config.step_ns
    bounds = np.array(list(range(0, T, step)) + [T]) if T else np.array([0])
    states = [psi0]
    if T:
        coup, det = model.drive_arrays(samples)
        t0 = bounds[:-1]
        h = np.diff(bounds)
        k1 = t0 + np.floor(_C1 * h).astype(int)
        k2 = np.minimum(t0 + np.floor(_C2 * h).astype(int), bounds[1:] - 1)
        # one row per step: step length and drive values at both nodes
        key = np.concatenate(
            [h[:, None], coup[:, k1].T.real, coup[:, k1].T.imag, det[:, k1].T,
             coup[:, k2].T.real, coup[:, k2].T.imag, det[:, k2].T],
            axis=1,
        )
        half = 3 * len(model.channels)
        change = np.ones(len(h), dtype=bool)
        change[1:] = np.any(key[1:] != key[:-1], axis=1)
        starts = np.nonzero(change)[0]
        ends = np.append(starts[1:], len(h))
        psi = psi0
        for s, e in zip(starts, ends):
            dt = h[s] * 1e-3
            if k1[s] == k2[s] or np.array_equal(key[s, 1 : 1 + half], key[s, 1 + half :]):
                H1 = model.hamiltonian(coup[:, k1[s]], det[:, k1[s]])
                U = _expm_hermitian(H1, dt)
            else:
                H1 = model.hamiltonian(coup[:, k1[s]], det[:, k1[s]])
                H2 = model.hamiltonian(coup[:, k2[s]], det[:, k2[s]])
                U = _expm_hermitian(_A2 * H1 + _A1 * H2, dt) @ _expm_hermitian(
                    _A1 * H1 + _A2 * H2, dt
                )
            block = kernels.propagate_repeated(np.ascontiguousarray(U), np.ascontiguousarray(psi), int(e - s))
            states.extend(block)
            psi = block[-1]
    return SimResults(
        times=bounds * 1e-3,
        states=np.array(states),
        structure=structure,
        qubits=seq.qubit_ids,
        meas_basis=seq.measurement_basis,
        leakage_tol=config.leakage_tol,
        seed=config.seed,
    )


@dataclass(frozen=True, eq=False)
class SimResults:
    times: np.ndarray
    states: np.ndarray
    structure: LevelStructure
    qubits: tuple[str, ...]
    meas_basis: str | None = None
    leakage_tol: float = 1e-2
    seed: int | None = None

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def expect(self, operators) -> list[np.ndarray]:
        """<psi(t)|O|psi(t)> for each operator (dense matrix or diagonal vector)."""
        out = []
        dim = self.structure.dim
        for op in operators:
            op = np.asarray(op)
            if op.ndim == 1:
                if op.shape != (dim,):
                    raise ValueError(f"operator dimension {op.shape[0]} != {dim}")
                vals = np.einsum("ti,i,ti->t", self.states.conj(), op, self.states)
            elif op.shape == (dim, dim):
                vals = np.einsum("ti,ij,tj->t", self.states.conj(), op, self.states)
            else:
                raise ValueError(f"operator shape {op.shape} does not match dimension {dim}")
            out.append(vals.real if np.allclose(vals.imag, 0, atol=1e-12) else vals)
        return out

    def _reduction_map(self, basis: str) -> np.ndarray:
        """Full-space index of each reduced basis state (-1 if unavailable)."""
        keep = BASIS_LEVELS[basis]
        n = self.structure.n_atoms
        red = np.arange(2**n)
        bits = (red[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
        L = self.structure.n_levels
        full = np.zeros(red.size, dtype=np.int64)
        for i in range(n):
            lv = np.array([self.structure.levels.index(x) if x in self.structure.levels else -1 for x in keep])
            d = lv[bits[:, i]]
            full = np.where((full >= 0) & (d >= 0), full * L + d, -1)
        return full

    def get_final_state(self, reduce_to_basis: str | None = None, tol: float | None = None) -> np.ndarray:
        """Last state, optionally projected on a two-level basis per atom and renormalized."""
        psi = self.final_state
        if reduce_to_basis is None:
            return psi.copy()
        if reduce_to_basis not in BASIS_LEVELS:
            raise ValueError(f"unknown basis {reduce_to_basis!r}")
        tol = self.leakage_tol if tol is None else tol
        idx = self._reduction_map(reduce_to_basis)
        red = np.where(idx >= 0, psi[np.maximum(idx, 0)], 0)
        kept = float(np.vdot(red, red).real)
        leak = 1.0 - kept
        if leak > tol:
            raise LeakageError(
                f"population {leak:.3g} outside the {reduce_to_basis!r} basis exceeds {tol:.3g}"
            )
        return red / math.sqrt(kept)

    def _bit_keys(self, basis: str) -> np.ndarray:
        bits_of = np.array([MEASUREMENT_BITS[basis][l] for l in self.structure.levels])
        b = bits_of[self.structure.digits]
        n = self.structure.n_atoms
        return (b * (1 << np.arange(n - 1, -1, -1))[None, :]).sum(axis=1).astype(np.int64)

    def _resolve_basis(self, meas_basis: str | None) -> str:
        basis = meas_basis or self.meas_basis
        if basis is None:
            raise ValueError("no measurement basis: measure the sequence or pass meas_basis")
        if basis not in BASES:
            raise ValueError(f"unknown basis {basis!r}")
        return basis

    def bit_probabilities(self, meas_basis: str | None = None, state_index: int = -1) -> dict[str, float]:
        """Exact outcome distribution of the chosen state (default: final)."""
        basis = self._resolve_basis(meas_basis)
        probs = np.abs(self.states[state_index]) ** 2
        probs = probs / probs.sum()
        n = self.structure.n_atoms
        dist = kernels.bit_distribution(probs, self._bit_keys(basis), 1 << n)
        return {format(k, f"0{n}b"): float(p) for k, p in enumerate(dist) if p > 0}

    def sample_final_state(self, n_samples=1000, meas_basis: str | None = None, seed=None) -> dict[str, int]:
        """Multinomial sample of measurement outcomes; bitstrings in register order."""
        if float(n_samples) != int(n_samples) or int(n_samples) < 1:
            raise ValueError("n_samples must be a positive integer")
        basis = self._resolve_basis(meas_basis)
        probs = np.abs(self.final_state) ** 2
        probs = probs / probs.sum()
        n = self.structure.n_atoms
        dist = kernels.bit_distribution(probs, self._bit_keys(basis), 1 << n)
        dist = np.clip(dist, 0, None)
        dist /= dist.sum()
        rng = np.random.default_rng(self.seed if seed is None else seed)
        counts = rng.multinomial(int(n_samples), dist)
        return {format(k, f"0{n}b"): int(c) for k, c in enumerate(counts) if c}

    def to_json(self) -> dict:
        return {
            "qubits": list(self.qubits),
            "levels": list(self.structure.levels),
            "measurement_basis": self.meas_basis,
            "times_us": self.times.tolist(),
            "states": [[[float(z.real), float(z.imag)] for z in psi] for psi in self.states],
        }
