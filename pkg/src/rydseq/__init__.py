"""Build, validate and emulate pulse sequences for neutral-atom arrays."""

from .analysis import LatticeMap, OccupationStats, g2, g2_map, mis_cost, neel_score
from .device import REFERENCE_DEVICE, ChannelSpec, Device, ValidationError, Violation, get_device
from .document import DocumentError, dumps, load, loads, save
from .emulator import LeakageError, LevelStructure, SimConfig, SimResults, build_hamiltonian, run
from .optim import nelder_mead, qaoa_loop, sweep
from .register import Register, blockade_graph
from .sampler import DriveSamples, OverlapError, sample_sequence
from .sequence import Sequence, SequenceError, TimeSlot
from .signal import (
    ArbitraryWaveform,
    BlackmanWaveform,
    ConstantWaveform,
    Pulse,
    RampWaveform,
    Waveform,
)

__version__ = "0.1.0"

__all__ = [
    "ArbitraryWaveform",
    "BlackmanWaveform",
    "ChannelSpec",
    "ConstantWaveform",
    "Device",
    "DocumentError",
    "DriveSamples",
    "LatticeMap",
    "LeakageError",
    "LevelStructure",
    "OccupationStats",
    "OverlapError",
    "REFERENCE_DEVICE",
    "Pulse",
    "RampWaveform",
    "Register",
    "Sequence",
    "SequenceError",
    "SimConfig",
    "SimResults",
    "TimeSlot",
    "ValidationError",
    "Violation",
    "Waveform",
    "blockade_graph",
    "build_hamiltonian",
    "dumps",
    "g2",
    "g2_map",
    "get_device",
    "load",
    "loads",
    "mis_cost",
    "neel_score",
    "nelder_mead",
    "qaoa_loop",
    "run",
    "sample_sequence",
    "save",
    "sweep",
]
