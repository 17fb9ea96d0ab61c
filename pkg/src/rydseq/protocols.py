"""Ready-made sequences: Bell pair, controlled-Z, antiferromagnetic ramp, QAOA for MIS."""

from __future__ import annotations

import math

import numpy as np

from .device import REFERENCE_DEVICE, Device
from .register import Register, blockade_graph
from .sequence import Sequence
from .signal import BlackmanWaveform, Pulse, RampWaveform

__all__ = [
    "bell_register",
    "bell_sequence",
    "cz_sequence",
    "afm_parameters",
    "afm_sequence",
    "afm_sweep_sequence",
    "mis_register",
    "mis_edges",
    "qaoa_mis_sequence",
]

TWO_PI = 2 * math.pi
MIS_POSITIONS = [[0.0, 0.0], [-4.0, -7.0], [4.0, -7.0], [8.0, 6.0], [-8.0, 6.0]]


def bell_register() -> Register:
    return Register({"c": (-2.0, 0.0), "t": (2.0, 0.0)})


def _cz_pulses(device: Device, two_pi_duration: int | None):
    pi_pulse = Pulse.constant_detuning(BlackmanWaveform(200, math.pi), 0.0, 0.0)
    if two_pi_duration is None:
        wf = BlackmanWaveform.from_max_val(device.rabi_from_blockade(8.0), TWO_PI)
    else:
        wf = BlackmanWaveform(two_pi_duration, TWO_PI)
    return pi_pulse, Pulse.constant_detuning(wf, 0.0, 0.0)


def bell_sequence(device: Device = REFERENCE_DEVICE, two_pi_duration: int | None = None) -> Sequence:
    """Hadamard-like rotations around a blockade CZ, measured in the digital basis."""
    seq = Sequence(bell_register(), device)
    seq.declare_channel("digital", "raman_local")
    seq.declare_channel("rydberg", "rydberg_local", initial_target="c")

    half_pi = BlackmanWaveform(200, math.pi / 2)
    ry = Pulse.constant_detuning(half_pi, 0.0, -math.pi / 2)
    ry_dag = Pulse.constant_detuning(half_pi, 0.0, math.pi / 2)
    pi_pulse, two_pi_pulse = _cz_pulses(device, two_pi_duration)

    seq.target("c", "digital")
    seq.add(ry, "digital")
    seq.target("t", "digital")
    seq.add(ry_dag, "digital")

    seq.align("digital", "rydberg")
    seq.add(pi_pulse, "rydberg")
    seq.target("t", "rydberg")
    seq.add(two_pi_pulse, "rydberg")
    seq.target("c", "rydberg")
    seq.add(pi_pulse, "rydberg")

    seq.align("digital", "rydberg")
    seq.add(ry, "digital")
    seq.measure("digital")
    return seq


def cz_sequence(device: Device = REFERENCE_DEVICE, two_pi_duration: int | None = None) -> Sequence:
    """pi on control, 2pi on target, pi on control.

    The idle Raman channel only brings the hyperfine level into the model so
    the gate can act on digital-basis inputs.
    """
    seq = Sequence(bell_register(), device)
    seq.declare_channel("digital", "raman_local", initial_target="c")
    seq.declare_channel("rydberg", "rydberg_local", initial_target="c")
    pi_pulse, two_pi_pulse = _cz_pulses(device, two_pi_duration)
    seq.add(pi_pulse, "rydberg")
    seq.target("t", "rydberg")
    seq.add(two_pi_pulse, "rydberg")
    seq.target("c", "rydberg")
    seq.add(pi_pulse, "rydberg")
    return seq


def afm_parameters(delta_f_over_u: float = 2.0) -> dict:
    omega_max = 2.3 * TWO_PI
    u = omega_max / 2.3
    delta_0 = -6 * u
    delta_f = delta_f_over_u * u
    t_sweep = (delta_f - delta_0) / (TWO_PI * 10) * 1000
    return {
        "omega_max": omega_max,
        "U": u,
        "delta_0": delta_0,
        "delta_f": delta_f,
        "t_rise": 250,
        "t_fall": 500,
        "t_sweep": int(math.floor(t_sweep + 0.5)),
    }


def afm_sequence(
    delta_f_over_u: float = 2.0, side: int = 3, device: Device = REFERENCE_DEVICE
) -> Sequence:
    """Rise, detuning sweep and fall on a global Rydberg channel over a square lattice
    whose spacing is the blockade radius at Omega = U."""
    p = afm_parameters(delta_f_over_u)
    reg = Register.square(side, device.rydberg_blockade_radius(p["U"]), prefix="q")
    rise = Pulse.constant_detuning(RampWaveform(p["t_rise"], 0.0, p["omega_max"]), p["delta_0"], 0.0)
    # delta_f == delta_0 leaves nothing to sweep
    sweep = None
    if p["t_sweep"] > 0:
        sweep = Pulse.constant_amplitude(
            p["omega_max"], RampWaveform(p["t_sweep"], p["delta_0"], p["delta_f"]), 0.0
        )
    fall = Pulse.constant_detuning(RampWaveform(p["t_fall"], p["omega_max"], 0.0), p["delta_f"], 0.0)
    seq = Sequence(reg, device)
    seq.declare_channel("ising", "rydberg_global")
    seq.add(rise, "ising")
    if sweep is not None:
        seq.add(sweep, "ising")
    seq.add(fall, "ising")
    return seq


def afm_sweep_sequence(side: int = 3, device: Device = REFERENCE_DEVICE) -> Sequence:
    """:func:`afm_sequence` with the final detuning left as the scalar variable
    ``delta_f`` (rad/µs); the sweep duration follows from it."""
    p = afm_parameters()
    reg = Register.square(side, device.rydberg_blockade_radius(p["U"]), prefix="q")
    seq = Sequence(reg, device)
    delta_f = seq.declare_variable("delta_f")
    t_sweep = (delta_f - p["delta_0"]) / (TWO_PI * 10) * 1000
    rise = Pulse.constant_detuning(RampWaveform(p["t_rise"], 0.0, p["omega_max"]), p["delta_0"], 0.0)
    sweep = Pulse.constant_amplitude(p["omega_max"], RampWaveform(t_sweep, p["delta_0"], delta_f), 0.0)
    fall = Pulse.constant_detuning(RampWaveform(p["t_fall"], p["omega_max"], 0.0), delta_f, 0.0)
    seq.declare_channel("ising", "rydberg_global")
    seq.add(rise, "ising")
    seq.add(sweep, "ising")
    seq.add(fall, "ising")
    return seq


def mis_register() -> Register:
    return Register.from_coordinates(np.array(MIS_POSITIONS), prefix="q")


def mis_edges(device: Device = REFERENCE_DEVICE, omega: float = 1.0) -> list[tuple[int, int]]:
    """Unit-disk graph of the MIS register at the blockade radius for ``omega``."""
    return blockade_graph(mis_register(), device.rydberg_blockade_radius(omega))


def qaoa_mis_sequence(layers: int = 2, device: Device = REFERENCE_DEVICE) -> Sequence:
    """Parametrized sequence alternating mixing (Omega=1, delta=0) and cost
    (Omega=delta=1) layers; durations ``t_list``/``s_list`` are in µs."""
    seq = Sequence(mis_register(), device)
    seq.declare_channel("ch0", "rydberg_global")
    t_list = seq.declare_variable("t_list", size=layers)
    s_list = seq.declare_variable("s_list", size=layers)
    for i in range(layers):
        seq.add(Pulse.constant_pulse(1000 * t_list[i], 1.0, 0.0, 0.0), "ch0")
        seq.add(Pulse.constant_pulse(1000 * s_list[i], 1.0, 1.0, 0.0), "ch0")
    seq.measure("ground-rydberg")
    return seq

