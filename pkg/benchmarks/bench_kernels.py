"""Numba vs numpy kernels on a 9-atom (512-state) problem, plus one full AFM run per backend.

Run:  python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from rydseq import kernels
from rydseq.emulator import LevelStructure, SimConfig, _Model, run
from rydseq.protocols import afm_sequence

KERNELS = ("fill_hamiltonian", "propagate_repeated", "bit_distribution", "occupation_moments")


def timeit(fn, repeat):
    fn()  # warm-up, triggers compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return np.median(times) * 1e3


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    seq = afm_sequence()
    structure = LevelStructure.from_bases(["ground-rydberg"], 9)
    model = _Model(seq.register, seq.device, structure, ["ground-rydberg"])
    n_chan = len(model.channels)
    coupling = rng.normal(size=n_chan) + 1j * rng.normal(size=n_chan)
    detuning = rng.normal(size=n_chan)
    ham = model.hamiltonian(coupling, detuning)
    w, v = np.linalg.eigh(ham)
    unitary = np.ascontiguousarray((v * np.exp(-1j * w * 0.05)) @ v.conj().T)
    psi = np.zeros(structure.dim, complex)
    psi[0] = 1
    probs = rng.random(structure.dim)
    probs /= probs.sum()
    keys = rng.integers(0, 512, structure.dim)
    bits = rng.integers(0, 2, (4096, 9)).astype(float)
    weights = rng.random(4096)
    weights /= weights.sum()

    cases = {
        "fill_hamiltonian": lambda f: f(model.static_diag, model.lo, model.hi, model.chan, model.zsign, coupling, detuning),
        "propagate_repeated": lambda f: f(unitary, psi, 50),
        "bit_distribution": lambda f: f(probs, keys, 512),
        "occupation_moments": lambda f: f(bits, weights),
    }

    print("=" * 64)
    print(f"KERNELS (dim {structure.dim}, median of {args.repeat} runs)")
    print("=" * 64)
    print(f"{'kernel':<22}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name in KERNELS:
        t_np = timeit(lambda: cases[name](getattr(kernels, name + "_numpy")), args.repeat)
        t_nb = timeit(lambda: cases[name](getattr(kernels, name + "_numba")), args.repeat)
        print(f"{name:<22}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.2f}")

    print("\nFull AFM run (3x3, sampling_rate 0.02)")
    config = SimConfig(sampling_rate=0.02)
    for backend in ("numpy", "numba"):
        for name in KERNELS:
            setattr(kernels, name, getattr(kernels, f"{name}_{backend}"))
        run(seq, config)
        t0 = time.perf_counter()
        run(seq, config)
        print(f"  {backend:<6} {time.perf_counter() - t0:8.2f} s")


if __name__ == "__main__":
    main()
