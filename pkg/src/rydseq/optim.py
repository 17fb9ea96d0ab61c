"""Nelder-Mead simplex search and closed-loop variational drivers."""

from __future__ import annotations

import csv
import io
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from .analysis import LatticeMap, OccupationStats, mis_cost, neel_score
from .emulator import SimConfig, run
from .sequence import Sequence, SequenceError

__all__ = [
    "TraceEntry",
    "OptimizeResult",
    "nelder_mead",
    "QAOAResult",
    "qaoa_loop",
    "sweep",
    "trace_to_csv",
]

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class TraceEntry:
    index: int
    x: tuple[float, ...]
    value: float


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    trace: list[TraceEntry]
    n_evals: int
    message: str


def trace_to_csv(trace: Iterable[TraceEntry], names: list[str] | None = None, fh=None) -> str | None:
    """``iteration,<param columns>,objective`` rows, one per evaluation."""
    trace = list(trace)
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    dim = len(trace[0].x) if trace else len(names or [])
    names = names or [f"x{i}" for i in range(dim)]
    w.writerow(["iteration", *names, "objective"])
    for e in trace:
        w.writerow([e.index, *(repr(float(v)) for v in e.x), repr(float(e.value))])
    return buf.getvalue() if fh is None else None


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0,
    step=0.3,
    max_evals: int = 200,
    fatol: float = 1e-10,
    xatol: float = 1e-6,
) -> OptimizeResult:
    """Minimize ``objective`` with the reflect/expand/contract/shrink simplex.

    The start point is always evaluated, even with ``max_evals=0``. Stops on
    budget, on a simplex that is both flat (value spread <= fatol) and small
    (size <= xatol), or on an exactly flat simplex, in which case the centroid
    is returned unless it evaluates worse.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    d = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (d,))
    trace: list[TraceEntry] = []
    budget = max(int(max_evals), 1)

    def f(x):
        v = float(objective(x.copy()))
        trace.append(TraceEntry(len(trace), tuple(float(t) for t in x), v))
        return v

    def result(x, fx, msg):
        best = min(trace, key=lambda e: e.value)
        if best.value < fx:
            x, fx = np.array(best.x), best.value
        return OptimizeResult(np.asarray(x, dtype=float), float(fx), trace, len(trace), msg)

    f0 = f(x0)
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at x0")
    sim = [x0]
    vals = [f0]
    for i in range(d):
        if len(trace) >= budget:
            return result(x0, f0, "evaluation budget exhausted")
        v = x0.copy()
        v[i] += steps[i]
        sim.append(v)
        vals.append(f(v))
    sim = np.array(sim)
    vals = np.array(vals)

    while True:
        order = np.argsort(vals, kind="stable")
        sim, vals = sim[order], vals[order]
        spread = vals[-1] - vals[0]
        size = np.max(np.abs(sim[1:] - sim[0])) if d else 0.0
        if spread == 0 and len(trace) < budget:
            c = sim.mean(axis=0)
            fc = f(c)
            if fc <= vals[0]:
                return result(c, fc, "flat simplex")
            return result(sim[0], vals[0], "flat simplex")
        if spread <= fatol and size <= xatol:
            return result(sim[0], vals[0], "converged")
        if len(trace) >= budget:
            return result(sim[0], vals[0], "evaluation budget exhausted")

        centroid = sim[:-1].mean(axis=0)
        xr = centroid + REFLECT * (centroid - sim[-1])
        fr = f(xr)
        if fr < vals[0]:
            if len(trace) >= budget:
                sim[-1], vals[-1] = xr, fr
                continue
            xe = centroid + EXPAND * (xr - centroid)
            fe = f(xe)
            sim[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-2]:
            sim[-1], vals[-1] = xr, fr
            continue
        if len(trace) >= budget:
            continue
        if fr < vals[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                sim[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + CONTRACT * (sim[-1] - centroid)
            fc = f(xc)
            if fc < vals[-1]:
                sim[-1], vals[-1] = xc, fc
                continue
        # vertices left unshrunk when the budget runs out keep valid values
        for i in range(1, d + 1):
            if len(trace) >= budget:
                break
            sim[i] = sim[0] + SHRINK * (sim[i] - sim[0])
            vals[i] = f(sim[i])


@dataclass
class QAOAResult:
    params: dict[str, np.ndarray]
    fun: float
    counts: dict[str, int]
    trace: list[TraceEntry]
    names: list[str] = field(default_factory=list)


def _eval_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(index)])


def qaoa_loop(
    seq: Sequence,
    edges,
    layers: int | None = None,
    samples_per_eval: int = 1000,
    seed: int = 0,
    budget: int = 100,
    x0=None,
    step: float = 0.3,
    final_samples: int = 10_000,
    penalty: float = 2.0,
    sampling_rate: float = 1.0,
) -> QAOAResult:
    """Tune the layer durations (µs) of a parametrized sequence declaring
    ``t_list`` and ``s_list`` so that sampled bitstrings minimize the MIS cost.

    Durations below the channels' minimum pulse duration are clamped up to it.
    Evaluation ``i`` samples with seed ``(seed, i)``; the final histogram uses
    ``(seed, -1 mod 2**32)``.
    """
    if not seq.is_parametrized():
        raise SequenceError("qaoa_loop needs a parametrized sequence")
    vars_ = seq.variables
    if set(vars_) != {"t_list", "s_list"}:
        raise SequenceError("the sequence must declare exactly the variables t_list and s_list")
    p = vars_["t_list"].size
    if vars_["s_list"].size != p or (layers is not None and layers != p):
        raise SequenceError(f"t_list and s_list must both have size {layers or p}")
    floor_us = max(spec.min_duration for spec in seq.declared_channels.values()) / 1000
    config = SimConfig(sampling_rate=sampling_rate)
    counter = [0]

    def split(x):
        x = np.maximum(np.asarray(x, dtype=float), floor_us)
        return {"t_list": x[:p], "s_list": x[p:]}

    def sample(x, n, ss):
        res = run(seq.build(**split(x)), config)
        return res.sample_final_state(n, seed=ss)

    def objective(x):
        counts = sample(x, samples_per_eval, _eval_seed(seed, counter[0]))
        counter[0] += 1
        return mis_cost(counts, edges, penalty)

    start = np.ones(2 * p) if x0 is None else np.asarray(x0, dtype=float)
    opt = nelder_mead(objective, start, step=step, max_evals=budget)
    params = split(opt.x)
    counts = sample(opt.x, final_samples, _eval_seed(seed, 2**32 - 1))
    names = [f"t_list[{i}]" for i in range(p)] + [f"s_list[{i}]" for i in range(p)]
    return QAOAResult(params, opt.fun, counts, opt.trace, names)


def sweep(
    seq: Sequence,
    variable: str,
    values: Iterable[float],
    sampling_rate: float = 1.0,
    lattice: LatticeMap | None = None,
    basis: str = "ground-rydberg",
) -> list[TraceEntry]:
    """Exact Néel score of the final state for each value of one scalar variable."""
    vars_ = seq.variables
    if set(vars_) != {variable} or vars_[variable].size != 1:
        raise SequenceError(f"the sequence must declare exactly one scalar variable {variable!r}")
    lattice = lattice or LatticeMap.from_register(seq.register)
    config = SimConfig(sampling_rate=sampling_rate)
    out = []
    for i, v in enumerate(values):
        res = run(seq.build(**{variable: float(v)}), config)
        stats = OccupationStats.from_results(res, basis)
        out.append(TraceEntry(i, (float(v),), neel_score(stats, lattice)))
    return out
