"""``rydseq`` command line.

Exit codes: 0 success, 1 I/O or parse error, 2 validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import document, protocols
from .analysis import LatticeMap, OccupationStats, g2_map, g2_to_csv, neel_score
from .device import ValidationError
from .draw import render_svg, render_text
from .emulator import SimConfig, run
from .optim import qaoa_loop, sweep, trace_to_csv
from .register import blockade_graph
from .sequence import SequenceError

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

EXAMPLES = {
    "bell": protocols.bell_sequence,
    "cz": protocols.cz_sequence,
    "afm": protocols.afm_sequence,
    "afm-sweep": protocols.afm_sweep_sequence,
    "qaoa": protocols.qaoa_mis_sequence,
}


class _Exit(Exception):
    def __init__(self, code: int, payload):
        self.code = code
        self.payload = payload


def _fail(code: int, message: str, violations=None):
    payload = {"error": message}
    if violations is not None:
        payload["violations"] = [v.to_json() for v in violations]
    raise _Exit(code, payload)


def _load(path: str):
    try:
        return document.load(path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}")
    except document.DocumentError as exc:
        _fail(EXIT_IO, str(exc))
    except ValidationError as exc:
        _fail(EXIT_INVALID, str(exc), exc.violations)
    except (SequenceError, TypeError, ValueError) as exc:
        _fail(EXIT_INVALID, str(exc))


@contextmanager
def _runtime():
    try:
        yield
    except _Exit:
        raise
    except ValidationError as exc:
        _fail(EXIT_INVALID, str(exc), exc.violations)
    except (SequenceError, ValueError, MemoryError, ArithmeticError) as exc:
        _fail(EXIT_RUNTIME, str(exc))


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {out}: {exc.strerror or exc}")


def _concrete(seq, what: str):
    if seq.is_parametrized():
        _fail(EXIT_INVALID, f"cannot {what} a parametrized document; it declares variables")
    return seq


def _counts_json(counts: dict) -> str:
    return json.dumps(dict(sorted(counts.items())), indent=None) + "\n"


def cmd_validate(args) -> int:
    seq = _load(args.path)
    summary = {
        "ok": True,
        "atoms": len(seq.register),
        "channels": list(seq.declared_channels),
        "parametrized": seq.is_parametrized(),
    }
    if not seq.is_parametrized():
        summary["duration_ns"] = seq.get_duration()
    _write(json.dumps(summary) + "\n", None)
    return EXIT_OK


def cmd_draw(args) -> int:
    seq = _concrete(_load(args.path), "draw")
    text = render_svg(seq) if args.format == "svg" else render_text(seq)
    _write(text, args.out)
    return EXIT_OK


def _simulate(seq, args):
    config = SimConfig(sampling_rate=args.sampling_rate, seed=getattr(args, "seed", None))
    with _runtime():
        return run(seq, config)


def cmd_simulate(args) -> int:
    res = _simulate(_concrete(_load(args.path), "simulate"), args)
    _write(json.dumps(res.to_json()) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    res = _simulate(_concrete(_load(args.path), "sample"), args)
    with _runtime():
        counts = res.sample_final_state(args.n, meas_basis=args.basis, seed=args.seed)
    _write(_counts_json(counts), args.out)
    return EXIT_OK


def cmd_correlations(args) -> int:
    seq = _concrete(_load(args.path), "analyse")
    res = _simulate(seq, args)
    with _runtime():
        stats = OccupationStats.from_results(res, args.basis)
        lattice = LatticeMap.from_register(seq.register, args.spacing)
        values = g2_map(stats, lattice)
        score = neel_score(stats, lattice)
    if args.csv:
        _write(g2_to_csv(values), args.csv)
    _write(json.dumps({"neel_score": score}) + "\n", None)
    return EXIT_OK


def cmd_optimize(args) -> int:
    seq = _load(args.path)
    if not seq.is_parametrized():
        _fail(EXIT_INVALID, "optimize needs a parametrized document declaring t_list and s_list")
    edges = blockade_graph(seq.register, seq.device.rydberg_blockade_radius(args.blockade_omega))
    with _runtime():
        result = qaoa_loop(
            seq,
            edges,
            layers=args.layers,
            samples_per_eval=args.samples_per_eval,
            seed=args.seed,
            budget=args.budget,
            final_samples=args.final_samples,
            sampling_rate=args.sampling_rate,
        )
    if args.trace:
        _write(trace_to_csv(result.trace, result.names), args.trace)
    out = {
        "params": {k: v.tolist() for k, v in result.params.items()},
        "objective": result.fun,
        "evaluations": len(result.trace),
        "counts": dict(sorted(result.counts.items())),
    }
    _write(json.dumps(out) + "\n", args.out)
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        _fail(EXIT_IO, f"cannot parse values {text!r}")


def cmd_sweep(args) -> int:
    seq = _load(args.path)
    if not seq.is_parametrized():
        _fail(EXIT_INVALID, "sweep needs a parametrized document with one scalar variable")
    if args.values:
        values = _parse_values(args.values)
    else:
        values = np.linspace(args.start, args.stop, args.num).tolist()
    name = args.variable or next(iter(seq.variables))
    with _runtime():
        lattice = LatticeMap.from_register(seq.register, args.spacing)
        trace = sweep(seq, name, values, args.sampling_rate, lattice, args.basis)
    _write(trace_to_csv(trace, [name]).replace(",objective\n", ",neel_score\n", 1), args.out)
    return EXIT_OK


def cmd_export_example(args) -> int:
    seq = EXAMPLES[args.name]()
    _write(document.dumps(seq, inline_device=args.inline_device) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rydseq", description="Neutral-atom pulse sequences: validate, draw, emulate.")
    sub = p.add_subparsers(dest="command", required=True)

    def doc_cmd(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("path", help="sequence document (JSON)")
        sp.set_defaults(func=func)
        return sp

    def sim_opts(sp, rate=1.0):
        sp.add_argument("--sampling-rate", type=float, default=rate, help="fraction of ns ticks used as step boundaries")

    doc_cmd("validate", cmd_validate, "check a document against its device")

    sp = doc_cmd("draw", cmd_draw, "render the channel timelines")
    sp.add_argument("--format", choices=("text", "svg"), default="text")
    sp.add_argument("--out", help="output file (default stdout)")

    sp = doc_cmd("simulate", cmd_simulate, "emulate and write the state vectors as JSON")
    sim_opts(sp)
    sp.add_argument("--out", help="output file (default stdout)")

    sp = doc_cmd("sample", cmd_sample, "emulate and sample measurement outcomes")
    sim_opts(sp)
    sp.add_argument("-n", "--n-samples", dest="n", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--basis", choices=("ground-rydberg", "digital"), default=None)
    sp.add_argument("--out", help="output file (default stdout)")

    sp = doc_cmd("correlations", cmd_correlations, "exact g2 map and Néel score of the final state")
    sim_opts(sp)
    sp.add_argument("--basis", choices=("ground-rydberg", "digital"), default="ground-rydberg")
    sp.add_argument("--spacing", type=float, default=None, help="lattice spacing in µm (default: nearest-neighbour distance)")
    sp.add_argument("--csv", help="write k,l,g2 rows here")

    sp = doc_cmd("optimize", cmd_optimize, "closed-loop QAOA on a document declaring t_list and s_list")
    sim_opts(sp)
    sp.add_argument("--layers", type=int, default=None)
    sp.add_argument("--budget", type=int, default=100, help="objective evaluations")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples-per-eval", type=int, default=1000)
    sp.add_argument("--final-samples", type=int, default=10_000)
    sp.add_argument("--blockade-omega", type=float, default=1.0, help="Rabi frequency (rad/µs) defining graph edges")
    sp.add_argument("--trace", help="write the evaluation trace CSV here")
    sp.add_argument("--out", help="output file (default stdout)")

    sp = doc_cmd("sweep", cmd_sweep, "Néel score over values of one scalar variable (CSV)")
    sim_opts(sp, 0.02)
    sp.add_argument("--variable", default=None)
    sp.add_argument("--values", help="comma-separated values")
    sp.add_argument("--start", type=float, default=None)
    sp.add_argument("--stop", type=float, default=None)
    sp.add_argument("--num", type=int, default=9)
    sp.add_argument("--basis", choices=("ground-rydberg", "digital"), default="ground-rydberg")
    sp.add_argument("--spacing", type=float, default=None)
    sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("export-example", help="write a bundled example document")
    sp.add_argument("name", choices=sorted(EXAMPLES))
    sp.add_argument("--inline-device", action="store_true")
    sp.add_argument("--out", help="output file (default stdout)")
    sp.set_defaults(func=cmd_export_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and not args.values and (args.start is None or args.stop is None):
        parser.error("sweep needs --values or both --start and --stop")
    try:
        return args.func(args)
    except _Exit as exc:
        sys.stderr.write(json.dumps(exc.payload) + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
