import csv
import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydseq.optim import TraceEntry, nelder_mead, qaoa_loop, sweep, trace_to_csv
from rydseq.protocols import afm_sweep_sequence, mis_edges, qaoa_mis_sequence
from rydseq.sequence import SequenceError


def quadratic(x):
    return (x[0] - 1) ** 2 + (x[1] + 2) ** 2


def test_quadratic_converges():
    res = nelder_mead(quadratic, [0.0, 0.0], max_evals=400)
    assert res.x == pytest.approx([1.0, -2.0], abs=1e-3)
    assert res.fun < 1e-6
    assert res.message == "converged"
    assert res.n_evals == len(res.trace) <= 400


def test_constant_returns_centroid():
    res = nelder_mead(lambda x: 3.0, [0.0, 0.0], step=0.3)
    assert res.message == "flat simplex"
    assert res.x == pytest.approx([0.1, 0.1])
    assert res.fun == 3.0


def test_zero_budget_evaluates_start_only():
    res = nelder_mead(quadratic, [0.5, 0.5], max_evals=0)
    assert res.n_evals == 1
    assert res.trace[0] == TraceEntry(0, (0.5, 0.5), quadratic([0.5, 0.5]))
    assert tuple(res.x) == (0.5, 0.5)


@given(st.integers(1, 60), st.lists(st.floats(-5, 5), min_size=1, max_size=4))
def test_budget_and_best_of_trace(budget, x0):
    target = np.arange(len(x0), dtype=float)
    res = nelder_mead(lambda x: float(np.sum((x - target) ** 2)), x0, max_evals=budget)
    assert res.n_evals <= max(budget, 1)
    assert res.fun == min(e.value for e in res.trace)
    assert [e.index for e in res.trace] == list(range(res.n_evals))


def test_deterministic():
    a = nelder_mead(quadratic, [3.0, 3.0], max_evals=50)
    b = nelder_mead(quadratic, [3.0, 3.0], max_evals=50)
    assert a.trace == b.trace


def test_bad_start():
    with pytest.raises(ValueError):
        nelder_mead(quadratic, [np.nan, 0.0])


def test_trace_csv():
    trace = [TraceEntry(0, (1.0, 2.0), 5.0), TraceEntry(1, (1.5, 2.0), 4.25)]
    rows = list(csv.reader(io.StringIO(trace_to_csv(trace, ["t", "s"]))))
    assert rows == [["iteration", "t", "s", "objective"], ["0", "1.0", "2.0", "5.0"], ["1", "1.5", "2.0", "4.25"]]
    assert trace_to_csv(trace).splitlines()[0] == "iteration,x0,x1,objective"


# -- closed loop ----------------------------------------------------------------


def test_qaoa_is_reproducible():
    seq = qaoa_mis_sequence(layers=1)
    kw = dict(edges=mis_edges(), samples_per_eval=200, budget=6, final_samples=500, seed=4)
    a = qaoa_loop(seq, **kw)
    b = qaoa_loop(seq, **kw)
    assert a.trace == b.trace and a.counts == b.counts
    assert len(a.trace) == 6
    assert sum(a.counts.values()) == 500
    assert a.names == ["t_list[0]", "s_list[0]"]
    c = qaoa_loop(seq, **dict(kw, seed=5))
    assert c.trace != a.trace


def test_qaoa_short_layers_stay_in_ground_state():
    seq = qaoa_mis_sequence(layers=2)
    res = qaoa_loop(seq, mis_edges(), budget=0, x0=np.zeros(4), final_samples=2000)
    assert np.all(res.params["t_list"] == 0.016)
    most = max(res.counts, key=res.counts.get)
    assert most == "00000"
    assert res.counts["00000"] > 1900
    assert abs(res.fun) < 0.05


def test_qaoa_needs_template():
    from rydseq.protocols import bell_sequence

    with pytest.raises(SequenceError):
        qaoa_loop(bell_sequence(), mis_edges())
    with pytest.raises(SequenceError):
        qaoa_loop(qaoa_mis_sequence(layers=2), mis_edges(), layers=3)


def test_sweep_values():
    seq = afm_sweep_sequence(side=2)
    trace = sweep(seq, "delta_f", [0.0, 5.0], sampling_rate=0.05)
    assert [e.x for e in trace] == [(0.0,), (5.0,)]
    assert all(np.isfinite(e.value) for e in trace)
    with pytest.raises(SequenceError):
        sweep(seq, "other", [1.0])
