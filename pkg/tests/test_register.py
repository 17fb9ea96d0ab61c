import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydseq.device import REFERENCE_DEVICE
from rydseq.register import Register, blockade_graph, validate_register

MIS = [[0.0, 0.0], [-4, -7], [4, -7], [8, 6], [-8, 6]]


def test_bell_pair():
    reg = Register({"c": (-2, 0), "t": (2, 0)})
    assert reg.qubit_ids == ("c", "t")
    assert reg.distances()[0, 1] == 4.0
    assert validate_register(REFERENCE_DEVICE, reg) == []


def test_single_atom():
    reg = Register.from_coordinates([[0, 0]])
    assert len(reg) == 1
    assert validate_register(REFERENCE_DEVICE, reg) == []


def test_mis_register():
    reg = Register.from_coordinates(MIS, prefix="q")
    assert reg.qubit_ids == ("q0", "q1", "q2", "q3", "q4")


def test_duplicate_names():
    with pytest.raises(ValueError):
        Register([("a", (0, 0)), ("a", (5, 0))])
    with pytest.raises(ValueError):
        Register.from_coordinates([[0, 0], [5, 0]], names=["x", "x"])


def test_square_examples():
    one = Register.square(1, 7.0)
    assert np.array_equal(one.coords, [[0.0, 0.0]])

    two = Register.square(2, 4)
    d = two.distances()
    off = d[np.triu_indices(4, 1)]
    assert sorted(np.round(off, 12)) == [4, 4, 4, 4, round(4 * math.sqrt(2), 12), round(4 * math.sqrt(2), 12)]

    r = 9.5
    three = Register.square(3, r, prefix="q")
    assert three.qubit_ids[0] == "q0" and three.qubit_ids[-1] == "q8"
    radii = np.linalg.norm(three.coords, axis=1)
    assert radii.max() == pytest.approx(math.sqrt(2) * r)


@given(st.integers(1, 6), st.floats(0.5, 20))
def test_square_nearest_neighbour_spacing(side, s):
    reg = Register.square(side, s)
    if side == 1:
        return
    d = reg.distances()
    np.fill_diagonal(d, np.inf)
    assert np.allclose(d.min(axis=1), s, rtol=1e-12)
    assert np.allclose(reg.coords.mean(axis=0), 0, atol=1e-12 * s * side)


def test_validation_violations():
    close = Register({"a": (0, 0), "b": (3.9, 0)})
    assert [v.code for v in validate_register(REFERENCE_DEVICE, close)] == ["min_distance"]
    far = Register({"a": (-60, 0), "b": (60, 0)})
    assert {v.code for v in validate_register(REFERENCE_DEVICE, far)} == {"radius"}


@given(st.floats(-1000, 1000), st.floats(-1000, 1000))
def test_validation_translation_invariant(dx, dy):
    reg = Register.from_coordinates(MIS)
    assert validate_register(REFERENCE_DEVICE, reg) == validate_register(REFERENCE_DEVICE, reg.translated(dx, dy))


def test_mis_blockade_graph():
    reg = Register.from_coordinates(MIS)
    radius = REFERENCE_DEVICE.rydberg_blockade_radius(1.0)
    assert radius == pytest.approx(13.08, abs=5e-3)
    assert blockade_graph(reg, radius) == [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]


def test_blockade_graph_extremes():
    reg = Register.from_coordinates(MIS)
    assert blockade_graph(reg, 7.9) == []
    full = blockade_graph(reg, reg.distances().max())
    assert len(full) == 10


def test_blockade_graph_closed_ball():
    reg = Register({"a": (0, 0), "b": (5, 0)})
    assert blockade_graph(reg, 5.0) == [(0, 1)]


@given(st.floats(1, 30), st.floats(1, 30))
def test_blockade_graph_monotone(r1, r2):
    reg = Register.from_coordinates(MIS)
    lo, hi = sorted((r1, r2))
    assert set(blockade_graph(reg, lo)) <= set(blockade_graph(reg, hi))


def test_json_round_trip():
    reg = Register.from_coordinates(MIS)
    assert Register.from_json(reg.to_json()) == reg
