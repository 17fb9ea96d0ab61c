import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rydseq.analysis import LatticeMap, OccupationStats, g2, g2_map, g2_to_csv, mis_cost, neel_score
from rydseq.register import Register

NEEL_A = "101010101"
NEEL_B = "010101010"
MIS_EDGES = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)]


def _square(side=3):
    return LatticeMap.from_register(Register.square(side, 7.0))


def test_lattice_from_register():
    lat = _square()
    assert lat.spacing == pytest.approx(7.0)
    assert sorted(map(tuple, lat.cells.tolist())) == [(r, c) for r in range(3) for c in range(3)]
    assert len(lat.displacements()) == 24
    assert lat.displacement(0, 1) in {(1, 0), (0, 1)}


def test_lattice_rejects_irregular():
    reg = Register.from_coordinates([[0, 0], [5, 0], [12.3, 0]])
    with pytest.raises(ValueError):
        LatticeMap.from_register(reg)
    with pytest.raises(ValueError):
        LatticeMap([[0, 0], [0, 0]], 1.0)


def test_product_state_has_no_correlation():
    lat = _square()
    stats = OccupationStats.from_distribution({NEEL_A: 1.0})
    assert all(v == 0 for v in g2_map(stats, lat).values())
    assert neel_score(stats, lat) == 0


def test_anticorrelated_pair():
    lat = LatticeMap([[0, 0], [0, 1]], 1.0)
    stats = OccupationStats.from_distribution({"01": 0.5, "10": 0.5})
    assert g2(stats, lat, 1, 0) == pytest.approx(-0.25)
    assert g2(stats, lat, -1, 0) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        g2(stats, lat, 0, 1)


def test_neel_superposition():
    lat = _square()
    stats = OccupationStats.from_distribution({NEEL_A: 0.5, NEEL_B: 0.5})
    assert g2(stats, lat, 1, 0) == pytest.approx(-0.25)
    assert g2(stats, lat, 1, 1) == pytest.approx(0.25)
    assert g2(stats, lat, 2, 0) == pytest.approx(0.25)
    assert neel_score(stats, lat) == pytest.approx(6.0)


def _random_dist(draw_weights, n=9):
    keys = [format(i, f"0{n}b") for i in range(2**n)]
    w = np.asarray(draw_weights)
    return dict(zip(keys, w / w.sum()))


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 8))
def test_g2_symmetry(seed, sharpness):
    lat = _square()
    weights = np.random.default_rng(seed).random(512) ** sharpness + 1e-300
    stats = OccupationStats.from_distribution(_random_dist(weights))
    for k, l in lat.displacements():
        assert g2(stats, lat, k, l) == g2(stats, lat, -k, -l)


def test_moments_match_direct_computation():
    rng = np.random.default_rng(3)
    dist = _random_dist(rng.random(512))
    stats = OccupationStats.from_distribution(dist)
    bits = np.array([[int(c) for c in k] for k in dist])
    p = np.array(list(dist.values()))
    assert np.allclose(stats.mean, p @ bits)
    assert np.allclose(stats.pair, (bits * p[:, None]).T @ bits)


def test_counts_converge_to_exact():
    rng = np.random.default_rng(5)
    dist = _random_dist(rng.random(512) ** 4)
    keys = list(dist)
    draws = rng.multinomial(20_000, list(dist.values()))
    counts = {k: int(c) for k, c in zip(keys, draws) if c}
    lat = _square()
    exact = g2_map(OccupationStats.from_distribution(dist), lat)
    sampled = g2_map(OccupationStats.from_counts(counts), lat)
    # std of a connected correlator estimate is below 0.5 / sqrt(N) per pair average
    for d in exact:
        assert abs(exact[d] - sampled[d]) < 5 * 0.5 / math.sqrt(20_000)
    assert OccupationStats.from_counts(counts).n_samples == 20_000


def test_stats_errors():
    with pytest.raises(ValueError):
        OccupationStats.from_distribution({})
    with pytest.raises(ValueError):
        OccupationStats.from_distribution({"01": 1, "1": 1})
    with pytest.raises(ValueError):
        OccupationStats.from_distribution({"0a": 1})
    lat = LatticeMap([[0, 0], [0, 1], [0, 2]], 1.0)
    with pytest.raises(ValueError):
        g2(OccupationStats.from_distribution({"01": 1}), lat, 1, 0)


def test_g2_csv():
    text = g2_to_csv({(1, 0): -0.25, (0, 0): 0.5})
    assert text.splitlines() == ["k,l,g2", "0,0,0.5", "1,0,-0.25"]


# -- MIS cost -----------------------------------------------------------------


def test_mis_cost_examples():
    assert mis_cost({"00000": 10}, MIS_EDGES) == 0
    assert mis_cost({"01011": 3}, MIS_EDGES) == -3
    assert mis_cost({"11000": 1}, MIS_EDGES) == pytest.approx(-2 + 2.0)
    assert mis_cost({"01011": 1, "00000": 1}, MIS_EDGES) == pytest.approx(-1.5)
    with pytest.raises(ValueError):
        mis_cost({}, MIS_EDGES)
    with pytest.raises(ValueError):
        mis_cost({"01011": 1}, MIS_EDGES, penalty=1.0)


def _maximum_independent_sets(n, edges):
    best, found = -1, []
    for bits in itertools.product("01", repeat=n):
        on = {i for i, b in enumerate(bits) if b == "1"}
        if any(a in on and b in on for a, b in edges):
            continue
        if len(on) > best:
            best, found = len(on), []
        if len(on) == best:
            found.append("".join(bits))
    return sorted(found)


@given(st.floats(1.01, 50))
def test_mis_cost_minimizers_are_maximum_independent_sets(u):
    costs = {
        "".join(b): mis_cost({"".join(b): 1}, MIS_EDGES, penalty=u)
        for b in itertools.product("01", repeat=5)
    }
    low = min(costs.values())
    winners = sorted(k for k, v in costs.items() if v == low)
    assert winners == _maximum_independent_sets(5, MIS_EDGES) == ["00111", "01011"]
