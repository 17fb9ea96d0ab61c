"""Observables on measured bits: occupation correlations, Néel order, MIS cost."""

from __future__ import annotations

import csv
import io
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .register import Register

__all__ = [
    "OccupationStats",
    "LatticeMap",
    "g2",
    "g2_map",
    "neel_score",
    "mis_cost",
    "g2_to_csv",
]


def _bits_matrix(keys: Sequence[str]) -> np.ndarray:
    if not keys:
        raise ValueError("empty outcome map")
    n = len(keys[0])
    if any(len(k) != n or set(k) - {"0", "1"} for k in keys):
        raise ValueError("bitstrings must be equal-length strings of 0/1")
    return np.array([[c == "1" for c in k] for k in keys], dtype=np.float64)


@dataclass(frozen=True)
class OccupationStats:
    """First and second moments of the measured occupations.

    ``mean[i] = <n_i>``, ``pair[i, j] = <n_i n_j>``; ``n_samples`` is None for
    exact probabilities.
    """

    mean: np.ndarray
    pair: np.ndarray
    n_samples: int | None = None

    @classmethod
    def from_distribution(cls, dist: Mapping[str, float], n_samples: int | None = None) -> OccupationStats:
        keys = list(dist)
        bits = _bits_matrix(keys)
        w = np.array([dist[k] for k in keys], dtype=np.float64)
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("weights must be non-negative with a positive total")
        mean, pair = kernels.occupation_moments(bits, w / w.sum())
        return cls(mean, pair, n_samples)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> OccupationStats:
        return cls.from_distribution(counts, n_samples=int(sum(counts.values())))

    @classmethod
    def from_results(cls, results, basis: str | None = None) -> OccupationStats:
        """Exact moments from the final state of an emulator run."""
        return cls.from_distribution(results.bit_probabilities(basis))

    @property
    def n_atoms(self) -> int:
        return self.mean.size

    def connected(self) -> np.ndarray:
        return self.pair - np.outer(self.mean, self.mean)


class LatticeMap:
    """Integer square-lattice coordinates of each atom.

    ``cells[i] = (row, col)``; a displacement ``(k, l)`` moves ``k`` columns
    (x) and ``l`` rows (y).
    """

    def __init__(self, cells, spacing: float):
        cells = np.asarray(cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[1] != 2:
            raise ValueError("cells must be an (N, 2) array")
        if len({tuple(c) for c in cells}) != len(cells):
            raise ValueError("two atoms share a lattice cell")
        if not spacing > 0:
            raise ValueError("spacing must be positive")
        self.cells = cells
        self.spacing = float(spacing)

    @classmethod
    def from_register(cls, reg: Register, spacing: float | None = None, tol: float = 1e-6) -> LatticeMap:
        coords = reg.coords
        if spacing is None:
            if len(reg) < 2:
                raise ValueError("cannot infer a spacing from a single atom")
            d = reg.distances()
            spacing = float(d[np.triu_indices(len(reg), 1)].min())
        rel = (coords - coords.min(axis=0)) / spacing
        idx = np.rint(rel)
        if np.max(np.abs(idx - rel)) * spacing > tol:
            raise ValueError("register is not a square lattice with that spacing")
        return cls(np.stack([idx[:, 1], idx[:, 0]], axis=1), spacing)

    def __len__(self) -> int:
        return len(self.cells)

    def displacement(self, i: int, j: int) -> tuple[int, int]:
        d = self.cells[j] - self.cells[i]
        return int(d[1]), int(d[0])

    def pairs(self, k: int, l: int) -> list[tuple[int, int]]:
        """Ordered pairs (i, j), i != j, with atom j displaced by (k, l) from atom i."""
        n = len(self.cells)
        return [(i, j) for i in range(n) for j in range(n) if i != j and self.displacement(i, j) == (k, l)]

    def displacements(self) -> list[tuple[int, int]]:
        n = len(self.cells)
        seen = {self.displacement(i, j) for i in range(n) for j in range(n) if i != j}
        return sorted(seen)


def g2(stats: OccupationStats, lattice: LatticeMap, k: int, l: int) -> float:
    """Connected correlation averaged over ordered pairs at displacement (k, l)."""
    if len(lattice) != stats.n_atoms:
        raise ValueError("lattice and statistics disagree on the atom count")
    # evaluate on the canonical orientation so g2(k, l) == g2(-k, -l) bit for bit
    if (k, l) < (-k, -l):
        k, l = -k, -l
    pairs = lattice.pairs(k, l)
    if not pairs:
        raise ValueError(f"no atom pair has displacement ({k}, {l})")
    c = stats.connected()
    return float(sum(c[i, j] for i, j in pairs) / len(pairs))


def g2_map(stats: OccupationStats, lattice: LatticeMap) -> dict[tuple[int, int], float]:
    return {d: g2(stats, lattice, *d) for d in lattice.displacements()}


def neel_score(stats: OccupationStats, lattice: LatticeMap) -> float:
    """Staggered sum of g2 over every displacement realized on the lattice."""
    return float(
        sum((-1) ** (abs(k) + abs(l)) * v for (k, l), v in g2_map(stats, lattice).items())
    )


def g2_to_csv(values: Mapping[tuple[int, int], float], fh=None) -> str | None:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l", "g2"])
    for (k, l), v in sorted(values.items()):
        w.writerow([k, l, repr(float(v))])
    return buf.getvalue() if fh is None else None


def mis_cost(counts: Mapping[str, float], edges, penalty: float = 2.0) -> float:
    """Mean of  -sum_i z_i + penalty * (edges with both ends set)  over the samples."""
    if not penalty > 1:
        raise ValueError("penalty must exceed 1")
    keys = [k for k, v in counts.items() if v]
    if not keys:
        raise ValueError("empty counts")
    bits = _bits_matrix(keys)
    w = np.array([counts[k] for k in keys], dtype=np.float64)
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    violated = (bits[:, edges[:, 0]] * bits[:, edges[:, 1]]).sum(axis=1) if len(edges) else 0.0
    cost = -bits.sum(axis=1) + penalty * violated
    return float(np.dot(cost, w) / w.sum())
