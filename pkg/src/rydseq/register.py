"""Named atom positions in the plane."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

from .device import Device, Violation

__all__ = ["Register", "validate_register", "blockade_graph"]


class Register:
    """Ordered mapping of atom name to (x, y) in µm.

    Insertion order fixes the tensor order used by the emulator and the
    bit order of sampled bitstrings (first atom leftmost).
    """

    def __init__(self, qubits: Mapping[str, tuple[float, float]] | Iterable[tuple[str, tuple]]):
        items = list(qubits.items()) if isinstance(qubits, Mapping) else list(qubits)
        if not items:
            raise ValueError("a register needs at least one atom")
        names = [str(n) for n, _ in items]
        if len(set(names)) != len(names):
            raise ValueError("atom names must be unique")
        coords = np.array([tuple(c) for _, c in items], dtype=float)
        if coords.shape != (len(names), 2):
            raise ValueError("coordinates must be 2D points")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        self._names = tuple(names)
        self._coords = coords
        self._coords.setflags(write=False)
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def from_coordinates(cls, coords, prefix: str = "q", names: Iterable[str] | None = None) -> Register:
        coords = np.asarray(coords, dtype=float)
        if names is None:
            names = [f"{prefix}{i}" for i in range(len(coords))]
        else:
            names = list(names)
            if len(names) != len(coords):
                raise ValueError("need one name per coordinate")
        return cls(list(zip(names, map(tuple, coords))))

    @classmethod
    def square(cls, side: int, spacing: float, prefix: str = "q") -> Register:
        """``side`` x ``side`` square lattice centred on its centroid, row-major names."""
        if int(side) != side or side < 1:
            raise ValueError("side must be a positive integer")
        if not spacing > 0:
            raise ValueError("spacing must be positive")
        side = int(side)
        idx = np.arange(side * side)
        pts = np.stack([idx % side, idx // side], axis=1).astype(float) * spacing
        pts -= pts.mean(axis=0)
        return cls.from_coordinates(pts, prefix=prefix)

    @property
    def qubit_ids(self) -> tuple[str, ...]:
        return self._names

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown qubit {name!r}") from None

    def position(self, name: str) -> np.ndarray:
        return self._coords[self.index(name)]

    @property
    def qubits(self) -> dict[str, tuple[float, float]]:
        return {n: (float(x), float(y)) for n, (x, y) in zip(self._names, self._coords)}

    def distances(self) -> np.ndarray:
        diff = self._coords[:, None, :] - self._coords[None, :, :]
        return np.sqrt(np.sum(diff**2, axis=-1))

    def translated(self, dx: float, dy: float) -> Register:
        return Register(list(zip(self._names, map(tuple, self._coords + [dx, dy]))))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Register):
            return NotImplemented
        return self._names == other._names and np.array_equal(self._coords, other._coords)

    def __hash__(self) -> int:
        return hash((self._names, self._coords.tobytes()))

    def __repr__(self) -> str:
        return f"Register({self.qubits})"

    def to_json(self) -> dict:
        return {
            "atoms": [
                {"name": n, "x_um": float(x), "y_um": float(y)}
                for n, (x, y) in zip(self._names, self._coords)
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Register:
        return cls([(a["name"], (a["x_um"], a["y_um"])) for a in data["atoms"]])


def validate_register(device: Device, reg: Register) -> list[Violation]:
    out = []
    if len(reg) > device.max_atom_count:
        out.append(
            Violation("atom_count", f"{len(reg)} atoms exceed the limit of {device.max_atom_count}")
        )
    if len(reg) > 1:
        d = reg.distances()
        iu = np.triu_indices(len(reg), k=1)
        pair_d = d[iu]
        k = int(np.argmin(pair_d))
        if pair_d[k] < device.min_atom_distance * (1 - 1e-12):
            a, b = reg.qubit_ids[iu[0][k]], reg.qubit_ids[iu[1][k]]
            out.append(
                Violation(
                    "min_distance",
                    f"atoms {a!r} and {b!r} are {pair_d[k]:.6g} µm apart, below the "
                    f"minimum of {device.min_atom_distance:.6g} µm",
                )
            )
    radii = np.linalg.norm(reg.coords - reg.coords.mean(axis=0), axis=1)
    for name, r in zip(reg.qubit_ids, radii):
        if r > device.max_radius_from_center * (1 + 1e-12):
            out.append(
                Violation(
                    "radius",
                    f"atom {name!r} is {r:.6g} µm from the centre, beyond "
                    f"{device.max_radius_from_center:.6g} µm",
                )
            )
    return out


def blockade_graph(reg: Register, radius: float) -> list[tuple[int, int]]:
    """Edges (i, j), i < j, between atoms no further apart than ``radius``."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    d = reg.distances()
    n = len(reg)
    return [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if d[i, j] <= radius * (1 + 1e-12)
    ]
