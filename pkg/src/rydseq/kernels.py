"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba versions are used by default. Set ``RYDSEQ_DISABLE_NUMBA=1`` (or
leave numba uninstalled) to force the numpy versions. Both variants are
always importable under explicit names so they can be cross-checked and
benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("RYDSEQ_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("1", "true", "yes", "on")


# --------------------------------------------------------------------------
# Hamiltonian assembly
# --------------------------------------------------------------------------


def fill_hamiltonian_numpy(static_diag, lo, hi, chan, zsign, coupling, detuning):
    """Dense Hamiltonian from per-channel drive coefficients.

    ``coupling[c]`` is the <a|H|b> matrix element of drive channel ``c``
    (i.e. ``amp/2 * exp(-i phase)``), ``detuning[c]`` its detuning. Each
    transition entry ``(lo[m], hi[m])`` belongs to channel ``chan[m]``.
    ``zsign[c, s]`` is +1 when the atom of channel ``c`` sits in the upper
    level of its transition in basis state ``s``, -1 in the lower one and
    0 otherwise.
    """
    dim = static_diag.shape[0]
    ham = np.zeros((dim, dim), dtype=np.complex128)
    diag = static_diag - 0.5 * (detuning @ zsign)
    ham[np.arange(dim), np.arange(dim)] = diag
    w = coupling[chan]
    ham[lo, hi] = w
    ham[hi, lo] = np.conj(w)
    return ham


def _fill_hamiltonian_loops(static_diag, lo, hi, chan, zsign, coupling, detuning):
    dim = static_diag.shape[0]
    ham = np.zeros((dim, dim), dtype=np.complex128)
    n_chan = zsign.shape[0]
    for s in range(dim):
        acc = static_diag[s]
        for c in range(n_chan):
            z = zsign[c, s]
            if z != 0.0:
                acc -= 0.5 * detuning[c] * z
        ham[s, s] = acc
    for m in range(lo.shape[0]):
        w = coupling[chan[m]]
        ham[lo[m], hi[m]] = w
        ham[hi[m], lo[m]] = np.conj(w)
    return ham


# --------------------------------------------------------------------------
# Repeated propagation with one cached propagator
# --------------------------------------------------------------------------


def propagate_repeated_numpy(unitary, psi, n_steps):
    """Apply ``unitary`` ``n_steps`` times, returning every intermediate state."""
    out = np.empty((n_steps, psi.shape[0]), dtype=np.complex128)
    cur = psi
    for i in range(n_steps):
        cur = unitary @ cur
        out[i] = cur
    return out


def _propagate_repeated_loops(unitary, psi, n_steps):
    dim = psi.shape[0]
    out = np.empty((n_steps, dim), dtype=np.complex128)
    cur = psi.copy()
    nxt = np.empty(dim, dtype=np.complex128)
    for i in range(n_steps):
        for r in range(dim):
            acc = 0.0 + 0.0j
            for c in range(dim):
                acc += unitary[r, c] * cur[c]
            nxt[r] = acc
        for r in range(dim):
            cur[r] = nxt[r]
            out[i, r] = nxt[r]
    return out


# --------------------------------------------------------------------------
# Probability aggregation per measured bitstring
# --------------------------------------------------------------------------


def bit_distribution_numpy(probs, keys, n_keys):
    """Sum state probabilities into bitstring bins (``keys[s]`` = bin of state s)."""
    return np.bincount(keys, weights=probs, minlength=n_keys)


def _bit_distribution_loops(probs, keys, n_keys):
    out = np.zeros(n_keys, dtype=np.float64)
    for s in range(probs.shape[0]):
        out[keys[s]] += probs[s]
    return out


# --------------------------------------------------------------------------
# First and second occupation moments from weighted bit rows
# --------------------------------------------------------------------------


def occupation_moments_numpy(bits, weights):
    """Return (<n_i>, <n_i n_j>) for rows ``bits`` with normalized ``weights``."""
    b = bits.astype(np.float64)
    mean = weights @ b
    pair = b.T @ (weights[:, None] * b)
    return mean, pair


def _occupation_moments_loops(bits, weights):
    m, n = bits.shape
    mean = np.zeros(n, dtype=np.float64)
    pair = np.zeros((n, n), dtype=np.float64)
    for r in range(m):
        w = weights[r]
        for i in range(n):
            wi = w * bits[r, i]
            mean[i] += wi
            for j in range(n):
                pair[i, j] += wi * bits[r, j]
    return mean, pair


if HAS_NUMBA:
    fill_hamiltonian_numba = njit(cache=True)(_fill_hamiltonian_loops)
    # fastmath lets the complex multiply-add vectorize
    propagate_repeated_numba = njit(cache=True, fastmath=True)(_propagate_repeated_loops)
    bit_distribution_numba = njit(cache=True)(_bit_distribution_loops)
    occupation_moments_numba = njit(cache=True, fastmath=True)(_occupation_moments_loops)
else:  # pragma: no cover
    fill_hamiltonian_numba = _fill_hamiltonian_loops
    propagate_repeated_numba = _propagate_repeated_loops
    bit_distribution_numba = _bit_distribution_loops
    occupation_moments_numba = _occupation_moments_loops


if USE_NUMBA:
    fill_hamiltonian = fill_hamiltonian_numba
    propagate_repeated = propagate_repeated_numba
    bit_distribution = bit_distribution_numba
    occupation_moments = occupation_moments_numba
else:
    fill_hamiltonian = fill_hamiltonian_numpy
    propagate_repeated = propagate_repeated_numpy
    bit_distribution = bit_distribution_numpy
    occupation_moments = occupation_moments_numpy


def backend() -> str:
    """Name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
