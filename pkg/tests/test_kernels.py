import os
import subprocess
import sys

import numpy as np
import pytest

from rydseq import kernels

pytestmark = pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba not installed")


def _random_model(rng, dim=16, n_chan=4, n_links=24):
    lo = rng.integers(0, dim // 2, n_links)
    hi = lo + dim // 2
    chan = rng.integers(0, n_chan, n_links)
    return (
        rng.normal(size=dim),
        lo.astype(np.int64),
        hi.astype(np.int64),
        chan.astype(np.int64),
        rng.choice([-1.0, 0.0, 1.0], size=(n_chan, dim)),
        rng.normal(size=n_chan) + 1j * rng.normal(size=n_chan),
        rng.normal(size=n_chan),
    )


@pytest.mark.parametrize("seed", range(5))
def test_fill_hamiltonian_backends_agree(seed):
    args = _random_model(np.random.default_rng(seed))
    a = kernels.fill_hamiltonian_numpy(*args)
    b = kernels.fill_hamiltonian_numba(*args)
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(a, a.conj().T)


@pytest.mark.parametrize("seed", range(3))
def test_propagate_backends_agree(seed):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    psi = rng.normal(size=8) + 0j
    psi /= np.linalg.norm(psi)
    a = kernels.propagate_repeated_numpy(q, psi, 7)
    b = kernels.propagate_repeated_numba(q, psi, 7)
    assert a.shape == (7, 8)
    assert np.allclose(a, b, atol=1e-12)
    assert np.allclose(a[-1], np.linalg.matrix_power(q, 7) @ psi)


def test_bit_distribution_backends_agree():
    rng = np.random.default_rng(1)
    probs = rng.random(27)
    keys = rng.integers(0, 8, 27).astype(np.int64)
    a = kernels.bit_distribution_numpy(probs, keys, 8)
    assert np.allclose(a, kernels.bit_distribution_numba(probs, keys, 8))
    assert a.sum() == pytest.approx(probs.sum())


def test_occupation_moments_backends_agree():
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, (50, 6)).astype(np.float64)
    w = rng.random(50)
    w /= w.sum()
    m1, p1 = kernels.occupation_moments_numpy(bits, w)
    m2, p2 = kernels.occupation_moments_numba(bits, w)
    assert np.allclose(m1, m2) and np.allclose(p1, p2)
    assert np.allclose(np.diag(p1), m1)


def test_env_flag_selects_numpy():
    env = dict(os.environ, RYDSEQ_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from rydseq import kernels; print(kernels.backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
    assert kernels.backend() == ("numpy" if os.environ.get("RYDSEQ_DISABLE_NUMBA") == "1" else "numba")
