"""Compiled Jacobi kernels against the pure Python (LAPACK) twin."""

import os
import subprocess
import sys

import numpy as np
import pytest

from adiakit import _kernels_py

compiled = pytest.importorskip("adiakit._kernels")


def random_hermitian_stack(n, dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, dim, dim)) + 1j * rng.standard_normal((n, dim, dim))
    return 0.5 * (m + np.conj(np.swapaxes(m, 1, 2)))


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_eigh_values_agree(dim):
    H = random_hermitian_stack(20, dim, seed=dim)
    for k in range(len(H)):
        wc, vc = compiled.eigh(H[k])
        wp, vp = _kernels_py.eigh(H[k])
        assert np.allclose(wc, wp, atol=1e-12)
        # vectors agree up to per-level phase: compare projectors
        for j in range(dim):
            pc = np.outer(vc[:, j], vc[:, j].conj())
            pp = np.outer(vp[:, j], vp[:, j].conj())
            assert np.linalg.norm(pc - pp) <= 1e-10


def test_eigh_batch_matches_single():
    H = random_hermitian_stack(50, 3, seed=42)
    W, V = compiled.eigh_batch(H)
    for k in (0, 17, 49):
        w, v = compiled.eigh(H[k])
        assert np.array_equal(w, W[k])
        assert np.array_equal(v, V[k])


def test_expm_agree():
    H = random_hermitian_stack(1, 4, seed=7)[0]
    uc = compiled.expm_herm(H, 0.9)
    up = _kernels_py.expm_herm(H, 0.9)
    assert np.linalg.norm(uc - up) <= 1e-12


def test_propagate_steps_agree():
    H = random_hermitian_stack(64, 2, seed=8)
    ds = np.full(64, 0.01)
    u0 = np.eye(2, dtype=complex)
    rc, fc = compiled.propagate_steps(H, 3.0, ds, u0, 8)
    rp, fp = _kernels_py.propagate_steps(H, 3.0, ds, u0, 8)
    assert rc.shape == rp.shape == (8, 2, 2)
    assert np.linalg.norm(fc - fp) <= 1e-12
    assert np.max(np.linalg.norm(rc - rp, axis=(1, 2))) <= 1e-12


def test_propagate_steps_record_alignment():
    H = random_hermitian_stack(6, 2, seed=9)
    ds = np.full(6, 0.05)
    u0 = np.eye(2, dtype=complex)
    recs, final = compiled.propagate_steps(H, 1.0, ds, u0, 2)
    # manual chain
    u = u0.copy()
    manual = []
    for k in range(6):
        u = compiled.expm_herm(H[k], 0.05) @ u
        if (k + 1) % 2 == 0:
            manual.append(u.copy())
    assert np.allclose(recs, np.array(manual), atol=1e-13)
    assert np.allclose(final, manual[-1], atol=1e-13)


def test_backend_env_override():
    code = ("import adiakit; import sys; "
            "sys.exit(0 if adiakit.backend_name() == 'python' else 1)")
    env = dict(os.environ, ADIAKIT_BACKEND="python",
               PYTHONPATH=os.pathsep.join(sys.path))
    proc = subprocess.run([sys.executable, "-c", code], env=env)
    assert proc.returncode == 0


def test_kernel_input_not_clobbered():
    H = random_hermitian_stack(1, 3, seed=10)[0]
    snapshot = H.copy()
    compiled.eigh(H)
    assert np.array_equal(H, snapshot)
