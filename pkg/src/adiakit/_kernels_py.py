"""Pure Python twin of the compiled kernels.

Same four entry points as ``adiakit._kernels`` (eigh, eigh_batch, expm_herm,
propagate_steps), built on numpy's stacked LAPACK eigensolver instead of the
compiled cyclic Jacobi. Selected automatically when the extension is not
built; force with ``ADIAKIT_BACKEND=python``. Expect roughly an order of
magnitude slower propagation loops (see benchmarks/bench_backends.py).
"""

import numpy as np

BACKEND = "python"

MAXDIM = 32


def _check_square(a, name="matrix"):
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square")
    if a.shape[-1] > MAXDIM:
        raise ValueError(f"dimension {a.shape[-1]} exceeds kernel limit {MAXDIM}")


def _hermitize(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def eigh(H):
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""
    a = np.asarray(H, dtype=np.complex128)
    _check_square(a)
    w, v = np.linalg.eigh(_hermitize(a))
    return w, v


def eigh_batch(Hs):
    """Stacked eigh: ``Hs`` has shape (N, n, n); returns (W, V)."""
    a = np.asarray(Hs, dtype=np.complex128)
    _check_square(a)
    w, v = np.linalg.eigh(_hermitize(a))
    return w, v


def expm_herm(H, alpha):
    """exp(-i * alpha * H) for Hermitian H, via eigendecomposition."""
    w, v = eigh(H)
    return (v * np.exp(-1j * alpha * w)) @ v.conj().T


def propagate_steps(Hmid, coef, ds, U0, record_every):
    """Chain midpoint exponentials: U <- exp(-i coef ds_k H_k) U.

    Mirrors the compiled kernel: records U after every ``record_every``
    steps (the step count must be divisible by it).
    """
    h = np.asarray(Hmid, dtype=np.complex128)
    _check_square(h, "step matrices")
    d = np.asarray(ds, dtype=np.float64)
    m, n = h.shape[0], h.shape[1]
    if d.shape != (m,):
        raise ValueError("ds length must match step count")
    if record_every <= 0 or m % record_every != 0:
        raise ValueError("record_every must divide the step count")
    w, v = np.linalg.eigh(_hermitize(h))
    phases = np.exp(-1j * coef * d[:, None] * w)
    steps = np.einsum("kij,kj,klj->kil", v, phases, v.conj())
    u = np.array(U0, dtype=np.complex128)
    if u.shape != (n, n):
        raise ValueError("U0 dimension mismatch")
    records = np.empty((m // record_every, n, n), dtype=np.complex128)
    rec = 0
    for k in range(m):
        u = steps[k] @ u
        if (k + 1) % record_every == 0:
            records[rec] = u
            rec += 1
    return records, u
