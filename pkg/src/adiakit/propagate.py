"""Numerical solution of the scaled-time Schrodinger equation.

The integrator is the midpoint exponential (second-order Magnus) rule

    U(s + ds) = exp(-i tau ds H(s + ds/2, tau)) U(s),

which is unitary by construction, second-order accurate, and well behaved on
the highly oscillatory problems that arise at large tau. Each step costs one
Hermitian eigendecomposition in the active kernel backend.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .exceptions import NonHermitianError, StepLimitError
from .linalg import dagger
from .paths import HamiltonianPath

STEP_CAP = 10**7
_CHUNK_TARGET = 65536
_HERM_RTOL = 1e-10
_NOISE_FLOOR = 64.0 * np.finfo(float).eps


@dataclass
class PropagationResult:
    """Evolution operators U(s_k) on an ascending grid, U(s_0) = I."""

    grid: np.ndarray            # (K,)
    unitaries: np.ndarray       # (K, n, n)
    max_unitarity_defect: float
    steps_taken: int
    tau: float

    @property
    def dim(self) -> int:
        return self.unitaries.shape[-1]

    def final(self) -> np.ndarray:
        return self.unitaries[-1]

    def at(self, s: float) -> np.ndarray:
        k = int(np.argmin(np.abs(self.grid - s)))
        if abs(self.grid[k] - s) > 1e-9 * max(1.0, abs(s)):
            raise ValueError(f"s={s} is not a grid point")
        return self.unitaries[k]


def _check_hermitian_chunk(H, rtol=_HERM_RTOL):
    scale = max(float(np.max(np.linalg.norm(H, axis=(1, 2)))), 1e-300)
    defect = float(np.max(np.linalg.norm(H - dagger(H), axis=(1, 2))))
    if defect > rtol * scale:
        raise NonHermitianError(defect, rtol * scale)


def _max_unitarity_defect(us: np.ndarray) -> float:
    eye = np.eye(us.shape[-1])
    gram = np.einsum("kji,kjl->kil", us.conj(), us)
    return float(np.max(np.linalg.norm(gram - eye, axis=(1, 2))))


def propagate(path: HamiltonianPath, tau: float, grid,
              substeps: int = 1, step_cap: int = STEP_CAP) -> PropagationResult:
    """Propagate with fixed steps, recording U at every grid point.

    Each grid interval is subdivided into ``substeps`` midpoint-exponential
    micro-steps. Global error is O(ds^2) in the micro-step size.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must contain at least two points")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    substeps = int(substeps)
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    nint = len(grid) - 1
    total = nint * substeps
    if total > step_cap:
        raise StepLimitError(step_cap,
                             f"{total} steps requested, cap is {step_cap}")

    n = path.dim
    unitaries = np.empty((len(grid), n, n), dtype=complex)
    unitaries[0] = np.eye(n)
    ucur = np.eye(n, dtype=complex)
    coef = float(tau)

    # chunk whole grid intervals so records line up with grid points
    per_chunk = max(1, _CHUNK_TARGET // substeps)
    pos = 0
    while pos < nint:
        hi = min(pos + per_chunk, nint)
        lefts = grid[pos:hi]
        rights = grid[pos + 1:hi + 1]
        dsub = (rights - lefts) / substeps
        # midpoints of all micro-steps in the chunk, interval-major order
        offsets = (np.arange(substeps) + 0.5)[None, :] * dsub[:, None]
        mids = (lefts[:, None] + offsets).ravel()
        ds = np.repeat(dsub, substeps)
        H = path.eval_batch(mids, tau)
        _check_hermitian_chunk(H)
        # kernels symmetrize their working copies; no pre-hermitization needed
        records, ucur = kernels.propagate_steps(H, coef, ds, ucur, substeps)
        unitaries[pos + 1:hi + 1] = records
        pos = hi

    return PropagationResult(grid=grid, unitaries=unitaries,
                             max_unitarity_defect=_max_unitarity_defect(unitaries),
                             steps_taken=total, tau=float(tau))


def propagate_adaptive(path: HamiltonianPath, tau: float, s_end: float,
                       tol: float, s_start: float = 0.0,
                       h0: float = None, step_cap: int = STEP_CAP,
                       safety: float = 0.9,
                       batch: int = 64) -> PropagationResult:
    """Propagate with step-doubling control of the local error per unit s.

    Every step is validated by comparing the full midpoint-exponential step
    against the two half steps covering the same interval (Frobenius norm);
    a step of size h is accepted when that difference is at most ``tol * h``
    (or below the floating-point noise floor of the comparison, where the
    doubling estimate stops carrying information). The comparisons are
    evaluated ``batch`` steps at a time through the kernel backend; the
    accepted state follows the half-step chain. Returns U on the
    accepted-step grid.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if s_end <= s_start:
        raise ValueError("s_end must exceed s_start")
    span = s_end - s_start
    h = float(h0) if h0 else min(span, 0.1 / max(abs(tau), 1.0))
    h_floor = max(1e-13 * span, 8.0 * np.finfo(float).eps * (abs(s_start) + span))
    n = path.dim
    coef = float(tau)
    eye = np.eye(n, dtype=complex)

    grid = [s_start]
    us = [eye]
    ucur = eye
    s = s_start
    trials = 0
    while s < s_end - 1e-14 * span:
        remaining = s_end - s
        m = int(min(batch, max(1, np.ceil(remaining / h - 1e-12))))
        heff = min(h, remaining / m)
        trials += 3 * m
        if trials > step_cap:
            raise StepLimitError(step_cap,
                                 f"step-doubling exceeded cap {step_cap} "
                                 f"(tolerance {tol} may be unreachable)")
        mids_full = s + (np.arange(m) + 0.5) * heff
        mids_half = s + (np.arange(2 * m) + 0.5) * (0.5 * heff)
        Hf = path.eval_batch(mids_full, tau)
        Hh = path.eval_batch(mids_half, tau)
        _check_hermitian_chunk(Hh)  # kernels symmetrize their working copies
        rec_f, _ = kernels.propagate_steps(Hf, coef, np.full(m, heff), eye, 1)
        rec_h, _ = kernels.propagate_steps(Hh, coef,
                                           np.full(2 * m, 0.5 * heff), eye, 2)
        # per-step operators over each interval: S_k = U_k U_{k-1}^dagger
        step_f = rec_f.copy()
        step_f[1:] = rec_f[1:] @ dagger(rec_f[:-1])
        step_h = rec_h.copy()
        step_h[1:] = rec_h[1:] @ dagger(rec_h[:-1])
        local = np.linalg.norm(step_f - step_h, axis=(1, 2))
        target = tol * heff
        if target <= _NOISE_FLOOR:
            # the doubling comparison is below its own floating-point noise:
            # it carries no information, so accept and grow back into the
            # measurable regime
            naccept = m
            h = heff * 2.0
        else:
            ok = local <= target
            naccept = int(np.argmin(ok)) if not ok.all() else m
            if naccept == 0 and heff <= h_floor:
                naccept = 1    # step size floor: accept rather than stall
            worst = float(np.max(local[:naccept])) if naccept > 0 \
                else float(local[0])
            worst = max(worst, 1e-3 * target)
            factor = (target / worst) ** (1.0 / 3.0)
            h = max(heff * min(2.0, max(0.2, safety * factor)), h_floor)
        if naccept > 0:
            new_us = rec_h[:naccept] @ ucur
            for k in range(naccept):
                grid.append(s + (k + 1) * heff)
                us.append(new_us[k])
            ucur = new_us[-1]
            s += naccept * heff

    unitaries = np.array(us)
    return PropagationResult(grid=np.array(grid), unitaries=unitaries,
                             max_unitarity_defect=_max_unitarity_defect(unitaries),
                             steps_taken=trials // 3, tau=float(tau))
