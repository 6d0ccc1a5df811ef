"""Adiabaticity criteria, inconsistency detectors, and scenario classification.

All quantities are computed from an EigenFrame (plus evolution operators
where needed). Cumulative integrals use the trapezoid rule on the frame grid;
scalar integral values carry a Richardson correction, and the oscillation
rate per step is exposed so callers can refine grids (0.3 rad per step is the
refinement trigger used by the scenario layer).
"""

import enum
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .exceptions import ScalingUndefinedError
from .gauge import (EigenFrame, _cumtrapz, couplings, dynamical_phase,
                    eigenframe, kato_operator, kernel_coefficients)
from .paths import HamiltonianPath
from .propagate import PropagationResult

PHASE_PER_STEP_LIMIT = 0.3


class Classification(enum.Enum):
    ADIABATIC_CONSISTENT = "adiabatic_consistent"
    WEAK_RESONANT_INCONSISTENT = "weak_resonant_inconsistent"
    STRONG_OSCILLATORY = "strong_oscillatory"
    NONRESONANT_AVERAGED = "nonresonant_averaged"


@dataclass(frozen=True)
class Thresholds:
    """Classifier thresholds; defaults separate the reference regimes by
    at least an order of magnitude."""

    eps_q: float = 0.05
    eps_r: float = 0.1
    slope_tol: float = 0.15
    decay_slope: float = -0.5


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float    # rms residual of log values around the fit


def qac_max(frame: EigenFrame, C: Optional[np.ndarray] = None,
            real_time: bool = True) -> float:
    """Largest quantitative-adiabatic-condition ratio over pairs and grid.

    Real-time convention divides by tau (couplings are d/ds quantities);
    ``real_time=False`` gives the scaled-time value.
    """
    if C is None:
        C = couplings(frame)
    den = frame.values[:, None, :] - frame.values[:, :, None]
    n = frame.dim
    off = ~np.eye(n, dtype=bool)
    ratio = np.abs(C[:, off]) / np.abs(den[:, off])
    value = float(np.max(ratio))
    return value / frame.tau if real_time else value


def _pair_integrand(frame: EigenFrame, m: int, n: int,
                    C: Optional[np.ndarray] = None) -> np.ndarray:
    if C is None:
        C = couplings(frame)
    phi = frame.phase_integrals()
    return np.exp(1j * (phi[:, m] - phi[:, n])) * C[:, m, n]


def phase_rate_per_step(frame: EigenFrame) -> float:
    """Max dynamical phase advance per grid step, tau * max|dE| * ds."""
    dE = np.abs(frame.values[:, :, None] - frame.values[:, None, :]).max()
    return float(frame.tau * dE * np.max(np.diff(frame.grid)))


def resonance_series(frame: EigenFrame, m: int, n: int,
                     C: Optional[np.ndarray] = None) -> np.ndarray:
    """Cumulative trapezoid of exp(i tau int (E_m - E_n)) <E_m|dE_n/ds>."""
    return _cumtrapz(_pair_integrand(frame, m, n, C), frame.grid)


def _richardson_trapz(y: np.ndarray, x: np.ndarray) -> complex:
    """Trapezoid value with one Richardson step where the grid allows it
    (uniform spacing, even interval count >= 4); plain trapezoid otherwise."""
    t_h = np.trapezoid(y, x)
    dx = np.diff(x)
    uniform = np.allclose(dx, dx[0], rtol=1e-9, atol=0.0)
    if uniform and len(x) >= 5 and (len(x) - 1) % 2 == 0:
        t_2h = np.trapezoid(y[::2], x[::2])
        return t_h + (t_h - t_2h) / 3.0
    return t_h


def _end_index(grid: np.ndarray, s_end: Optional[float]) -> int:
    if s_end is None:
        return len(grid) - 1
    k = int(np.argmin(np.abs(grid - s_end)))
    if abs(grid[k] - s_end) > 1e-9 * max(1.0, abs(s_end)):
        raise ValueError(f"s_end={s_end} is not a grid point")
    return k


def resonance_integral(frame: EigenFrame, m: int, n: int,
                       s_end: Optional[float] = None,
                       C: Optional[np.ndarray] = None) -> complex:
    """Oscillatory resonance integral for the level pair (m, n) at s_end."""
    g = _pair_integrand(frame, m, n, C)
    k = _end_index(frame.grid, s_end)
    return complex(_richardson_trapz(g[:k + 1], frame.grid[:k + 1]))


def resonance_series_refined(frame: EigenFrame, m: int, n: int,
                             C: Optional[np.ndarray] = None):
    """Richardson-corrected cumulative resonance integral.

    Combines the trapezoid series at the frame step with the series at twice
    the step; returns (subgrid, series) on every second grid point. Needs a
    uniform grid with an even interval count; degrades to the plain series
    otherwise.
    """
    g = _pair_integrand(frame, m, n, C)
    dx = np.diff(frame.grid)
    uniform = np.allclose(dx, dx[0], rtol=1e-9, atol=0.0)
    if not uniform or (len(frame.grid) - 1) % 2 != 0:
        return frame.grid, _cumtrapz(g, frame.grid)
    s_h = _cumtrapz(g, frame.grid)
    s_2h = _cumtrapz(g[::2], frame.grid[::2])
    return frame.grid[::2], s_h[::2] + (s_h[::2] - s_2h) / 3.0


def resonance_max_abs(frame: EigenFrame, m: int, n: int,
                      C: Optional[np.ndarray] = None) -> float:
    """Max |cumulative resonance integral| over the grid."""
    return float(np.max(np.abs(resonance_series(frame, m, n, C))))


def f_norm(frame: EigenFrame, s_end: Optional[float] = None,
           C: Optional[np.ndarray] = None) -> float:
    """Frobenius norm of the accumulated kernel integral at s_end."""
    coeff = kernel_coefficients(frame, C)
    k = _end_index(frame.grid, s_end)
    n = frame.dim
    F = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            F[a, b] = _richardson_trapz(coeff[:k + 1, a, b],
                                        frame.grid[:k + 1])
    return float(np.linalg.norm(F))


def f_norm_series(frame: EigenFrame,
                  C: Optional[np.ndarray] = None) -> np.ndarray:
    """|| int_0^s kernel ||_F per grid point; shape (N,)."""
    coeff = kernel_coefficients(frame, C)
    F = _cumtrapz(coeff, frame.grid)
    return np.linalg.norm(F, axis=(1, 2))


def f_norm_max(frame: EigenFrame, C: Optional[np.ndarray] = None) -> float:
    """Max over s of the accumulated kernel norm.

    The end-of-window value oscillates with tau through the residual phase
    of the last partial oscillation; the running max is the monotone
    quantity whose tau-scaling separates decaying from persistent kernels.
    """
    return float(np.max(f_norm_series(frame, C)))


def projector_drift_series(frame: EigenFrame) -> np.ndarray:
    """max_n || P_n(s_k) - P_n(0) ||_F per grid point; shape (N,)."""
    out = np.zeros(frame.npoints)
    for j in range(frame.dim):
        P = frame.projector(j)
        d = np.linalg.norm(P - P[0], axis=(1, 2))
        np.maximum(out, d, out=out)
    return out


def projector_drift(frame: EigenFrame) -> float:
    """Max over levels and grid of || P_n(s) - P_n(0) ||_F."""
    return float(np.max(projector_drift_series(frame)))


def _unitaries_on_grid(U, frame: EigenFrame) -> np.ndarray:
    if isinstance(U, PropagationResult):
        if (len(U.grid) != frame.npoints
                or not np.allclose(U.grid, frame.grid, rtol=0, atol=1e-9)):
            raise ValueError("propagation grid does not match the frame grid")
        return U.unitaries
    if hasattr(U, "eval_batch"):   # UnitaryPath
        return U.eval_batch(frame.grid, frame.tau)
    U = np.asarray(U, dtype=complex)
    if U.shape != (frame.npoints, frame.dim, frame.dim):
        raise ValueError("unitary stack shape does not match the frame")
    return U


def intertwining_series(U, frame: EigenFrame) -> np.ndarray:
    """max_n || U(s) P_n(0) - P_n(s) U(s) ||_F per grid point."""
    us = _unitaries_on_grid(U, frame)
    out = np.zeros(frame.npoints)
    for j in range(frame.dim):
        P = frame.projector(j)
        d = np.linalg.norm(us @ P[0] - P @ us, axis=(1, 2))
        np.maximum(out, d, out=out)
    return out


def intertwining_defect(U, frame: EigenFrame) -> float:
    """Operational adiabaticity measure: max intertwining violation."""
    return float(np.max(intertwining_series(U, frame)))


def w_deviation(U, frame: EigenFrame) -> float:
    """max_s || Phi^dag(s) U_A^dag(s) U(s) - I ||_F (1 means non-adiabatic)."""
    us = _unitaries_on_grid(U, frame)
    ua = kato_operator(frame)
    ph = dynamical_phase(frame)
    w = np.einsum("kji,klj,klm->kim", ph.conj(), ua.conj(), us)
    eye = np.eye(frame.dim)
    return float(np.max(np.linalg.norm(w - eye, axis=(1, 2))))


def scaling_slope(taus: Sequence[float], values: Sequence[float],
                  min_points: int = 3) -> SlopeFit:
    """Least-squares slope of log(value) against log(tau)."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(taus) != len(values) or len(taus) < min_points:
        raise ScalingUndefinedError(
            f"need at least {min_points} (tau, value) pairs")
    if np.any(taus <= 0) or np.any(values <= 0):
        raise ScalingUndefinedError(
            "non-positive values make the log-log slope undefined")
    lx, ly = np.log(taus), np.log(values)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return SlopeFit(slope=float(coef[0]), intercept=float(coef[1]),
                    residual=rms)


def classify(qac_max_value: float, max_resonance: float,
             f_norm_slope: Optional[float],
             thresholds: Thresholds = Thresholds()) -> Classification:
    """Deterministic decision table over the three measured quantities.

    Small qac splits on the resonance-integral magnitude (the inconsistency
    detector); large qac splits on whether the kernel integral decays with
    tau (averaged-out drive) or not (genuinely oscillatory dynamics).
    """
    t = thresholds
    if qac_max_value < t.eps_q:
        if max_resonance >= t.eps_r:
            return Classification.WEAK_RESONANT_INCONSISTENT
        return Classification.ADIABATIC_CONSISTENT
    if f_norm_slope is None:
        raise ScalingUndefinedError(
            "classification with large qac needs an f_norm slope "
            "(provide at least two tau samples)")
    if f_norm_slope <= t.decay_slope:
        return Classification.NONRESONANT_AVERAGED
    return Classification.STRONG_OSCILLATORY


def premise_checks(path: HamiltonianPath, tau: float, grid,
                   gap_floor: float = 1e-8) -> Dict[str, float]:
    """Numerical proxies for the adiabatic-theorem premises.

    p1: eigenvalue continuity (largest level increment per step, absolute and
    after grid halving); p2: minimum spectral gap; p3: grid-refinement
    stability of the projector derivatives (finite-difference norms at ds and
    ds/2 should agree within a factor of two when the derivatives exist).
    """
    grid = np.asarray(grid, dtype=float)
    fine = np.empty(2 * len(grid) - 1)
    fine[0::2] = grid
    fine[1::2] = 0.5 * (grid[:-1] + grid[1:])

    fr_c = eigenframe(path, tau, grid, gap_floor=gap_floor)
    fr_f = eigenframe(path, tau, fine, gap_floor=gap_floor)

    def _proj_derivative_norms(fr):
        h = np.diff(fr.grid).mean()
        dmax = 0.0
        d2max = 0.0
        for j in range(fr.dim):
            P = fr.projector(j)
            dP = (P[2:] - P[:-2]) / (2 * h)
            d2P = (P[2:] - 2 * P[1:-1] + P[:-2]) / (h * h)
            dmax = max(dmax, float(np.max(np.linalg.norm(dP, axis=(1, 2)))))
            d2max = max(d2max, float(np.max(np.linalg.norm(d2P, axis=(1, 2)))))
        return dmax, d2max

    d1c, d2c = _proj_derivative_norms(fr_c)
    d1f, d2f = _proj_derivative_norms(fr_f)
    ratio1 = d1f / d1c if d1c > 0 else 1.0
    ratio2 = d2f / d2c if d2c > 0 else 1.0

    step_c = float(np.max(np.abs(np.diff(fr_c.values, axis=0))))
    step_f = float(np.max(np.abs(np.diff(fr_f.values, axis=0))))

    return {
        "p1_max_value_step": step_c,
        "p1_refined_ratio": step_f / step_c if step_c > 0 else 1.0,
        "p2_min_gap": fr_c.min_gap,
        "p3_dP_norm": d1c,
        "p3_d2P_norm": d2c,
        "p3_dP_ratio": ratio1,
        "p3_d2P_ratio": ratio2,
        "p3_stable": float(0.5 <= ratio1 <= 2.0 and 0.5 <= ratio2 <= 2.0),
    }
