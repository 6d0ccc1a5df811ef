"""Midpoint-exponential propagation: fixed grid and adaptive."""

import numpy as np
import pytest

import adiakit as ak
from adiakit import spinhalf
from adiakit.exceptions import StepLimitError
from adiakit.paths import HamiltonianPath, constant_hamiltonian

THETA, OMEGA0 = np.pi / 4, 1.0
WINDOW = 2 * np.pi


def test_zero_hamiltonian_gives_identity():
    h = constant_hamiltonian(np.zeros((3, 3), dtype=complex))
    grid = np.linspace(0, 1, 11)
    res = ak.propagate(h, 100.0, grid, substeps=5)
    assert np.max(np.abs(res.unitaries - np.eye(3))) <= 1e-14
    assert np.linalg.norm(res.unitaries[0] - np.eye(3)) == 0.0


def test_constant_hamiltonian_single_step_exact():
    H0 = 0.5 * OMEGA0 * np.array(ak.SIGMA_Z)
    h = constant_hamiltonian(H0)
    tau, s = 7.0, 1.3
    res = ak.propagate(h, tau, np.array([0.0, s]), substeps=1)
    ref = ak.unitary_exp(H0, tau * s)
    assert np.linalg.norm(res.final() - ref) <= 1e-13
    assert res.steps_taken == 1


def test_matches_closed_form_20000_steps():
    omega = 0.1
    tau = 1.0 / omega
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    grid = np.linspace(0, WINDOW, 41)
    res = ak.propagate(h, tau, grid, substeps=500)   # 20000 micro-steps
    ref = spinhalf.propagator_matrix(THETA, OMEGA0, omega, grid)
    assert np.max(np.linalg.norm(res.unitaries - ref, axis=(1, 2))) <= 1e-6
    assert res.max_unitarity_defect <= 1e-10


def test_convergence_order_two():
    omega = 0.1
    tau = 1.0 / omega
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    grid = np.linspace(0, WINDOW, 2)
    errs = []
    for substeps in (5000, 10000):
        res = ak.propagate(h, tau, grid, substeps=substeps)
        ref = spinhalf.propagator_matrix(THETA, OMEGA0, omega, WINDOW)
        errs.append(np.linalg.norm(res.final() - ref))
    ratio = errs[0] / errs[1]
    assert 4 * 0.8 <= ratio <= 4 * 1.2
    p = np.log2(ratio)
    assert abs(p - 2.0) <= 0.2


def test_composition_consistency():
    tau = 10.0
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    r1 = ak.propagate(h, tau, np.linspace(0, np.pi, 101), substeps=4)
    r2 = ak.propagate(h, tau, np.linspace(np.pi, WINDOW, 101), substeps=4)
    rf = ak.propagate(h, tau, np.linspace(0, WINDOW, 201), substeps=4)
    assert np.linalg.norm(r2.final() @ r1.final() - rf.final()) <= 1e-12


def test_rescaled_coupling_commutes():
    tau = 10.0
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    h2 = HamiltonianPath(2, lambda s, t: 2.0 * h.eval(s, t),
                         batch_eval_fn=lambda sv, t: 2.0 * h.eval_batch(sv, t))
    grid = np.linspace(0, WINDOW, 101)
    ra = ak.propagate(h, 2 * tau, grid, substeps=4)
    rb = ak.propagate(h2, tau, grid, substeps=4)
    assert np.max(np.linalg.norm(ra.unitaries - rb.unitaries, axis=(1, 2))) <= 1e-12


def test_step_cap_raises_without_partial_result():
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    with pytest.raises(StepLimitError):
        ak.propagate(h, 1.0, np.linspace(0, 1, 1001), substeps=100000,
                     step_cap=10**6)


def test_unitarity_defect_bounded_over_long_runs():
    tau = 100.0
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    res = ak.propagate(h, tau, np.linspace(0, WINDOW, 101), substeps=1000)
    assert res.max_unitarity_defect <= 1e-9


def test_adaptive_matches_fixed_grid_high_resolution():
    omega = 0.01
    tau = 1.0 / omega
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    fixed = ak.propagate(h, tau, np.linspace(0, WINDOW, 101), substeps=1000)
    adaptive = ak.propagate_adaptive(h, tau, WINDOW, tol=1e-8)
    assert np.linalg.norm(adaptive.final() - fixed.final()) <= 1e-7


def test_adaptive_step_count_monotone_in_tolerance():
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    loose = ak.propagate_adaptive(h, 10.0, WINDOW, tol=1e-5)
    strict = ak.propagate_adaptive(h, 10.0, WINDOW, tol=1e-8)
    assert loose.steps_taken < strict.steps_taken


def test_adaptive_meets_tolerance():
    omega = 0.1
    tau = 1.0 / omega
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    res = ak.propagate_adaptive(h, tau, WINDOW, tol=1e-8)
    ref = spinhalf.propagator_matrix(THETA, OMEGA0, omega, res.grid)
    err = np.max(np.linalg.norm(res.unitaries - ref, axis=(1, 2)))
    assert err <= 1e-8 * WINDOW
    assert res.grid[0] == 0.0 and abs(res.grid[-1] - WINDOW) <= 1e-12


def test_adaptive_step_cap():
    # tau=1000 at tol=1e-10 needs far more steps than the cap allows
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    with pytest.raises(StepLimitError):
        ak.propagate_adaptive(h, 1000.0, WINDOW, tol=1e-10, step_cap=3000)


def test_tau_dependent_paths_sample_true_tau():
    # dual path evaluated mid-step must see the true (s, tau) pair: compare
    # against its exact propagator
    theta, omega = 0.7, 0.2
    tau = 1.0 / omega
    h = spinhalf.hamiltonian(theta, OMEGA0)
    hb = ak.dual_of(h, spinhalf.exact_propagator(theta, OMEGA0))
    grid = np.linspace(0, WINDOW, 33)
    res = ak.propagate(hb, tau, grid, substeps=600)
    ref = spinhalf.dual_propagator(theta, OMEGA0).eval_batch(grid, tau)
    assert np.max(np.linalg.norm(res.unitaries - ref, axis=(1, 2))) <= 1e-5


def test_adaptive_nonzero_start():
    tau = 10.0
    h = spinhalf.hamiltonian(THETA, OMEGA0)
    full = ak.propagate_adaptive(h, tau, WINDOW, tol=1e-8)
    left = ak.propagate_adaptive(h, tau, np.pi, tol=1e-8)
    right = ak.propagate_adaptive(h, tau, WINDOW, tol=1e-8, s_start=np.pi)
    assert abs(right.grid[0] - np.pi) <= 1e-12
    assert np.linalg.norm(right.final() @ left.final() - full.final()) <= 1e-7
