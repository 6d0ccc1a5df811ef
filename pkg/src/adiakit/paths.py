"""Time-dependent Hamiltonian and unitary paths in scaled time.

A path maps scaled time s (and a time-scale factor tau = dt/ds) to a matrix.
With hbar = 1 the scaled Schrodinger equation reads

    i dU/ds = tau * H(s, tau) * U,

so tau -> infinity is the adiabatic limit. For the rotating spin-half model
one field rotation spans s in [0, 2*pi] and tau = 1/omega.

Paths are immutable after construction and evaluation is pure; concurrent
evaluation at distinct (s, tau) is safe.
"""

from typing import Callable, Optional

import numpy as np

from .linalg import dagger

# default finite-difference step for path derivatives (4th-order central)
FD_STEP = 1e-4

_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD4_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


class HamiltonianPath:
    """Map (s, tau) -> Hermitian matrix, with optional analytic derivative."""

    def __init__(self, dim: int,
                 eval_fn: Callable[[float, float], np.ndarray],
                 derivative_fn: Optional[Callable[[float, float], np.ndarray]] = None,
                 tau_dependent: bool = False,
                 batch_eval_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
                 batch_derivative_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
                 name: str = ""):
        self.dim = int(dim)
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        self._eval = eval_fn
        self._deriv = derivative_fn
        self._batch_eval = batch_eval_fn
        self._batch_deriv = batch_derivative_fn
        self.tau_dependent = bool(tau_dependent)
        self.name = name

    @property
    def has_derivative(self) -> bool:
        return self._deriv is not None or self._batch_deriv is not None

    def eval(self, s: float, tau: float = 1.0) -> np.ndarray:
        return np.asarray(self._eval(float(s), float(tau)), dtype=complex)

    def eval_batch(self, s_values: np.ndarray, tau: float = 1.0) -> np.ndarray:
        s_values = np.asarray(s_values, dtype=float)
        if self._batch_eval is not None:
            out = np.asarray(self._batch_eval(s_values, float(tau)), dtype=complex)
        else:
            out = np.empty((len(s_values), self.dim, self.dim), dtype=complex)
            for k, s in enumerate(s_values):
                out[k] = self.eval(s, tau)
        return out

    def derivative(self, s: float, tau: float = 1.0,
                   h: float = FD_STEP) -> np.ndarray:
        """dH/ds, analytic when registered, else 4th-order central difference."""
        if self._deriv is not None:
            return np.asarray(self._deriv(float(s), float(tau)), dtype=complex)
        if self._batch_deriv is not None:
            return np.asarray(
                self._batch_deriv(np.array([float(s)]), float(tau)), dtype=complex)[0]
        samples = self.eval_batch(s + h * _FD4_OFFSETS, tau)
        return np.tensordot(_FD4_WEIGHTS, samples, axes=(0, 0)) / h

    def derivative_batch(self, s_values: np.ndarray, tau: float = 1.0,
                         h: float = FD_STEP) -> np.ndarray:
        s_values = np.asarray(s_values, dtype=float)
        if self._batch_deriv is not None:
            return np.asarray(self._batch_deriv(s_values, float(tau)), dtype=complex)
        if self._deriv is not None:
            out = np.empty((len(s_values), self.dim, self.dim), dtype=complex)
            for k, s in enumerate(s_values):
                out[k] = self._deriv(float(s), float(tau))
            return out
        stencil = (s_values[:, None] + h * _FD4_OFFSETS[None, :]).ravel()
        samples = self.eval_batch(stencil, tau).reshape(
            len(s_values), 4, self.dim, self.dim)
        return np.tensordot(samples, _FD4_WEIGHTS, axes=(1, 0)) / h


class UnitaryPath:
    """Map (s, tau) -> unitary matrix with U(0, tau) = identity.

    ``generator`` is, when known, the Hamiltonian path G satisfying
    i dU/ds = tau * G(s, tau) * U; transformed-frame constructions need it.
    """

    def __init__(self, dim: int,
                 eval_fn: Callable[[float, float], np.ndarray],
                 batch_eval_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None,
                 generator: Optional[HamiltonianPath] = None,
                 name: str = ""):
        self.dim = int(dim)
        self._eval = eval_fn
        self._batch_eval = batch_eval_fn
        self.generator = generator
        self.name = name

    def eval(self, s: float, tau: float = 1.0) -> np.ndarray:
        return np.asarray(self._eval(float(s), float(tau)), dtype=complex)

    def eval_batch(self, s_values: np.ndarray, tau: float = 1.0) -> np.ndarray:
        s_values = np.asarray(s_values, dtype=float)
        if self._batch_eval is not None:
            return np.asarray(self._batch_eval(s_values, float(tau)), dtype=complex)
        out = np.empty((len(s_values), self.dim, self.dim), dtype=complex)
        for k, s in enumerate(s_values):
            out[k] = self.eval(s, tau)
        return out

    def with_generator(self, generator: HamiltonianPath) -> "UnitaryPath":
        return UnitaryPath(self.dim, self._eval, self._batch_eval,
                           generator=generator, name=self.name)

    def adjoint(self, name: str = "") -> "UnitaryPath":
        """Pointwise Hermitian conjugate path (origin stays the identity)."""
        return UnitaryPath(
            self.dim,
            lambda s, tau: dagger(self.eval(s, tau)),
            batch_eval_fn=lambda sv, tau: dagger(self.eval_batch(sv, tau)),
            name=name or (self.name + "^dagger"))

    def compose(self, other: "UnitaryPath", name: str = "") -> "UnitaryPath":
        """Pointwise product self(s) @ other(s)."""
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return UnitaryPath(
            self.dim,
            lambda s, tau: self.eval(s, tau) @ other.eval(s, tau),
            batch_eval_fn=lambda sv, tau: np.einsum(
                "kij,kjl->kil", self.eval_batch(sv, tau), other.eval_batch(sv, tau)),
            name=name)


def constant_hamiltonian(H0: np.ndarray, name: str = "constant") -> HamiltonianPath:
    H0 = np.asarray(H0, dtype=complex)
    dim = H0.shape[0]
    zero = np.zeros_like(H0)
    return HamiltonianPath(
        dim,
        lambda s, tau: H0,
        derivative_fn=lambda s, tau: zero,
        batch_eval_fn=lambda sv, tau: np.broadcast_to(H0, (len(sv), dim, dim)).copy(),
        name=name)


def identity_unitary(dim: int) -> UnitaryPath:
    eye = np.eye(dim, dtype=complex)
    return UnitaryPath(
        dim,
        lambda s, tau: eye,
        batch_eval_fn=lambda sv, tau: np.broadcast_to(eye, (len(sv), dim, dim)).copy(),
        name="identity")
