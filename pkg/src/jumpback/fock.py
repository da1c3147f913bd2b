"""
Truncated single-mode Fock space.

States are amplitude vectors over the photon-number basis |0>, ..., |n_max>,
stored in increasing n. Operators are plain dense ``numpy`` arrays of shape
(n_max + 1, n_max + 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import perm
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, JumpbackError, NormalizationError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FockVector:
    """Immutable amplitude vector; ``amplitudes[n]`` is the n-photon amplitude."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionError("amplitudes must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(amps)):
            raise JumpbackError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def number_state(cls, n: int, n_max: int) -> "FockVector":
        if not 0 <= n <= n_max:
            raise DimensionError(f"photon number {n} outside 0..{n_max}")
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[n] = 1.0
        return cls(amps)

    @classmethod
    def superposition(cls, coeffs: Mapping[int, complex], n_max: int,
                      normalize: bool = True) -> "FockVector":
        """Build sum_n coeffs[n] |n>, e.g. ``{0: 1, 2: 1}`` for (|0>+|2>)/sqrt(2)."""
        amps = np.zeros(n_max + 1, dtype=complex)
        for n, a in coeffs.items():
            if not 0 <= n <= n_max:
                raise DimensionError(f"photon number {n} outside 0..{n_max}")
            amps[n] = a
        vec = cls(amps)
        return vec.normalized() if normalize else vec

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm ** 2 - 1.0) <= tol

    def normalized(self) -> "FockVector":
        norm = self.norm
        if norm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return FockVector(self.amplitudes / norm)

    def overlap(self, other: "FockVector") -> complex:
        """<self|other>."""
        _check_dims(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "FockVector") -> float:
        """Phase-blind overlap |<self|other>|."""
        return abs(self.overlap(other))

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "FockVector":
        try:
            n_max = int(data["n_max"])
            pairs = data["amplitudes"]
            amps = [complex(float(re), float(im)) for re, im in pairs]
        except (KeyError, TypeError, ValueError) as exc:
            raise JumpbackError(f"malformed state: {exc}") from exc
        if len(amps) != n_max + 1:
            raise DimensionError(
                f"state has {len(amps)} amplitudes but n_max={n_max}")
        return cls(np.array(amps, dtype=complex))

    def __repr__(self):
        return f"FockVector(n_max={self.n_max}, amplitudes={self.amplitudes!r})"


def _check_dims(a: int, b: int):
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} != {b}")


def require_normalized(state: FockVector, tol: float = DEFAULT_TOL):
    if not state.is_normalized(tol):
        raise NormalizationError(
            f"state is not normalized (norm^2 = {state.norm ** 2:.3e})")


def make_ladder(n_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (c, c_dag, N) on the truncated basis.

    ``N`` is built as the exact diagonal diag(0, ..., n_max) rather than the
    product ``c_dag @ c``.
    """
    if n_max < 1:
        raise DimensionError(f"n_max must be >= 1, got {n_max}")
    c = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    c_dag = c.conj().T.copy()
    number = np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)
    return c, c_dag, number


def lowering_power(n_max: int, k: int) -> np.ndarray:
    """Matrix of c**k."""
    c, _, _ = make_ladder(n_max)
    return np.linalg.matrix_power(c, k)


def falling_factorials(n_max: int, k: int) -> np.ndarray:
    """n (n-1) ... (n-k+1) for n = 0..n_max, i.e. the diagonal of c_dag**k c**k."""
    return np.array([perm(n, k) for n in range(n_max + 1)], dtype=float)


def is_hermitian(op: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= tol)


def is_unitary(op: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    eye = np.eye(op.shape[0])
    return bool(np.max(np.abs(op.conj().T @ op - eye), initial=0.0) <= tol)


def expectation(state: FockVector, op: np.ndarray, tol: float = DEFAULT_TOL):
    """<psi|op|psi>.

    Returns a float when ``op`` is Hermitian (the imaginary part is checked to
    be below ``tol`` and dropped), otherwise a complex number.
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError("operator must be a square matrix")
    _check_dims(state.dim, op.shape[0])
    require_normalized(state, tol)
    psi = state.amplitudes
    value = complex(np.vdot(psi, op @ psi))
    if is_hermitian(op, tol):
        if abs(value.imag) > tol * max(1.0, abs(value.real)):
            raise JumpbackError(
                f"hermitian expectation has imaginary part {value.imag:.3e}")
        return value.real
    return value


def number_expansion(state: FockVector, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Photon-number probabilities p_n = |c_n|^2."""
    require_normalized(state, tol)
    return np.abs(state.amplitudes) ** 2


def _basis_matrix(subspace) -> np.ndarray:
    if isinstance(subspace, np.ndarray):
        return subspace
    return subspace.basis_matrix


def sample_states_in_subspace(subspace, size: int, rng_seed=None) -> list[FockVector]:
    """Draw ``size`` Haar-random unit vectors from the span of ``subspace``.

    ``subspace`` is anything exposing an orthonormal ``basis_matrix`` (columns
    are basis vectors) or that matrix itself. ``rng_seed`` may be an integer,
    a ``SeedSequence`` or a ``Generator``.
    """
    basis = _basis_matrix(subspace)
    if basis.ndim != 2 or basis.shape[1] == 0:
        raise DimensionError("subspace is empty")
    rng = np.random.default_rng(rng_seed)
    d = basis.shape[1]
    z = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return [FockVector(basis @ row) for row in z]


def sample_state_in_subspace(subspace, rng_seed=None) -> FockVector:
    """A single Haar-random unit vector from ``subspace``; deterministic per seed."""
    return sample_states_in_subspace(subspace, 1, rng_seed)[0]


def random_state(n_max: int, rng_seed=None) -> FockVector:
    """Haar-random state on the full truncated space."""
    return sample_state_in_subspace(np.eye(n_max + 1, dtype=complex), rng_seed)


def orthonormality_deviation(vectors: Sequence[FockVector] | np.ndarray) -> float:
    """max |Gram - I| for a list of vectors or a matrix of column vectors."""
    if isinstance(vectors, np.ndarray):
        mat = vectors
    else:
        mat = np.column_stack([v.amplitudes for v in vectors])
    gram = mat.conj().T @ mat
    return float(np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0))
