"""
Subspaces on which a k-fold photon loss can be undone by a unitary.

The jump c**k restricted to span(B) agrees with some unitary iff it is an
isometry there, i.e. iff the Gram matrix B^H (c^H)**k c**k B is the identity.
Because (c^H)**k c**k is diagonal in the number basis with entries
n (n-1) ... (n-k+1), feasibility for one k means span(B) is a neutral subspace
of the diagonal form A_k = diag(n (n-1) ... (n-k+1) - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, linprog

from .errors import (DimensionError, InfeasibleError, JumpbackError,
                     NotReversibleError, SupportError)
from .fock import (DEFAULT_TOL, FockVector, falling_factorials, lowering_power,
                   orthonormality_deviation, require_normalized)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis of a candidate reversible subspace.

    ``k_max`` is the largest multiplicity K such that the subspace is certified
    reversible for every k <= K (0 if unverified).
    """

    basis: tuple
    k_max: int = 0
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        basis = tuple(self.basis)
        if not basis:
            raise DimensionError("subspace basis is empty")
        dims = {b.dim for b in basis}
        if len(dims) != 1:
            raise DimensionError("basis vectors have different n_max")
        object.__setattr__(self, "basis", basis)
        mat = np.column_stack([b.amplitudes for b in basis])
        if mat.shape[1] > mat.shape[0]:
            raise DimensionError("more basis vectors than the space dimension")
        dev = orthonormality_deviation(mat)
        if dev > self.tol:
            raise DimensionError(f"basis is not orthonormal (deviation {dev:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "_matrix", mat)
        if self.k_max < 0:
            raise JumpbackError("k_max must be non-negative")
        for k in range(1, self.k_max + 1):
            for b in basis:
                if abs(factorial_moment(b, k, self.tol) - 1.0) > self.tol:
                    raise JumpbackError(
                        f"k_max={self.k_max} but a basis vector has "
                        f"factorial moment of order {k} != 1")

    @classmethod
    def span(cls, vectors: Iterable[FockVector], k_max: int = 0,
             tol: float = DEFAULT_TOL) -> "Subspace":
        """Orthonormalize ``vectors`` (Gram-Schmidt order) and wrap them."""
        vectors = list(vectors)
        if not vectors:
            raise DimensionError("cannot span an empty set")
        mat = np.column_stack([v.amplitudes for v in vectors])
        q, r = np.linalg.qr(mat)
        diag = np.diag(r)
        if np.min(np.abs(diag)) <= tol:
            raise DimensionError("vectors are linearly dependent")
        q = q * (diag / np.abs(diag))
        return cls(tuple(FockVector(col) for col in q.T), k_max=k_max, tol=tol)

    @classmethod
    def from_matrix(cls, mat: np.ndarray, k_max: int = 0,
                    tol: float = DEFAULT_TOL) -> "Subspace":
        return cls(tuple(FockVector(col) for col in np.asarray(mat).T),
                   k_max=k_max, tol=tol)

    @property
    def basis_matrix(self) -> np.ndarray:
        """Basis vectors as columns, shape (n_max + 1, dim)."""
        return self._matrix

    @property
    def n_max(self) -> int:
        return self.basis[0].n_max

    @property
    def dim(self) -> int:
        return len(self.basis)

    def projector(self) -> np.ndarray:
        return self._matrix @ self._matrix.conj().T

    def support(self, tol: Optional[float] = None) -> tuple:
        """Photon numbers carrying weight anywhere in the subspace."""
        tol = self.tol if tol is None else tol
        weights = np.sum(np.abs(self._matrix) ** 2, axis=1)
        return tuple(int(n) for n in np.flatnonzero(weights > tol))

    def with_k_max(self, k_max: int) -> "Subspace":
        return Subspace(self.basis, k_max=k_max, tol=self.tol)

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "basis": [b.to_dict() for b in self.basis],
            "k_max": self.k_max,
        }

    @classmethod
    def from_dict(cls, data, tol: float = DEFAULT_TOL) -> "Subspace":
        try:
            n_max = int(data["n_max"])
            basis = tuple(FockVector.from_dict(b) for b in data["basis"])
            k_max = int(data.get("k_max", 0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, JumpbackError):
                raise
            raise JumpbackError(f"malformed subspace: {exc}") from exc
        if any(b.n_max != n_max for b in basis):
            raise DimensionError("basis vector n_max differs from subspace n_max")
        return cls(basis, k_max=k_max, tol=tol)


@dataclass(frozen=True)
class ReversibilityReport:
    is_reversible: bool
    k: int
    gram_deviation: float
    violating_pair: Optional[tuple] = None

    def to_dict(self) -> dict:
        return {
            "is_reversible": self.is_reversible,
            "k": self.k,
            "gram_deviation": self.gram_deviation,
            "violating_pair": (None if self.violating_pair is None
                               else list(self.violating_pair)),
        }


def factorial_moment(state: FockVector, k: int, tol: float = DEFAULT_TOL) -> float:
    """<psi| N (N-1) ... (N-k+1) |psi>, evaluated as ||c**k psi||^2."""
    if k < 1:
        raise JumpbackError(f"k must be >= 1, got {k}")
    require_normalized(state, tol)
    image = lowering_power(state.n_max, k) @ state.amplitudes
    return float(np.vdot(image, image).real)


def _require_headroom(subspace: Subspace, k: int, tol: float):
    if k < 1:
        raise JumpbackError(f"k must be >= 1, got {k}")
    top = subspace.basis_matrix[max(subspace.n_max - k + 1, 0):, :]
    if top.size and np.max(np.abs(top)) > tol:
        raise SupportError(
            f"subspace has amplitude on the top {k} level(s) of n_max="
            f"{subspace.n_max}; raise n_max so truncation cannot mask leakage")


def jump_images(subspace: Subspace, k: int) -> np.ndarray:
    """Columns c**k b_i."""
    return lowering_power(subspace.n_max, k) @ subspace.basis_matrix


def check_reversible(subspace: Subspace, k: int,
                     tol: Optional[float] = None) -> ReversibilityReport:
    tol = subspace.tol if tol is None else tol
    _require_headroom(subspace, k, tol)
    images = jump_images(subspace, k)
    diff = np.abs(images.conj().T @ images - np.eye(subspace.dim))
    dev = float(np.max(diff))
    ok = dev <= tol
    pair = None
    if not ok:
        i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        pair = (int(i), int(j))
    return ReversibilityReport(ok, k, dev, pair)


def certified_k_max(subspace: Subspace, tol: Optional[float] = None) -> int:
    """Largest K with check_reversible passing for every k <= K."""
    tol = subspace.tol if tol is None else tol
    k = 0
    while k + 1 <= subspace.n_max:
        try:
            report = check_reversible(subspace, k + 1, tol)
        except SupportError:
            break
        if not report.is_reversible:
            break
        k += 1
    return k


def certify(subspace: Subspace, tol: Optional[float] = None) -> Subspace:
    return subspace.with_k_max(certified_k_max(subspace, tol))


def min_photon_support(subspace: Subspace, k: int,
                       tol: Optional[float] = None) -> bool:
    """True iff every state of the subspace has weight on some n >= k.

    Exact: the smallest eigenvalue of the compressed projector onto n >= k is
    the least weight any unit vector of the subspace puts on those levels.
    """
    tol = subspace.tol if tol is None else tol
    if k <= 0:
        return True
    upper = subspace.basis_matrix[k:, :]
    if upper.size == 0:
        return False
    weights = np.linalg.eigvalsh(upper.conj().T @ upper)
    return bool(weights[0] > tol)


def _polar_isometry(mat: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(mat, full_matrices=False)
    return u @ vh


def _complement(mat: np.ndarray) -> np.ndarray:
    """Orthonormal basis for the orthogonal complement of the columns of ``mat``."""
    q, _ = np.linalg.qr(mat, mode="complete")
    return q[:, mat.shape[1]:]


def build_reversal_unitary(subspace: Subspace, k: int,
                           tol: Optional[float] = None) -> np.ndarray:
    """Unitary U on the full truncated space with U b_i = c**k b_i.

    Recovery after a k-jump is U^H c**k psi = psi for psi in the subspace.
    The two orthogonal complements are matched column by column from a
    complete QR factorization, so the output is deterministic.
    """
    report = check_reversible(subspace, k, tol)
    if not report.is_reversible:
        raise NotReversibleError(
            f"c^{k} is not isometric on the subspace "
            f"(gram deviation {report.gram_deviation:.3e})")
    basis = subspace.basis_matrix
    images = _polar_isometry(jump_images(subspace, k))
    return images @ basis.conj().T + _complement(images) @ _complement(basis).conj().T


def best_unitary_fit(subspace: Subspace, k: int) -> tuple[np.ndarray, float]:
    """Unitary V maximizing sum_i Re <b_i| V^H c**k |b_i>, and the per-dimension optimum.

    The maximum of Re tr(V^H M) over unitaries, with M = sum_i c**k |b_i><b_i|,
    is the nuclear norm of M, attained by the polar factor of M. Divided by the
    subspace dimension this is the Haar-averaged recovery amplitude, which is 1
    exactly when the subspace is reversible.
    """
    basis = subspace.basis_matrix
    overlap = jump_images(subspace, k) @ basis.conj().T
    u, s, vh = np.linalg.svd(overlap)
    return u @ vh, float(np.sum(s) / subspace.dim)


# --- maximal subspace search ----------------------------------------------

def _support_size(n_max: int, k_set: Sequence[int]) -> int:
    size = n_max - max(k_set) + 1
    if size < 1:
        raise InfeasibleError(
            f"n_max={n_max} leaves no levels below the top {max(k_set)}")
    return size


def _forms(n_max: int, k_set: Sequence[int], size: int) -> dict:
    return {k: falling_factorials(n_max, k)[:size] - 1.0 for k in k_set}


def neutral_signature(n_max: int, k: int,
                      support_size: Optional[int] = None) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of A_k on the levels n < support_size.

    ``support_size`` defaults to excluding the top k levels.
    """
    size = _support_size(n_max, [k]) if support_size is None else support_size
    vals = falling_factorials(n_max, k)[:size] - 1.0
    return (int(np.sum(vals > 0)), int(np.sum(vals < 0)), int(np.sum(vals == 0)))


def max_neutral_dimension(n_max: int, k: int,
                          support_size: Optional[int] = None) -> int:
    n_plus, n_minus, n_zero = neutral_signature(n_max, k, support_size)
    return min(n_plus, n_minus) + n_zero


def _pairing_basis(form: np.ndarray, n_max: int) -> list[np.ndarray]:
    """Maximal neutral subspace of a diagonal form.

    The form is diagonal in the number basis, so its eigenvectors are number
    states. Null levels are taken as they are; the i-th negative level is
    paired with the i-th positive level (both in increasing n) with weights
    that cancel the form.
    """
    dim = n_max + 1
    zeros = [n for n, v in enumerate(form) if v == 0]
    neg = [n for n, v in enumerate(form) if v < 0]
    pos = [n for n, v in enumerate(form) if v > 0]
    vectors = []
    for n in zeros:
        vec = np.zeros(dim, dtype=complex)
        vec[n] = 1.0
        vectors.append(vec)
    for n_minus, n_plus in zip(neg, pos):
        lam_minus, lam_plus = -form[n_minus], form[n_plus]
        vec = np.zeros(dim, dtype=complex)
        vec[n_plus] = np.sqrt(lam_minus / (lam_plus + lam_minus))
        vec[n_minus] = np.sqrt(lam_plus / (lam_plus + lam_minus))
        vectors.append(vec)
    return vectors


def _radical_obstruction(forms: dict, size: int, d: int) -> bool:
    """A neutral subspace of maximal dimension for one form contains that
    form's null vectors, so those must be neutral for every other form."""
    for k, form in forms.items():
        n_plus = int(np.sum(form > 0))
        n_minus = int(np.sum(form < 0))
        null = np.flatnonzero(form == 0)
        if min(n_plus, n_minus) + null.size != d:
            continue
        for other in forms.values():
            if np.any(other[null] != 0):
                return True
    return False


def _lp_vector(forms: dict, size: int) -> Optional[np.ndarray]:
    """Single neutral vector via a linear program on the populations p_n."""
    a_eq = np.vstack([np.ones(size)] + [forms[k] for k in sorted(forms)])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[0] = 1.0
    # increasing cost steers the vertex toward low photon numbers
    res = linprog(np.arange(size, dtype=float), A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if res.status != 0:
        return None
    support = np.flatnonzero(res.x > 1e-9)
    # polish on the vertex support so the constraints hold to rounding error
    p_support, *_ = np.linalg.lstsq(a_eq[:, support], b_eq, rcond=None)
    if np.any(p_support < 0):
        return None
    p = np.zeros(size)
    p[support] = p_support
    return np.sqrt(p).astype(complex)


def _residuals(y: np.ndarray, weights: list[np.ndarray]) -> np.ndarray:
    d = y.shape[1]
    iu = np.triu_indices(d)
    iu1 = np.triu_indices(d, 1)
    eye = np.eye(d)
    out = []
    for f in weights:
        r = y.conj().T @ (f[:, None] * y) - eye
        out.append(r[iu].real)
        out.append(r[iu1].imag)
    return np.concatenate(out)


def _residual_jacobian(y: np.ndarray, weights: list[np.ndarray]) -> np.ndarray:
    m, d = y.shape
    iu = np.triu_indices(d)
    iu1 = np.triu_indices(d, 1)
    eye = np.eye(d)
    rows = []
    for f in weights:
        fy = f[:, None] * y
        # derivative of y^H F y w.r.t. Re y[a, b], indexed [i, j, a, b]
        t1 = np.einsum("ib,aj->ijab", eye, fy)
        t2 = np.einsum("ai,jb->ijab", fy.conj(), eye)
        d_re = (t1 + t2).reshape(d, d, m * d)
        d_im = (-1j * t1 + 1j * t2).reshape(d, d, m * d)
        full = np.concatenate([d_re, d_im], axis=2)
        rows.append(full[iu].real)
        rows.append(full[iu1].imag)
    return np.vstack(rows)


def _solve_neutral(forms: dict, size: int, d: int, rng) -> Optional[np.ndarray]:
    """Least-squares feasibility: find y (size x d) with y^H y = I and
    y^H F_k y = I for every k, from one random start. Returns the
    orthonormalized y or None if the solver stalls away from zero."""
    weights = [np.ones(size)] + [forms[k] + 1.0 for k in sorted(forms)]
    n = size * d
    y0 = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    y0 = _polar_isometry(y0)
    x0 = np.concatenate([y0.real.ravel(), y0.imag.ravel()])

    def unpack(x):
        return (x[:n] + 1j * x[n:]).reshape(size, d)

    res = least_squares(lambda x: _residuals(unpack(x), weights), x0,
                        jac=lambda x: _residual_jacobian(unpack(x), weights),
                        method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=500)
    if np.max(np.abs(res.fun)) > 1e-6:
        return None
    return _polar_isometry(unpack(res.x))


def _embed(columns: np.ndarray, n_max: int) -> np.ndarray:
    mat = np.zeros((n_max + 1, columns.shape[1]), dtype=complex)
    mat[:columns.shape[0]] = columns
    return mat


def _joint_deviation(subspace: Subspace, k_set: Sequence[int], tol: float):
    reports = [check_reversible(subspace, k, tol) for k in k_set]
    return all(r.is_reversible for r in reports), sum(r.gram_deviation for r in reports)


def _pick(candidates: list[Subspace], k_set: Sequence[int], tol: float):
    scored = []
    for sub in candidates:
        ok, total = _joint_deviation(sub, k_set, tol)
        if ok:
            scored.append((total, sub.support(tol), sub))
    if not scored:
        return None
    scored.sort(key=lambda item: (item[0], item[1]))
    return scored[0][2]


def find_maximal_reversible_subspace(n_max: int, k_set: Iterable[int],
                                     rng_seed: int = 0, restarts: int = 32,
                                     tol: float = DEFAULT_TOL) -> Subspace:
    """Largest subspace on which c**k is isometric for every k in ``k_set``.

    Support is restricted to n <= n_max - max(k_set). A single k is solved
    exactly by pairing eigenvectors of A_k. Several k are searched from the
    upper bound min_k dim_k downward: a linear program for dimension one and
    seeded least-squares restarts above that.
    """
    ks = sorted(set(int(k) for k in k_set))
    if not ks or ks[0] < 1:
        raise JumpbackError("k_set must contain integers >= 1")
    size = _support_size(n_max, ks)
    forms = _forms(n_max, ks, size)

    if len(ks) == 1:
        vectors = _pairing_basis(forms[ks[0]], n_max)
        if not vectors:
            raise InfeasibleError(f"no reversible subspace for k={ks[0]} at n_max={n_max}")
        return certify(Subspace(tuple(FockVector(v) for v in vectors), tol=tol))

    upper = min(max_neutral_dimension(n_max, k, size) for k in ks)
    for d in range(upper, 0, -1):
        if _radical_obstruction(forms, size, d):
            continue
        candidates = []
        for k in ks:
            vectors = _pairing_basis(forms[k], n_max)
            if len(vectors) == d:
                candidates.append(Subspace(tuple(FockVector(v) for v in vectors), tol=tol))
        if d == 1:
            vec = _lp_vector(forms, size)
            if vec is not None:
                candidates.append(Subspace((FockVector(_embed(vec[:, None], n_max)[:, 0]),),
                                           tol=tol))
        else:
            seeds = np.random.SeedSequence([rng_seed, d]).spawn(restarts)
            for seq in seeds:
                y = _solve_neutral(forms, size, d, np.random.default_rng(seq))
                if y is not None:
                    candidates.append(Subspace.from_matrix(_embed(y, n_max), tol=tol))
        best = _pick(candidates, ks, tol)
        if best is not None:
            return certify(best)
    raise InfeasibleError(f"no subspace is jointly reversible for k in {ks} at n_max={n_max}")


def sample_reversible_subspace(n_max: int, k_set: Iterable[int], dim: int,
                               rng_seed=None, attempts: int = 64,
                               tol: float = DEFAULT_TOL) -> Subspace:
    """A random subspace of dimension ``dim`` certified for every k in ``k_set``."""
    ks = sorted(set(int(k) for k in k_set))
    size = _support_size(n_max, ks)
    forms = _forms(n_max, ks, size)
    rng = np.random.default_rng(rng_seed)
    for _ in range(attempts):
        y = _solve_neutral(forms, size, dim, rng)
        if y is None:
            continue
        sub = Subspace.from_matrix(_embed(y, n_max), tol=tol)
        if _joint_deviation(sub, ks, tol)[0]:
            return certify(sub)
    raise InfeasibleError(
        f"no {dim}-dimensional subspace found for k in {ks} at n_max={n_max}")
