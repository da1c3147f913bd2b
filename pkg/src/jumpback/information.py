"""
How much a detector click tells about which state was prepared.

A jump outcome is modelled as a Bernoulli event whose probability is a
strictly increasing function of the k-th factorial moment,
p = 1 - exp(-eta * <N (N-1) ... (N-k+1)>). The preparation is a classical
ensemble of states with prior weights; information is Shannon mutual
information in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import entr, rel_entr

from .errors import (AnnihilatedStateError, DimensionError, JumpbackError,
                     ZeroProbabilityOutcomeError)
from .fock import DEFAULT_TOL, FockVector, lowering_power, require_normalized
from .reversibility import Subspace, factorial_moment

JUMP = "jump"
NO_JUMP = "no-jump"
OUTCOMES = (JUMP, NO_JUMP)


@dataclass(frozen=True)
class DetectionModel:
    eta: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise JumpbackError(f"efficiency must lie in (0, 1], got {self.eta}")

    def probability(self, moment: float) -> float:
        """Click probability for a given factorial moment."""
        return float(-np.expm1(-self.eta * moment))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Classical mixture over prepared states: ``members`` is a tuple of (state, prior)."""

    members: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        members = tuple((state, float(prior)) for state, prior in self.members)
        if not members:
            raise JumpbackError("ensemble has no members")
        if len({s.dim for s, _ in members}) != 1:
            raise DimensionError("ensemble members have different n_max")
        for state, prior in members:
            require_normalized(state, self.tol)
            if prior < 0 or not np.isfinite(prior):
                raise JumpbackError(f"invalid prior {prior}")
        total = sum(p for _, p in members)
        if abs(total - 1.0) > self.tol:
            raise JumpbackError(f"priors sum to {total}, not 1")
        object.__setattr__(self, "members", members)

    @classmethod
    def uniform(cls, states: Sequence[FockVector]) -> "Ensemble":
        return cls(tuple((s, 1.0 / len(states)) for s in states))

    @property
    def states(self) -> list[FockVector]:
        return [s for s, _ in self.members]

    @property
    def priors(self) -> np.ndarray:
        return np.array([p for _, p in self.members])

    @property
    def n_max(self) -> int:
        return self.members[0][0].n_max

    def to_dict(self) -> dict:
        return {"members": [{"state": s.to_dict(), "prior": p} for s, p in self.members]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Ensemble":
        try:
            members = tuple((FockVector.from_dict(m["state"]), float(m["prior"]))
                            for m in data["members"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, JumpbackError):
                raise
            raise JumpbackError(f"malformed ensemble: {exc}") from exc
        return cls(members)


def jump_probability(state: FockVector, model: DetectionModel, k: int = 1) -> float:
    """Probability of observing the k-fold jump; zero for the vacuum."""
    return model.probability(factorial_moment(state, k))


def outcome_likelihoods(ensemble: Ensemble, model: DetectionModel, k: int = 1) -> np.ndarray:
    """Table P(outcome | member), shape (members, 2), columns (jump, no-jump)."""
    p = np.array([jump_probability(s, model, k) for s in ensemble.states])
    return np.column_stack([p, 1.0 - p])


def likelihood_spread(ensemble: Ensemble, model: DetectionModel, k: int = 1) -> float:
    """Largest difference in click probability between members.

    Zero means the outcome cannot distinguish the members at all.
    """
    p = outcome_likelihoods(ensemble, model, k)[:, 0]
    return float(np.max(p) - np.min(p))


def posterior(ensemble: Ensemble, outcome: str, model: DetectionModel,
              k: int = 1) -> Ensemble:
    """Bayes update of the priors after observing ``outcome``; states are kept."""
    if outcome not in OUTCOMES:
        raise JumpbackError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
    column = OUTCOMES.index(outcome)
    joint = ensemble.priors * outcome_likelihoods(ensemble, model, k)[:, column]
    marginal = float(np.sum(joint))
    if marginal <= 0.0:
        raise ZeroProbabilityOutcomeError(f"outcome {outcome!r} has probability zero")
    weights = joint / marginal
    return Ensemble(tuple(zip(ensemble.states, weights)))


def _bits(x):
    return x / np.log(2)


def prior_entropy(ensemble: Ensemble) -> float:
    return float(_bits(np.sum(entr(ensemble.priors))))


def mutual_information(ensemble: Ensemble, model: DetectionModel, k: int = 1) -> float:
    """I(preparation; outcome) in bits.

    Computed as sum_i prior_i KL(P(.|i) || P(.)), which is exactly zero when
    every member has the same likelihoods.
    """
    if k < 1:
        raise JumpbackError(f"k must be >= 1, got {k}")
    priors = ensemble.priors
    table = outcome_likelihoods(ensemble, model, k)
    marginal = priors @ table
    kl = np.sum(rel_entr(table, marginal[None, :]), axis=1)
    return max(0.0, float(_bits(priors @ kl)))


def post_jump_state(state: FockVector, k: int = 1, tol: float = DEFAULT_TOL) -> FockVector:
    """c**k |psi>, normalized."""
    if k < 1:
        raise JumpbackError(f"k must be >= 1, got {k}")
    require_normalized(state, tol)
    image = lowering_power(state.n_max, k) @ state.amplitudes
    norm = np.linalg.norm(image)
    if norm <= tol:
        raise AnnihilatedStateError(f"c^{k} annihilates the state")
    return FockVector(image / norm)


def number_eigenbasis(n_max: int) -> list[Subspace]:
    """Eigenspaces of N: one number state each."""
    return [Subspace((FockVector.number_state(n, n_max),)) for n in range(n_max + 1)]


def _check_eigenbasis(eigenbasis: Sequence[Subspace], dim: int, tol: float) -> list[np.ndarray]:
    if not eigenbasis:
        raise JumpbackError("eigenbasis is empty")
    mats = [s.basis_matrix for s in eigenbasis]
    if any(m.shape[0] != dim for m in mats):
        raise DimensionError("eigenbasis and ensemble live in different spaces")
    stacked = np.hstack(mats)
    if stacked.shape[1] != dim:
        raise JumpbackError(f"eigenspaces span {stacked.shape[1]} of {dim} dimensions")
    dev = np.max(np.abs(stacked.conj().T @ stacked - np.eye(dim)))
    if dev > tol:
        raise JumpbackError(f"eigenspaces are not mutually orthogonal (deviation {dev:.3e})")
    return mats


def _history_entropy(branches) -> float:
    totals = {}
    for weight, _, history in branches:
        totals[history] = totals.get(history, 0.0) + weight
    weights = np.array(list(totals.values()))
    return float(_bits(np.sum(entr(weights / weights.sum()))))


def repeated_measurement_info(eigenbasis: Sequence[Subspace], initial: Ensemble,
                              count: int, tol: float = DEFAULT_TOL) -> list[float]:
    """Information (bits) supplied by each of ``count`` repeated projective
    measurements of the same observable.

    Round r contributes H(a_r | a_1, ..., a_{r-1}), the entropy of its outcome
    index given all earlier outcomes. Branches are propagated exactly.
    """
    if count < 1:
        raise JumpbackError(f"count must be >= 1, got {count}")
    mats = _check_eigenbasis(eigenbasis, initial.members[0][0].dim, tol)
    projectors = [m @ m.conj().T for m in mats]

    branches = [(prior, state.amplitudes, ()) for state, prior in initial.members if prior > 0]
    info = []
    previous = 0.0
    for _ in range(count):
        nxt = []
        for weight, psi, history in branches:
            for index, proj in enumerate(projectors):
                projected = proj @ psi
                prob = float(np.vdot(projected, projected).real)
                # drop branches at rounding level so certain outcomes stay certain
                if prob <= tol:
                    continue
                nxt.append((weight * prob, projected / np.sqrt(prob), history + (index,)))
        branches = nxt
        current = _history_entropy(branches)
        info.append(max(0.0, current - previous))
        previous = current
    return info
