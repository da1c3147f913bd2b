"""
Seeded single-shot jump experiments.

Each trial draws a Haar-random state from the subspace, fires the k-fold jump
with the detection-model probability, undoes it with a unitary and records the
phase-blind fidelity with the initial state. Trial t uses its own generator
seeded by (rng_seed, t), so results do not depend on trial order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (AnnihilatedStateError, JumpbackError, NotReversibleError,
                     VacuousExperimentError)
from .fock import DEFAULT_TOL, FockVector, sample_state_in_subspace
from .information import JUMP, NO_JUMP, DetectionModel, jump_probability, post_jump_state
from .reversibility import (Subspace, best_unitary_fit, build_reversal_unitary,
                            check_reversible)


@dataclass(frozen=True)
class ExperimentConfig:
    subspace: Subspace
    k: int = 1
    detection: DetectionModel = field(default_factory=DetectionModel)
    trials: int = 1000
    rng_seed: int = 0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.trials < 1:
            raise JumpbackError("trials must be >= 1")
        if self.k < 1:
            raise JumpbackError("k must be >= 1")
        if not self.tol > 0:
            raise JumpbackError("tol must be positive")

    @classmethod
    def from_dict(cls, data) -> "ExperimentConfig":
        try:
            return cls(subspace=Subspace.from_dict(data["subspace"]),
                       k=int(data.get("k", 1)),
                       detection=DetectionModel(float(data.get("eta", 0.1))),
                       trials=int(data.get("trials", 1000)),
                       rng_seed=int(data.get("seed", 0)),
                       tol=float(data.get("tol", DEFAULT_TOL)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, JumpbackError):
                raise
            raise JumpbackError(f"malformed experiment config: {exc}") from exc


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    state_id: int
    branch: str
    jumps: int
    jump_probability: float
    fidelity: float
    # fidelity the jump branch would have given; None when the jump is impossible
    jump_fidelity: Optional[float]


@dataclass(frozen=True)
class FidelityReport:
    mode: str
    k: int
    records: tuple
    best_unitary_fidelity: float

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.records])

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def min_fidelity(self) -> float:
        return float(np.min(self.fidelities))

    def _branch(self, branch: str) -> np.ndarray:
        return np.array([r.fidelity for r in self.records if r.branch == branch])

    @property
    def jump_histogram(self) -> dict:
        hist = {0: 0, self.k: 0}
        for r in self.records:
            hist[r.jumps] += 1
        return hist

    @property
    def expected_fidelity(self) -> float:
        """Per-trial fidelity averaged over both branches with model weights."""
        values = []
        for r in self.records:
            p = r.jump_probability
            jump_part = p * r.jump_fidelity if r.jump_fidelity is not None else 0.0
            values.append(jump_part + (1.0 - p))
        return float(np.mean(values))

    @property
    def mean_jump_probability(self) -> float:
        return float(np.mean([r.jump_probability for r in self.records]))

    @property
    def min_jump_branch_fidelity(self) -> Optional[float]:
        """Worst recovery over every state for which the jump was possible."""
        values = [r.jump_fidelity for r in self.records if r.jump_fidelity is not None]
        return float(min(values)) if values else None

    def to_dict(self) -> dict:
        jumped = self._branch(JUMP)
        stayed = self._branch(NO_JUMP)
        worst = self.min_jump_branch_fidelity
        return {
            "mode": self.mode,
            "k": self.k,
            "trials": len(self.records),
            "mean_fidelity": self.mean_fidelity,
            "min_fidelity": self.min_fidelity,
            "expected_fidelity": self.expected_fidelity,
            "best_unitary_fidelity": self.best_unitary_fidelity,
            "min_jump_branch_fidelity": worst,
            "branches": {
                JUMP: {"count": int(jumped.size),
                       "mean_fidelity": float(jumped.mean()) if jumped.size else None,
                       "min_fidelity": float(jumped.min()) if jumped.size else None},
                NO_JUMP: {"count": int(stayed.size),
                          "mean_fidelity": float(stayed.mean()) if stayed.size else None},
            },
            "mean_jump_probability": self.mean_jump_probability,
            "jump_histogram": {str(k): v for k, v in self.jump_histogram.items()},
            "records": [
                {"trial": r.trial, "state_id": r.state_id, "branch": r.branch,
                 "jumps": r.jumps, "fidelity": r.fidelity}
                for r in self.records
            ],
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "branch", "fidelity"])
            for r in self.records:
                writer.writerow([r.trial, r.branch, repr(r.fidelity)])


def _trial(config: ExperimentConfig, reverse: np.ndarray, trial: int) -> TrialRecord:
    rng = np.random.default_rng([config.rng_seed, trial])
    psi = sample_state_in_subspace(config.subspace, rng)
    p = jump_probability(psi, config.detection, config.k)
    jump_fidelity = None
    try:
        jumped = post_jump_state(psi, config.k)
    except AnnihilatedStateError:
        p = 0.0
    else:
        jump_fidelity = psi.fidelity(FockVector(reverse @ jumped.amplitudes))
    fired = rng.random() < p
    if fired:
        return TrialRecord(trial, trial, JUMP, config.k, p, jump_fidelity, jump_fidelity)
    return TrialRecord(trial, trial, NO_JUMP, 0, p, 1.0, jump_fidelity)


def run_recovery_experiment(config: ExperimentConfig) -> FidelityReport:
    """Jump, then undo with U^H from build_reversal_unitary."""
    report = check_reversible(config.subspace, config.k, config.tol)
    if not report.is_reversible:
        raise NotReversibleError(
            f"subspace is not certified for k={config.k} "
            f"(gram deviation {report.gram_deviation:.3e})")
    unitary = build_reversal_unitary(config.subspace, config.k, config.tol)
    reverse = unitary.conj().T
    records = tuple(_trial(config, reverse, t) for t in range(config.trials))
    return FidelityReport("recovery", config.k, records,
                          best_unitary_fit(config.subspace, config.k)[1])


def run_failure_experiment(config: ExperimentConfig) -> FidelityReport:
    """Jump, then undo with the best unitary fit on a subspace that is not
    reversible for k. The report's ``best_unitary_fidelity`` is the largest
    Haar-averaged recovery amplitude any unitary can achieve."""
    report = check_reversible(config.subspace, config.k, config.tol)
    if report.is_reversible:
        raise VacuousExperimentError(
            f"subspace is reversible for k={config.k}; nothing can fail")
    unitary, best = best_unitary_fit(config.subspace, config.k)
    reverse = unitary.conj().T
    records = tuple(_trial(config, reverse, t) for t in range(config.trials))
    return FidelityReport("failure", config.k, records, best)
