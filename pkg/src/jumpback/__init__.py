"""Unitary reversal of quantum jumps on a truncated single-mode Fock space."""

from .errors import (AnnihilatedStateError, DimensionError, InfeasibleError,
                     JumpbackError, NormalizationError, NotReversibleError,
                     SupportError, VacuousExperimentError,
                     ZeroProbabilityOutcomeError)
from .fock import (DEFAULT_TOL, FockVector, expectation, falling_factorials,
                   make_ladder, number_expansion, random_state,
                   sample_state_in_subspace, sample_states_in_subspace)
from .information import (DetectionModel, Ensemble, jump_probability,
                          likelihood_spread, mutual_information,
                          number_eigenbasis, post_jump_state, posterior,
                          repeated_measurement_info)
from .reversibility import (ReversibilityReport, Subspace, best_unitary_fit,
                            build_reversal_unitary, certify, check_reversible,
                            factorial_moment, find_maximal_reversible_subspace,
                            max_neutral_dimension, min_photon_support,
                            neutral_signature, sample_reversible_subspace)
from .trajectory import (ExperimentConfig, FidelityReport, run_failure_experiment,
                         run_recovery_experiment)

__version__ = "0.1.0"
