"""Command-line front end.

Every subcommand prints a JSON document on stdout. Exit status: 0 for success
or an affirmative verdict, 2 for a negative analytic verdict (not reversible,
impossible outcome, ...), 1 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (InfeasibleError, JumpbackError, NotReversibleError,
                     VacuousExperimentError, ZeroProbabilityOutcomeError)
from .fock import DEFAULT_TOL
from .information import (OUTCOMES, DetectionModel, Ensemble, likelihood_spread,
                          mutual_information, number_eigenbasis, posterior,
                          prior_entropy, repeated_measurement_info)
from .reversibility import (Subspace, build_reversal_unitary, check_reversible,
                            find_maximal_reversible_subspace)
from .trajectory import ExperimentConfig, run_failure_experiment, run_recovery_experiment

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

TOL_ENV = "JUMPBACK_TOL"


@dataclass
class RunManifest:
    command: str
    inputs: list = field(default_factory=list)
    tol: float = DEFAULT_TOL
    seed: int = 0
    n_max: Optional[int] = None
    output: Optional[Path] = None

    def validate(self):
        if not self.tol > 0:
            raise JumpbackError(f"tol must be positive, got {self.tol}")
        for path in self.inputs:
            if not Path(path).is_file():
                raise JumpbackError(f"input file not found: {path}")


class UsageError(Exception):
    pass


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise JumpbackError(f"{path}: invalid JSON ({exc})") from exc


def _k_set(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k set {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("k set is empty")
    return values


def _matrix_to_json(mat) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def cmd_check(args, manifest: RunManifest):
    subspace = Subspace.from_dict(_load_json(args.subspace), tol=manifest.tol)
    report = check_reversible(subspace, args.k, manifest.tol)
    return report.to_dict(), EXIT_OK if report.is_reversible else EXIT_NEGATIVE


def cmd_find(args, manifest: RunManifest):
    subspace = find_maximal_reversible_subspace(args.n_max, args.k_set, args.seed,
                                                restarts=args.restarts, tol=manifest.tol)
    return subspace.to_dict(), EXIT_OK


def cmd_build_unitary(args, manifest: RunManifest):
    subspace = Subspace.from_dict(_load_json(args.subspace), tol=manifest.tol)
    unitary = build_reversal_unitary(subspace, args.k, manifest.tol)
    return {"n_max": subspace.n_max, "k": args.k, "unitary": _matrix_to_json(unitary)}, EXIT_OK


def cmd_info(args, manifest: RunManifest):
    ensemble = Ensemble.from_dict(_load_json(args.ensemble))
    model = DetectionModel(args.eta)
    return {
        "k": args.k,
        "eta": args.eta,
        "bits": mutual_information(ensemble, model, args.k),
        "prior_entropy_bits": prior_entropy(ensemble),
        "likelihood_spread": likelihood_spread(ensemble, model, args.k),
    }, EXIT_OK


def cmd_posterior(args, manifest: RunManifest):
    ensemble = Ensemble.from_dict(_load_json(args.ensemble))
    updated = posterior(ensemble, args.outcome, DetectionModel(args.eta), args.k)
    return updated.to_dict(), EXIT_OK


def cmd_simulate(args, manifest: RunManifest):
    data = _load_json(args.config)
    if isinstance(data.get("subspace"), str):
        data = dict(data, subspace=_load_json(Path(args.config).parent / data["subspace"]))
    config = ExperimentConfig.from_dict(data)
    mode = args.mode or data.get("mode", "recovery")
    if mode == "recovery":
        report = run_recovery_experiment(config)
    elif mode == "failure":
        report = run_failure_experiment(config)
    else:
        raise JumpbackError(f"unknown mode {mode!r}")
    if args.csv:
        report.write_csv(args.csv)
    return report.to_dict(), EXIT_OK


def cmd_repeated(args, manifest: RunManifest):
    ensemble = Ensemble.from_dict(_load_json(args.ensemble))
    if args.eigenbasis:
        data = _load_json(args.eigenbasis)
        try:
            eigenbasis = [Subspace.from_dict(s, tol=manifest.tol) for s in data["eigenspaces"]]
        except (KeyError, TypeError) as exc:
            raise JumpbackError(f"malformed eigenbasis: {exc}") from exc
    else:
        eigenbasis = number_eigenbasis(ensemble.n_max)
    bits = repeated_measurement_info(eigenbasis, ensemble, args.count, manifest.tol)
    return {"count": args.count, "bits": bits}, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumpback",
        description="Reversibility of quantum jumps on truncated Fock spaces.")
    parser.add_argument("--tol", type=float, default=None,
                        help=f"structural tolerance (default ${TOL_ENV} or {DEFAULT_TOL})")
    parser.add_argument("-o", "--output", type=Path, default=None,
                        help="also write the result JSON to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="test whether c^k is isometric on a subspace")
    p.add_argument("subspace", type=Path)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_check, inputs=("subspace",))

    p = sub.add_parser("find", help="search for a maximal reversible subspace")
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--k-set", type=_k_set, default=[1])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=32)
    p.set_defaults(func=cmd_find, inputs=())

    p = sub.add_parser("build-unitary", help="construct the reversal unitary")
    p.add_argument("subspace", type=Path)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_build_unitary, inputs=("subspace",))

    p = sub.add_parser("info", help="mutual information between preparation and click")
    p.add_argument("ensemble", type=Path)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eta", type=float, default=0.1)
    p.set_defaults(func=cmd_info, inputs=("ensemble",))

    p = sub.add_parser("posterior", help="Bayes-update an ensemble on an outcome")
    p.add_argument("ensemble", type=Path)
    p.add_argument("--outcome", choices=OUTCOMES, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eta", type=float, default=0.1)
    p.set_defaults(func=cmd_posterior, inputs=("ensemble",))

    p = sub.add_parser("simulate", help="run a seeded recovery or failure experiment")
    p.add_argument("config", type=Path)
    p.add_argument("--mode", choices=("recovery", "failure"), default=None)
    p.add_argument("--csv", type=Path, default=None, help="per-trial CSV dump")
    p.set_defaults(func=cmd_simulate, inputs=("config",))

    p = sub.add_parser("repeated", help="information from repeated projective measurements")
    p.add_argument("ensemble", type=Path)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--eigenbasis", type=Path, default=None,
                   help='JSON {"eigenspaces": [subspace, ...]}; default: number states')
    p.set_defaults(func=cmd_repeated, inputs=("ensemble",))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 is reserved for verdicts here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        tol = args.tol if args.tol is not None else _default_tol()
        inputs = [getattr(args, name) for name in args.inputs]
        if getattr(args, "eigenbasis", None):
            inputs.append(args.eigenbasis)
        manifest = RunManifest(args.command, inputs, tol, getattr(args, "seed", 0),
                               getattr(args, "n_max", None), args.output)
        manifest.validate()
        result, code = args.func(args, manifest)
    except (NotReversibleError, InfeasibleError, VacuousExperimentError,
            ZeroProbabilityOutcomeError) as exc:
        print(f"jumpback: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (JumpbackError, UsageError, OSError) as exc:
        print(f"jumpback: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = json.dumps(result, indent=2) + "\n"
    sys.stdout.write(text)
    if manifest.output is not None:
        manifest.output.write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
