"""Exit criteria. Each test logs one PASS/FAIL line, printed in the pytest
terminal summary under "acceptance criteria"."""

import json
import math
import subprocess
import sys

import numpy as np

from jumpback import (DetectionModel, Ensemble, ExperimentConfig, Subspace,
                      best_unitary_fit, check_reversible, expectation, factorial_moment,
                      find_maximal_reversible_subspace, make_ladder, max_neutral_dimension,
                      min_photon_support, mutual_information, neutral_signature,
                      number_eigenbasis, number_expansion, random_state,
                      repeated_measurement_info, run_recovery_experiment,
                      sample_reversible_subspace, sample_states_in_subspace)

from oracles import best_unitary_by_search, falling, max_neutral_dimension_by_search

HAAR_SAMPLES = 200
DOUBLE_JUMP_DELTA = 0.5


def _random_certified(rng, k_set, n_range):
    n_max = int(rng.integers(*n_range))
    top = min(max_neutral_dimension(n_max, k) for k in k_set)
    dim = 1 if len(k_set) > 1 else int(rng.integers(1, top + 1))
    return sample_reversible_subspace(n_max, k_set, dim, rng_seed=rng)


def test_ac01_mean_photon_number_is_one(acceptance_log):
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(50):
        sub = _random_certified(rng, {1}, (3, 13))
        _, _, number = make_ladder(sub.n_max)
        for psi in sample_states_in_subspace(sub, HAAR_SAMPLES, rng):
            worst = max(worst, abs(expectation(psi, number) - 1.0))
    ok = worst <= 1e-9
    acceptance_log("AC1  <N> = 1 on certified subspaces", ok, f"max |<N>-1| = {worst:.2e}")
    assert ok


def test_ac02_second_factorial_moment_is_one(acceptance_log):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        sub = _random_certified(rng, {1, 2}, (4, 13))
        assert sub.k_max >= 2
        _, _, number = make_ladder(sub.n_max)
        second = number @ (number - np.eye(sub.n_max + 1))
        for psi in sample_states_in_subspace(sub, HAAR_SAMPLES, rng):
            worst = max(worst, abs(expectation(psi, second) - 1.0),
                        abs(expectation(psi, number) - 1.0))
    ok = worst <= 1e-9
    acceptance_log("AC2  <N(N-1)> = 1 on jointly certified subspaces", ok,
                   f"max deviation = {worst:.2e}")
    assert ok


def test_ac03_factorial_moment_matches_expansion(acceptance_log):
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(1000):
        n_max = int(rng.integers(1, 11))
        k = int(rng.integers(1, 4))
        psi = random_state(n_max, rng)
        p = number_expansion(psi)
        explicit = sum(falling(n, k) * p[n] for n in range(n_max + 1))
        worst = max(worst, abs(factorial_moment(psi, k) - explicit))
    ok = worst <= 1e-12
    acceptance_log("AC3  factorial moment = weighted expansion sum", ok, f"max error = {worst:.2e}")
    assert ok


def test_ac04_recovery_on_fixture(acceptance_log, fixtures_dir):
    sub = Subspace.from_dict(json.loads((fixtures_dir / "h1_example.json").read_text()))
    report = run_recovery_experiment(ExperimentConfig(sub, 1, trials=1000, rng_seed=0))
    ok = report.min_fidelity >= 1 - 1e-9
    acceptance_log("AC4  recovery fidelity on span{|1>, (|0>+|2>)/sqrt2}", ok,
                   f"min fidelity = {report.min_fidelity!r}, jumps = {report.jump_histogram[1]}")
    assert ok


def test_ac05_zero_information(acceptance_log):
    rng = np.random.default_rng(105)
    worst_single = worst_joint = 0.0
    for _ in range(50):
        sub = _random_certified(rng, {1}, (3, 13))
        members = int(rng.integers(2, 6))
        ens = Ensemble(tuple(zip(sample_states_in_subspace(sub, members, rng),
                                 rng.dirichlet(np.ones(members)))))
        model = DetectionModel(float(rng.uniform(0.01, 1.0)))
        worst_single = max(worst_single, mutual_information(ens, model, 1))
    for k_set in ({1, 2}, {1, 2, 3}):
        for _ in range(10):
            sub = _random_certified(rng, k_set, (max(k_set) + 3, 13))
            ens = Ensemble.uniform(sample_states_in_subspace(sub, 3, rng))
            for j in sorted(k_set):
                worst_joint = max(worst_joint, mutual_information(ens, DetectionModel(), j))
    ok = worst_single <= 1e-12 and worst_joint <= 1e-12
    acceptance_log("AC5  jump carries no information on certified subspaces", ok,
                   f"max MI k=1: {worst_single:.2e} bits, joint j<=k: {worst_joint:.2e} bits")
    assert ok


def test_ac06_double_jump_counterexample(acceptance_log, fixtures_dir):
    sub = Subspace.from_dict(json.loads((fixtures_dir / "h1_example.json").read_text()))
    report = check_reversible(sub, 2)
    bits = mutual_information(Ensemble.uniform(list(sub.basis)), DetectionModel(), 2)
    _, best = best_unitary_fit(sub, 2)

    small = Subspace.from_matrix(sub.basis_matrix[:5])
    jump = np.zeros((5, 5))
    for n in range(2, 5):
        jump[n - 2, n] = math.sqrt(falling(n, 2))
    searched = best_unitary_by_search(small.basis_matrix, jump, restarts=12)

    ok = (not report.is_reversible and report.gram_deviation >= 0.5 and bits > 0.01
          and best <= 1 - DOUBLE_JUMP_DELTA + 1e-9
          and abs(searched - (1 - DOUBLE_JUMP_DELTA)) <= 1e-6)
    acceptance_log("AC6  double jump is irreversible and informative", ok,
                   f"gram deviation = {report.gram_deviation}, MI = {bits:.4f} bits, "
                   f"best unitary = {best:.6f} (dense search {searched:.6f}, delta = "
                   f"{DOUBLE_JUMP_DELTA})")
    assert ok


def test_ac07_maximal_dimension_oracle(acceptance_log):
    rows = []
    ok = True
    for n_max in (3, 4, 5):
        found = find_maximal_reversible_subspace(n_max, {1}, rng_seed=0)
        n_plus, n_minus, n_zero = neutral_signature(n_max, 1)
        formula = min(n_plus, n_minus) + n_zero
        searched = max_neutral_dimension_by_search(n_max, 1, restarts=8)
        ok &= found.dim == formula == searched == 2
        ok &= check_reversible(found, 1).is_reversible
        rows.append(f"n_max={n_max}: {found.dim}/{formula}/{searched}")
    acceptance_log("AC7  finder = signature formula = randomized search", ok,
                   "; ".join(rows) + " (finder/formula/search)")
    assert ok


def test_ac08_repeated_measurement(acceptance_log, fixtures_dir):
    rng = np.random.default_rng(108)
    worst_later = 0.0
    for _ in range(50):
        n_max = int(rng.integers(1, 7))
        members = int(rng.integers(1, 5))
        ens = Ensemble(tuple((random_state(n_max, rng), p)
                             for p in rng.dirichlet(np.ones(members))))
        bits = repeated_measurement_info(number_eigenbasis(n_max), ens, 4)
        worst_later = max(worst_later, max(bits[1:]))
    fixture = Ensemble.from_dict(json.loads((fixtures_dir / "three_outcome.json").read_text()))
    bits = repeated_measurement_info(number_eigenbasis(2), fixture, 3)
    ok = worst_later <= 1e-12 and abs(bits[0] - math.log2(3)) <= 1e-9 and max(bits[1:]) <= 1e-12
    acceptance_log("AC8  only the first repeated measurement informs", ok,
                   f"fixture = {bits}, worst later round = {worst_later:.2e}")
    assert ok


def test_ac09_min_photon_support_on_finder_output(acceptance_log):
    k_sets = [{1}, {2}, {1, 2}, {3}, {1, 3}]
    failures = 0
    for seed in range(100):
        k_set = {2, 3} if seed % 10 == 9 else k_sets[seed % len(k_sets)]
        # support n <= n_max - max(k) must reach n = max(k) for the moment to be nonzero
        n_max = 2 * max(k_set) + seed % 5
        sub = find_maximal_reversible_subspace(n_max, k_set, rng_seed=seed, restarts=8)
        certified = all(check_reversible(sub, k).is_reversible for k in k_set)
        if not certified or not all(min_photon_support(sub, k) for k in k_set):
            failures += 1
    ok = failures == 0
    acceptance_log("AC9  finder output never allows too few photons", ok,
                   f"{100 - failures}/100 runs pass")
    assert ok


CLI_RUNS = [
    ["check", "h1_example.json", "--k", "1"],
    ["check", "h1_example.json", "--k", "2"],
    ["find", "--n-max", "6", "--k-set", "2,3", "--seed", "5", "--restarts", "4"],
    ["build-unitary", "h1_example.json"],
    ["info", "vac_vs_one.json", "--k", "1", "--eta", "0.693147"],
    ["posterior", "vac_vs_one.json", "--outcome", "no-jump"],
    ["simulate", "simulate_recovery.json"],
    ["simulate", "simulate_failure.json"],
    ["repeated", "three_outcome.json", "--count", "3"],
]


def test_ac10_cli_determinism(acceptance_log, fixtures_dir):
    mismatched = []
    for argv in CLI_RUNS:
        outputs = [subprocess.run([sys.executable, "-m", "jumpback", *argv],
                                  cwd=fixtures_dir, capture_output=True).stdout
                   for _ in range(2)]
        if outputs[0] != outputs[1] or not outputs[0]:
            mismatched.append(argv[0])
    ok = not mismatched
    acceptance_log("AC10 CLI output is byte-identical across runs", ok,
                   f"{len(CLI_RUNS) - len(mismatched)}/{len(CLI_RUNS)} commands identical")
    assert ok
