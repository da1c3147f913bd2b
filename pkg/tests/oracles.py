"""Independent reference computations used by the tests.

Nothing here imports the package's search or construction code.
"""

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

FEASIBLE = 1e-8


def falling(n, k):
    out = 1
    for j in range(k):
        out *= n - j
    return out


def neutral_feasible(forms, d, restarts, seed):
    """Random-restart BFGS on ||Y^H Y - I||^2 + sum_k ||Y^H F_k Y - I||^2.

    ``forms`` are diagonal weights F_k. Returns the best objective value.
    BFGS stalls near 1e-12 on feasible problems while infeasible ones stay
    above 0.1, so callers compare against FEASIBLE.
    """
    m = len(forms[0])
    rng = np.random.default_rng(seed)

    def objective(x):
        y = (x[:m * d] + 1j * x[m * d:]).reshape(m, d)
        total = np.sum(np.abs(y.conj().T @ y - np.eye(d)) ** 2)
        for f in forms:
            total += np.sum(np.abs(y.conj().T @ (f[:, None] * y) - np.eye(d)) ** 2)
        return total

    best = np.inf
    for _ in range(restarts):
        res = minimize(objective, rng.normal(size=2 * m * d), method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 5000})
        best = min(best, res.fun)
        if best < FEASIBLE:
            break
    return best


def max_neutral_dimension_by_search(n_max, k, restarts=20, seed=0):
    """Largest d for which the randomized search reaches zero residual."""
    size = n_max - k + 1
    f = np.array([falling(n, k) for n in range(size)], dtype=float)
    for d in range(size, 0, -1):
        if neutral_feasible([f], d, restarts, seed) < FEASIBLE:
            return d
    return 0


def best_unitary_by_search(basis, jump, restarts=20, seed=0):
    """max over unitaries V of Re tr(B^H V^H J B) / d by dense search, V = expm(iH)."""
    dim = basis.shape[0]
    iu = np.triu_indices(dim, 1)
    n_off = len(iu[0])
    rng = np.random.default_rng(seed)

    def unitary(x):
        h = np.zeros((dim, dim), dtype=complex)
        h[np.diag_indices(dim)] = x[:dim]
        h[iu] = x[dim:dim + n_off] + 1j * x[dim + n_off:]
        h = h + np.triu(h, 1).conj().T
        return expm(1j * h)

    def score(x):
        v = unitary(x)
        return -np.trace(basis.conj().T @ v.conj().T @ jump @ basis).real / basis.shape[1]

    best = -np.inf
    for _ in range(restarts):
        res = minimize(score, 2 * rng.normal(size=dim * dim), method="BFGS")
        best = max(best, -res.fun)
    return best
