"""Shared random generators for the test suite (all explicitly seeded)."""

from __future__ import annotations

import numpy as np

from qcycle.histories import HistoryFamily, family_from_observables
from qcycle.jpd import MarginalSet
from qcycle.linalg import Observable, State, bloch_observable, pure_state


def random_unit3(rng) -> tuple[float, float, float]:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return tuple(v)


def random_qubit_observable(rng) -> Observable:
    return bloch_observable(random_unit3(rng))


def random_pure_state(rng, dim: int = 2) -> State:
    return pure_state(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_mixed_state(rng, dim: int = 2) -> State:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return State(rho / np.trace(rho).real)


def random_state(rng, dim: int = 2) -> State:
    return random_pure_state(rng, dim) if rng.random() < 0.5 else random_mixed_state(rng, dim)


def random_family(rng) -> HistoryFamily:
    state = random_state(rng)
    return family_from_observables(
        state, [random_qubit_observable(rng) for _ in range(3)]
    )


def random_marginal_set(rng, n: int) -> MarginalSet:
    """Valid pair marginals: shared singles, correlators in the physical range."""
    singles = rng.uniform(-0.3, 0.3, size=n)
    cells = np.empty((n, 2, 2))
    for i in range(n):
        si, sj = singles[i], singles[(i + 1) % n]
        lo = -1.0 + abs(si + sj)
        hi = 1.0 - abs(si - sj)
        c = rng.uniform(lo, hi)
        for a, xi in enumerate((1, -1)):
            for b, xj in enumerate((1, -1)):
                cells[i, a, b] = (1.0 + xi * si + xj * sj + xi * xj * c) / 4.0
    return MarginalSet(n, cells)
