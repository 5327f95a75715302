"""Joint-probability-distribution feasibility for cycle marginals.

Decides whether a single distribution over all 2^n deterministic assignments
reproduces the given adjacent-pair marginals. The question is a linear
program over assignment weights: nonnegative variables q(x), a normalization
row, and one row per pair and outcome combination. It is solved by an
in-repo dense phase-1 simplex with Bland's rule (anti-cycling); a Dantzig
pivot rule is available as a second path for cross-checking verdicts.

Outcome encoding: assignment index x in [0, 2^n); bit b of x set means
observable b takes the value -1, clear means +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ResourceLimitError, VerificationError
from .scenario import CorrelationVector

LP_VARIABLE_CAP = 16
FEASIBILITY_TOL = 1e-9
WITNESS_RESIDUAL_TOL = 1e-7
NO_DISTURBANCE_TOL = 1e-7

OUTCOMES = (1, -1)
_IDX = {1: 0, -1: 1}


@dataclass(frozen=True)
class MarginalSet:
    """Adjacent-pair distributions p(x_i, x_{i+1 mod n}) for an n-cycle.

    ``cells[i, a, b]`` is p(X_i = OUTCOMES[a], X_{i+1 mod n} = OUTCOMES[b]).
    """

    n: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.shape != (self.n, 2, 2):
            raise PreconditionError(f"cells must have shape ({self.n}, 2, 2)")
        if self.n < 3:
            raise PreconditionError("need a cycle of at least 3 observables")
        if np.any(cells < -1e-12):
            raise PreconditionError("negative pair probability")
        sums = cells.sum(axis=(1, 2))
        if np.any(np.abs(sums - 1.0) > 1e-9):
            raise PreconditionError("each pair distribution must sum to 1")
        cells = np.clip(cells, 0.0, None)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        # No-disturbance: the single marginal of X_i implied by pair (i-1, i)
        # must match the one implied by pair (i, i+1). Without it no joint
        # distribution can exist for trivial bookkeeping reasons, which must
        # stay distinct from genuine LP infeasibility.
        left = cells.sum(axis=2)[:, 0]
        right = cells.sum(axis=1)[:, 0]
        for i in range(self.n):
            if abs(left[i] - right[(i - 1) % self.n]) > NO_DISTURBANCE_TOL:
                raise PreconditionError(
                    f"inconsistent single-observable marginals at node {i}"
                )

    def single(self, i: int) -> float:
        """<X_i> implied by pair (i, i+1)."""
        row = self.cells[i].sum(axis=1)
        return float(row[0] - row[1])

    def correlator(self, i: int) -> float:
        """<X_i X_{i+1 mod n}>."""
        c = self.cells[i]
        return float(c[0, 0] + c[1, 1] - c[0, 1] - c[1, 0])


def correlators_to_marginals(
    c: CorrelationVector, singles=None
) -> MarginalSet:
    """The unique pair distributions with the given first and second moments.

    Cell formula p(x_i, x_j) = (1 + x_i s_i + x_j s_j + x_i x_j c_ij) / 4.
    Singles default to unbiased. Any cell below -1e-12 means the moment
    combination is unphysical and is rejected; tiny negative round-off is
    clipped to zero.
    """
    n = c.scenario.n
    if singles is None:
        singles = (0.0,) * n
    singles = tuple(float(s) for s in singles)
    if len(singles) != n:
        raise PreconditionError("need one single-observable mean per node")
    if any(abs(s) > 1.0 + 1e-12 for s in singles):
        raise PreconditionError("single-observable means must lie in [-1, 1]")
    cells = np.empty((n, 2, 2))
    for i in range(n):
        si, sj, cij = singles[i], singles[(i + 1) % n], c.values[i]
        for a, xi in enumerate(OUTCOMES):
            for b, xj in enumerate(OUTCOMES):
                p = (1.0 + xi * si + xj * sj + xi * xj * cij) / 4.0
                if p < -1e-12:
                    raise PreconditionError(
                        f"moment combination gives negative cell p={p:.3e} at pair {i}"
                    )
                cells[i, a, b] = max(p, 0.0)
    return MarginalSet(n, cells)


@dataclass(frozen=True)
class JpdWitness:
    """Feasibility verdict with an explicit distribution when one exists.

    ``distribution`` maps assignment indices to weights (nonzero entries
    only). ``max_constraint_residual`` is re-verified directly from the
    witness, independently of the solver; for infeasible sets it reports the
    phase-1 optimum, the total constraint violation of the closest candidate.
    ``near_boundary`` flags a phase-1 optimum inside (0, FEASIBILITY_TOL],
    reported as feasible-within-tolerance rather than silently rounded.
    """

    feasible: bool
    distribution: dict[int, float] | None
    max_constraint_residual: float
    phase1_objective: float
    near_boundary: bool = False


def _pair_constraint_matrix(n: int) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """Rows of the LP: one normalization row plus 4 rows per adjacent pair."""
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    sign = 1 - 2 * ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1)  # (size, n)
    rows = [np.ones(size)]
    labels: list[tuple[int, int, int]] = [(-1, 0, 0)]
    for i in range(n):
        j = (i + 1) % n
        for xi in OUTCOMES:
            for xj in OUTCOMES:
                rows.append(((sign[:, i] == xi) & (sign[:, j] == xj)).astype(float))
                labels.append((i, xi, xj))
    return np.vstack(rows), labels


def _phase1_simplex(
    a: np.ndarray, b: np.ndarray, pivot: str = "bland", tol: float = 1e-11
) -> tuple[float, np.ndarray]:
    """Minimize the sum of artificial variables for A x = b, x >= 0, b >= 0.

    Returns (phase-1 optimum, x). Bland's rule guarantees termination;
    Dantzig's rule (most negative reduced cost) is the alternative pivot.
    """
    m, n = a.shape
    if np.any(b < 0):
        raise PreconditionError("phase-1 simplex expects a nonnegative rhs")
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n : n + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(n, n + m))
    # Reduced-cost row for objective sum(artificials) with the artificial basis.
    tableau[m, :] = -tableau[:m, :].sum(axis=0)
    tableau[m, n : n + m] = 0.0
    max_iter = 200 * (m + n)
    for _ in range(max_iter):
        costs = tableau[m, : n + m]
        if pivot == "bland":
            candidates = np.nonzero(costs < -tol)[0]
            if candidates.size == 0:
                break
            col = int(candidates[0])
        elif pivot == "dantzig":
            col = int(np.argmin(costs))
            if costs[col] >= -tol:
                break
        else:
            raise PreconditionError(f"unknown pivot rule {pivot!r}")
        column = tableau[:m, col]
        positive = np.nonzero(column > tol)[0]
        if positive.size == 0:
            raise VerificationError("phase-1 objective unbounded; malformed tableau")
        ratios = tableau[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[np.nonzero(ratios <= best + 1e-15)[0]]
        row = int(min(ties, key=lambda r: basis[r]))
        pivot_value = tableau[row, col]
        tableau[row, :] /= pivot_value
        for r in range(m + 1):
            if r != row and tableau[r, col] != 0.0:
                tableau[r, :] -= tableau[r, col] * tableau[row, :]
        basis[row] = col
    else:
        raise VerificationError("simplex iteration cap exceeded")
    x = np.zeros(n)
    for r, col in enumerate(basis):
        if col < n:
            x[col] = tableau[r, -1]
    return float(-tableau[m, -1]), x


def jpd_feasible(m: MarginalSet, *, pivot: str = "bland") -> JpdWitness:
    """Decide whether a joint distribution reproduces all pair marginals."""
    if m.n > LP_VARIABLE_CAP:
        raise ResourceLimitError(
            f"LP feasibility capped at n <= {LP_VARIABLE_CAP}, got {m.n}"
        )
    a, labels = _pair_constraint_matrix(m.n)
    b = np.empty(len(labels))
    b[0] = 1.0
    for r, (i, xi, xj) in enumerate(labels[1:], start=1):
        b[r] = m.cells[i, _IDX[xi], _IDX[xj]]
    phase1, q = _phase1_simplex(a, b, pivot=pivot)
    if phase1 > FEASIBILITY_TOL:
        return JpdWitness(False, None, phase1, phase1)
    residual = float(np.max(np.abs(a @ q - b)))
    if residual > WITNESS_RESIDUAL_TOL:
        raise VerificationError(
            f"witness residual {residual:.3e} exceeds {WITNESS_RESIDUAL_TOL:.0e}"
        )
    if np.any(q < -1e-9):
        raise VerificationError("witness has a negative weight beyond tolerance")
    distribution = {int(i): float(w) for i, w in enumerate(q) if abs(w) > 1e-15}
    return JpdWitness(True, distribution, residual, phase1, near_boundary=phase1 > 1e-12)


def witness_correlators(witness: JpdWitness, n: int) -> tuple[float, ...]:
    """Adjacent-pair correlators implied by a witness distribution."""
    if witness.distribution is None:
        raise PreconditionError("no distribution to read correlators from")
    idx = np.fromiter(witness.distribution.keys(), dtype=np.int64)
    w = np.fromiter(witness.distribution.values(), dtype=float)
    sign = 1 - 2 * ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1)
    values = []
    for i in range(n):
        values.append(float(np.sum(w * sign[:, i] * sign[:, (i + 1) % n])))
    return tuple(values)


def witness_to_text(witness: JpdWitness, n: int) -> str:
    """Structured text export: nonzero assignment weights by bitmask."""
    lines = [
        "# qcycle jpd witness v1",
        "# bit b of the assignment index set means x_b = -1",
        f"n = {n}",
        f"feasible = {'true' if witness.feasible else 'false'}",
        f"max_residual = {witness.max_constraint_residual!r}",
        f"phase1_objective = {witness.phase1_objective!r}",
    ]
    if witness.distribution is not None:
        for i in sorted(witness.distribution):
            lines.append(f"w[{i}] = {witness.distribution[i]!r}")
    return "\n".join(lines) + "\n"
