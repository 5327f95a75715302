"""Dense complex linear algebra for small Hilbert spaces (dim <= 64).

All operations work on square complex128 numpy arrays, never mutate their
inputs, and return fresh arrays or floats. Every quantity handled here is of
order one, so tolerances are absolute.

The rotation convention is fixed by ``su2_rotation``: with
R = su2_rotation(axis, theta) = exp(i*theta*(axis.sigma)), conjugation
R^dag M R rotates the Bloch vector of M by the angle 2*theta about ``axis``
(for axis = y this sends sigma_z to cos(2t) sigma_z + sin(2t) sigma_x, and
the inverse conjugation R M R^dag to cos(2t) sigma_z - sin(2t) sigma_x).
Every builder in the package uses this one convention.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, VerificationError

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITIAN_TOL = 1e-12
OBSERVABLE_TOL = 1e-10
PSD_TOL = 1e-10
UNIT_TOL = 1e-12


def as_matrix(m) -> np.ndarray:
    """Coerce to a square complex matrix, rejecting non-finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix contains NaN or Inf entries")
    return a


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dag(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(m).conj().T.copy()


def matmul(*ms) -> np.ndarray:
    out = as_matrix(ms[0])
    for m in ms[1:]:
        out = out @ as_matrix(m)
    return out


def add(a, b) -> np.ndarray:
    return as_matrix(a) + as_matrix(b)


def scale(m, z) -> np.ndarray:
    return as_matrix(m) * complex(z)


def trace(m) -> complex:
    return complex(np.trace(as_matrix(m)))


def real_trace(m, tol: float = 1e-10) -> float:
    """Trace that must be real within ``tol``."""
    t = trace(m)
    if abs(t.imag) > tol:
        raise VerificationError(f"trace has imaginary part {t.imag:.3e} beyond {tol:.0e}")
    return t.real


def kron(a, b) -> np.ndarray:
    """Kronecker product: block (i, j) of the result is a[i, j] * b."""
    return np.kron(as_matrix(a), as_matrix(b))


def anticommutator(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    return a @ b + b @ a


def commutator_norm(a, b) -> float:
    """Max-abs entry of the commutator [a, b]."""
    a, b = as_matrix(a), as_matrix(b)
    return max_abs(a @ b - b @ a)


def max_abs(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    m = as_matrix(m)
    return max_abs(m - m.conj().T) <= tol


def _unit_vector3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise PreconditionError(f"expected a 3-vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise PreconditionError(f"vector has norm {np.linalg.norm(v)!r}, expected 1")
    return v


def su2_rotation(axis, angle: float) -> np.ndarray:
    """exp(i*angle*(axis.sigma)) via cos(angle)*I + i*sin(angle)*(axis.sigma)."""
    n = _unit_vector3(axis)
    ns = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return math.cos(angle) * I2 + 1j * math.sin(angle) * ns


def herm_eigen(m, tol: float = OBSERVABLE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns). Reconstruction
    error ||m - V diag(w) V^dag||_max stays below 1e-10 at the dimensions in
    scope. Jacobi is chosen over QR for its unconditional convergence on
    Hermitian input; all matrices here are tiny.
    """
    m = as_matrix(m)
    if not is_hermitian(m, tol):
        raise PreconditionError("herm_eigen requires a Hermitian matrix")
    n = m.shape[0]
    a = (m + m.conj().T) / 2.0
    v = np.eye(n, dtype=complex)
    threshold = 1e-14 * max(1.0, max_abs(a))
    for _ in range(60):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                off = max(off, r)
                if r <= threshold:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                zeta = (app - aqq) / (2.0 * r)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(zeta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # Unitary J with J[p,p]=J[q,q]=c, J[p,q]=-s*phase, J[q,p]=s*conj(phase)
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_q
                a[:, q] = -s * phase * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp + s * np.conj(phase) * vq
                v[:, q] = -s * phase * vp + c * vq
        if off <= threshold:
            break
    else:
        raise VerificationError("Jacobi diagonalization did not converge in 60 sweeps")
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Observable:
    """A Hermitian observable with a +-1 spectrum and its spectral projectors."""

    matrix: np.ndarray
    proj_plus: np.ndarray
    proj_minus: np.ndarray

    def __post_init__(self):
        m = _freeze(as_matrix(self.matrix))
        p = _freeze(as_matrix(self.proj_plus))
        q = _freeze(as_matrix(self.proj_minus))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "proj_plus", p)
        object.__setattr__(self, "proj_minus", q)
        n = m.shape[0]
        if not is_hermitian(m, HERMITIAN_TOL):
            raise PreconditionError("observable matrix is not Hermitian")
        eye = identity(n)
        if max_abs(m @ m - eye) > OBSERVABLE_TOL:
            raise PreconditionError("observable does not square to the identity")
        if max_abs(p + q - eye) > OBSERVABLE_TOL:
            raise PreconditionError("projectors do not sum to the identity")
        if max_abs(p @ q) > OBSERVABLE_TOL:
            raise PreconditionError("projectors are not orthogonal")
        if max_abs(p - q - m) > OBSERVABLE_TOL:
            raise PreconditionError("projectors do not reproduce the observable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def projector(self, outcome: int) -> np.ndarray:
        if outcome == 1:
            return self.proj_plus
        if outcome == -1:
            return self.proj_minus
        raise PreconditionError(f"outcome must be +1 or -1, got {outcome!r}")


def observable_from_matrix(m) -> Observable:
    """Build an Observable from a Hermitian matrix with m^2 = I.

    Projectors come from the closed form (I +- m)/2, valid for any +-1
    spectrum.
    """
    m = as_matrix(m)
    eye = identity(m.shape[0])
    return Observable(m, (eye + m) / 2.0, (eye - m) / 2.0)


def bloch_observable(n) -> Observable:
    """Qubit observable n.sigma for a unit Bloch vector n."""
    n = _unit_vector3(n)
    return observable_from_matrix(n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z)


@dataclass(frozen=True)
class State:
    """Density matrix: Hermitian, unit trace, positive semidefinite."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(as_matrix(self.matrix))
        object.__setattr__(self, "matrix", m)
        if not is_hermitian(m, HERMITIAN_TOL):
            raise PreconditionError("state is not Hermitian")
        t = trace(m)
        if abs(t - 1.0) > HERMITIAN_TOL:
            raise PreconditionError(f"state has trace {t!r}, expected 1")
        w, _ = herm_eigen(m)
        if w[0] < -PSD_TOL:
            raise PreconditionError(f"state has negative eigenvalue {w[0]:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def pure_state(vec) -> State:
    """|v><v| for a (re)normalized ket."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise PreconditionError("cannot normalize the zero vector")
    v = v / norm
    return State(np.outer(v, v.conj()))


def maximally_mixed(dim: int) -> State:
    return State(identity(dim) / dim)


def bell_phi_plus() -> State:
    """(|00> + |11>)/sqrt(2) as a density matrix."""
    return pure_state([1.0, 0.0, 0.0, 1.0])


# Debug dump: one row per line, entries as re+im*i with 17 significant digits,
# exact binary64 round-trip.

_ENTRY_RE = re.compile(r"^([+-]?\d\.\d{16}e[+-]\d{2,3})([+-]\d\.\d{16}e[+-]\d{2,3})i$")


def format_matrix(m) -> str:
    m = as_matrix(m)
    rows = []
    for row in m:
        rows.append(" ".join(f"{z.real:.16e}{z.imag:+.16e}i" for z in row))
    return "\n".join(rows) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        entries = []
        for tok in line.split():
            mobj = _ENTRY_RE.match(tok)
            if mobj is None:
                raise PreconditionError(f"cannot parse matrix entry {tok!r}")
            entries.append(complex(float(mobj.group(1)), float(mobj.group(2))))
        rows.append(entries)
    return as_matrix(np.array(rows, dtype=complex))
