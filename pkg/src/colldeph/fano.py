"""Fano form of two-qubit states and the correlation rank."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .qcore import (
    I2,
    PAULIS,
    InvalidStateError,
    as_matrix,
    dagger,
    num_qubits_of,
    partial_trace,
    validate_density,
)

RANK_TOL = 1e-8
ROTATION_TOL = 1e-10

# sigma_a (x) sigma_b for a, b in {x, y, z}
_PAIR_OPS = np.array([[np.kron(a, b) for b in PAULIS] for a in PAULIS])
_LOCAL_A = np.array([np.kron(a, I2) for a in PAULIS])
_LOCAL_B = np.array([np.kron(I2, b) for b in PAULIS])


def _vec3(v) -> np.ndarray:
    out = np.asarray(v, dtype=float).reshape(3)
    return out


@dataclass(frozen=True)
class FanoForm:
    """Bloch vectors ``r_a``, ``r_b`` and correlation block ``beta``.

    rho = 1/4 (I + r_a.sigma x I + I x r_b.sigma + sum_ij beta_ij sigma_i x sigma_j)
    """

    r_a: np.ndarray
    r_b: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        r_a, r_b = _vec3(self.r_a), _vec3(self.r_b)
        beta = np.asarray(self.beta, dtype=float).reshape(3, 3)
        for name, r in (("r_a", r_a), ("r_b", r_b)):
            if np.linalg.norm(r) > 1 + 1e-10:
                raise InvalidStateError(f"|{name}| = {np.linalg.norm(r):.12g} exceeds 1")
        object.__setattr__(self, "r_a", r_a)
        object.__setattr__(self, "r_b", r_b)
        object.__setattr__(self, "beta", beta)

    def to_json(self) -> dict:
        return {"rA": self.r_a.tolist(), "rB": self.r_b.tolist(), "beta": self.beta.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FanoForm":
        for key in ("rA", "rB", "beta"):
            if key not in obj:
                raise KeyError(f"Fano JSON missing field {key!r}")
        return cls(obj["rA"], obj["rB"], obj["beta"])

    def correlation_matrix(self) -> np.ndarray:
        """4x4 matrix ``R`` with ``R[0,0] = 1/4``."""
        r = np.empty((4, 4))
        r[0, 0] = 1.0
        r[0, 1:] = self.r_b
        r[1:, 0] = self.r_a
        r[1:, 1:] = self.beta
        return r / 4.0


def fano_decompose(rho) -> FanoForm:
    a = as_matrix(rho)
    if num_qubits_of(a) != 2:
        raise ValueError(f"fano_decompose needs a two-qubit state, got {a.shape[0]}x{a.shape[0]}")
    # tr(rho X) = sum_ij rho_ij X_ji
    at = a.T
    r_a = np.real(np.einsum("kij,ij->k", _LOCAL_A, at))
    r_b = np.real(np.einsum("kij,ij->k", _LOCAL_B, at))
    beta = np.real(np.einsum("abij,ij->ab", _PAIR_OPS, at))
    return FanoForm(r_a, r_b, beta)


def fano_matrix(f: FanoForm) -> np.ndarray:
    """Operator described by ``f`` without any positivity check."""
    m = np.eye(4, dtype=complex)
    m += np.tensordot(f.r_a, _LOCAL_A, axes=1)
    m += np.tensordot(f.r_b, _LOCAL_B, axes=1)
    m += np.tensordot(f.beta, _PAIR_OPS, axes=2)
    return m / 4.0


def fano_reconstruct(f: FanoForm) -> np.ndarray:
    """Inverse of :func:`fano_decompose`; raises if the result is not positive."""
    m = fano_matrix(f)
    lam_min = float(np.linalg.eigvalsh(m)[0])
    if lam_min < -1e-10:
        raise InvalidStateError(f"Fano form is not a state: smallest eigenvalue {lam_min:.3e}")
    return m


def numerical_rank(m, tol: float = RANK_TOL) -> int:
    """Singular values above ``tol * sigma_max``; zero when ``sigma_max < tol``."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] < tol:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def correlation_rank(f, tol: float = RANK_TOL) -> int:
    """``1 + rank(beta - r_a r_b^T)``. Accepts a FanoForm or a two-qubit state."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(f, FanoForm):
        f = fano_decompose(f)
    return 1 + numerical_rank(f.beta - np.outer(f.r_a, f.r_b), tol)


def rotation_from_local_unitary(u) -> np.ndarray:
    """SO(3) matrix ``O`` with ``U (v.sigma) U^dagger = (O v).sigma``."""
    u = as_matrix(u)
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 unitary, got shape {u.shape}")
    dev = float(np.max(np.abs(dagger(u) @ u - I2)))
    if dev > 1e-10:
        raise ValueError(f"matrix is not unitary: max |U^dagger U - I| = {dev:.3e}")
    o = np.empty((3, 3))
    for j, sj in enumerate(PAULIS):
        conj = u @ sj @ dagger(u)
        for i, si in enumerate(PAULIS):
            o[i, j] = 0.5 * np.real(np.trace(si @ conj))
    return o


def check_rotation(o, tol: float = ROTATION_TOL) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if o.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {o.shape}")
    if np.max(np.abs(o.T @ o - np.eye(3))) > tol or abs(np.linalg.det(o) - 1) > tol:
        raise ValueError("matrix is not a proper rotation")
    return o


def apply_local_rotations(f: FanoForm, o_a, o_b) -> FanoForm:
    o_a, o_b = check_rotation(o_a), check_rotation(o_b)
    return FanoForm(o_a @ f.r_a, o_b @ f.r_b, o_a @ f.beta @ o_b.T)


def diagonalize_beta(f) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(d, O_A, O_B)`` with ``O_A beta O_B^T = diag(d)`` and det O = +1.

    ``|d|`` is sorted in decreasing order. A reflection left over by the SVD is
    absorbed into the sign of the last entry of ``d``.
    """
    beta = f.beta if isinstance(f, FanoForm) else np.asarray(f, dtype=float)
    u, s, vt = np.linalg.svd(beta)
    d = s.copy()
    if np.linalg.det(u) < 0:
        u[:, -1] *= -1
        d[-1] *= -1
    if np.linalg.det(vt) < 0:
        vt[-1, :] *= -1
        d[-1] *= -1
    return d, u.T, vt


def generalized_beta(rho) -> np.ndarray:
    """``beta_ab = sum over qubit pairs i < j of <sigma_a^(i) sigma_b^(j)>``.

    For two qubits this is the ``beta`` block of the Fano form.
    """
    a = as_matrix(rho)
    n = num_qubits_of(a)
    if n < 2:
        raise ValueError("generalized_beta needs at least two qubits")
    out = np.zeros((3, 3))
    for i, j in combinations(range(n), 2):
        pair = a if n == 2 else partial_trace(a, [i, j])
        out += fano_decompose(pair).beta
    return out


def fano_of_state(rho) -> FanoForm:
    """Validate then decompose."""
    return fano_decompose(validate_density(rho))
