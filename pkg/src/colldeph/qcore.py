"""Dense linear algebra on small qubit registers.

Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
computational-basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

MAX_QUBITS = 8
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

for _m in (I2, SX, SY, SZ):
    _m.setflags(write=False)


class InvalidStateError(ValueError):
    """A matrix failed one of the density-operator invariants."""


@dataclass(frozen=True)
class DensityOperator:
    """Validated density operator of an ``num_qubits``-qubit register.

    Instances are only produced by :func:`validate_density`; ``matrix`` is a
    read-only copy. Anything in this package that takes a state also accepts
    a plain array, so ``DensityOperator`` mostly marks "already checked".
    """

    matrix: np.ndarray
    num_qubits: int

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)

    def to_json(self) -> dict:
        return density_to_json(self.matrix)


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a 2-d complex ndarray (no copy when possible)."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def num_qubits_of(m) -> int:
    """Number of qubits of a square ``2^N x 2^N`` matrix."""
    a = np.asarray(m)
    dim = a.shape[0]
    if a.ndim != 2 or a.shape[1] != dim:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    return n


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product: ``result[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(ops: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def single_qubit_operator(op, qubit: int, num_qubits: int) -> np.ndarray:
    """Embed a 2x2 operator acting on ``qubit`` into the full register."""
    return kron_all(op if k == qubit else I2 for k in range(num_qubits))


def pauli_dot(v) -> np.ndarray:
    """``v . sigma`` for a real 3-vector ``v``."""
    v = np.asarray(v, dtype=float)
    return v[0] * SX + v[1] * SY + v[2] * SZ


def _check_qubit_set(qubits: Sequence[int], num_qubits: int, what: str) -> list[int]:
    idx = sorted(int(q) for q in qubits)
    if len(set(idx)) != len(idx):
        raise ValueError(f"{what}: repeated qubit index in {list(qubits)}")
    for q in idx:
        if not 0 <= q < num_qubits:
            raise ValueError(f"{what}: qubit index {q} out of range for {num_qubits} qubits")
    return idx


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced state on the qubits in ``keep`` (returned in ascending order)."""
    a = as_matrix(rho)
    n = num_qubits_of(a)
    kept = _check_qubit_set(keep, n, "partial_trace")
    if not kept:
        raise ValueError("partial_trace: keep must be nonempty")
    traced = [q for q in range(n) if q not in kept]
    t = a.reshape((2,) * (2 * n))
    # trace out from the highest index so remaining axis numbers stay valid
    for q in reversed(traced):
        m = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 1 << len(kept)
    return t.reshape(d, d)


def partial_transpose(rho, qubits: Sequence[int]) -> np.ndarray:
    """Transpose the tensor factors listed in ``qubits``."""
    a = as_matrix(rho)
    n = num_qubits_of(a)
    idx = _check_qubit_set(qubits, n, "partial_transpose")
    perm = list(range(2 * n))
    for q in idx:
        perm[q], perm[q + n] = perm[q + n], perm[q]
    return a.reshape((2,) * (2 * n)).transpose(perm).reshape(a.shape)


def validate_density(
    m,
    herm_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    eig_floor: float = EIGENVALUE_FLOOR,
) -> DensityOperator:
    """Check Hermiticity, unit trace and positivity; raise naming the violation."""
    if isinstance(m, DensityOperator):
        return m
    a = as_matrix(m)
    n = num_qubits_of(a)
    herm_dev = float(np.max(np.abs(a - dagger(a))))
    if herm_dev > herm_tol:
        raise InvalidStateError(f"not Hermitian: max |m - m^dagger| = {herm_dev:.3e} > {herm_tol:.0e}")
    tr = np.trace(a)
    trace_dev = float(abs(tr - 1.0))
    if trace_dev > trace_tol:
        raise InvalidStateError(f"trace != 1: |tr m - 1| = {trace_dev:.3e} > {trace_tol:.0e}")
    lam_min = float(np.linalg.eigvalsh(0.5 * (a + dagger(a)))[0])
    if lam_min < eig_floor:
        raise InvalidStateError(f"negative eigenvalue {lam_min:.3e} below floor {eig_floor:.0e}")
    frozen = a.copy()
    frozen.setflags(write=False)
    return DensityOperator(frozen, n)


def purity(rho) -> float:
    """``tr(rho^2)``."""
    a = as_matrix(rho)
    # tr(A A) = sum_ij A_ij A_ji; for Hermitian A this is sum |A_ij|^2
    return float(np.real(np.sum(a * a.T)))


def expectation(rho, op) -> float:
    """Real part of ``tr(rho op)``; ``op`` is assumed Hermitian."""
    return float(np.real(np.sum(as_matrix(rho) * np.asarray(op).T)))


def density_to_json(rho) -> dict:
    a = as_matrix(rho)
    return {"n": num_qubits_of(a), "re": a.real.tolist(), "im": a.imag.tolist()}


def density_from_json(obj: dict) -> np.ndarray:
    """Parse ``{"n": N, "re": [[...]], "im": [[...]]}``; ``im`` may be omitted."""
    for key in ("n", "re"):
        if key not in obj:
            raise KeyError(f"state JSON missing field {key!r}")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise ValueError(f"state JSON: 're' shape {re.shape} != 'im' shape {im.shape}")
    a = re + 1j * im
    n = num_qubits_of(a)
    if n != int(obj["n"]):
        raise ValueError(f"state JSON: field 'n' = {obj['n']} but matrix is {a.shape[0]}x{a.shape[0]}")
    return a


# -- random sampling helpers (tests, CLI case matrices) -----------------------

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def random_pure_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    d = 1 << num_qubits
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_density(num_qubits: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble density matrix (full rank unless ``rank`` is given)."""
    d = 1 << num_qubits
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ dagger(g)
    rho = 0.5 * (rho + dagger(rho))
    return rho / np.trace(rho).real


def random_qubit_state(rng: np.random.Generator, radius: float | None = None) -> np.ndarray:
    """Single-qubit state with a uniformly random Bloch direction."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    r = rng.uniform(0.05, 1.0) if radius is None else radius
    return 0.5 * (I2 + pauli_dot(r * v))


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
