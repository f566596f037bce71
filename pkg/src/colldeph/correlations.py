"""Entanglement and discord diagnostics for two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .fano import RANK_TOL, FanoForm, correlation_rank, fano_decompose
from .qcore import (
    I2,
    PAULIS,
    SY,
    as_matrix,
    dagger,
    num_qubits_of,
    partial_transpose,
)

COMMUTATOR_TOL = 1e-8

_SPIN_FLIP = np.kron(SY, SY)
# orthonormal Hermitian basis of 2x2 operators under <A, B> = tr(A B)
_HS_BASIS = np.array([I2, *PAULIS]) / np.sqrt(2)


class Verdict(str, Enum):
    COMPATIBLE_WITH_ZERO_DISCORD = "compatible_with_zero_discord"
    STRONGLY_CORRELATED = "strongly_correlated"


@dataclass(frozen=True)
class DiscordClassification:
    rank: int
    verdict: Verdict


def _require_two_qubits(rho) -> np.ndarray:
    a = as_matrix(rho)
    if num_qubits_of(a) != 2:
        raise ValueError(f"expected a two-qubit (4x4) state, got {a.shape[0]}x{a.shape[0]}")
    return a


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix, clamping roundoff negatives to 0."""
    lam, vec = np.linalg.eigh(0.5 * (m + dagger(m)))
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ dagger(vec)


def concurrence_wootters(rho) -> float:
    a = _require_two_qubits(rho)
    root = psd_sqrt(a)
    root_flipped = _SPIN_FLIP @ root.conj() @ _SPIN_FLIP
    # singular values of sqrt(rho) sqrt(rho~) are the square roots of the eigenvalues of
    # sqrt(rho) rho~ sqrt(rho), without amplifying roundoff in near-zero eigenvalues
    lam = np.linalg.svd(root @ root_flipped, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_bell_diagonal(p: Sequence[float]) -> float:
    """``max(0, 2 p_max - 1)`` from the four Bell-basis weights."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise ValueError("expected four Bell-basis probabilities")
    if np.any(p < -1e-10) or abs(p.sum() - 1) > 1e-10:
        raise ValueError(f"not a probability distribution: {p.tolist()}")
    return float(max(0.0, 2 * p.max() - 1))


def schmidt_rank(psi, tol: float = 1e-8) -> int:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise ValueError("schmidt_rank expects a two-qubit state vector")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("state vector is not normalized")
    s = np.linalg.svd(psi.reshape(2, 2), compute_uv=False)
    return int(np.count_nonzero(s > tol))


def classify_discord_by_rank(f, tol: float = RANK_TOL) -> DiscordClassification:
    """Correlation rank above 2 certifies discord not creatable locally from a classical state."""
    rank = correlation_rank(f, tol)
    verdict = Verdict.COMPATIBLE_WITH_ZERO_DISCORD if rank <= 2 else Verdict.STRONGLY_CORRELATED
    return DiscordClassification(rank, verdict)


def operator_schmidt(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``rho = sum_k c_k S_k (x) F_k`` with Hilbert-Schmidt-orthonormal Hermitian factors.

    Returns ``(c, S, F)`` where ``S`` and ``F`` are stacks of 2x2 operators.
    """
    a = _require_two_qubits(rho)
    # coefficient matrix in the product basis, C_ij = tr(rho A_i (x) A_j); real for Hermitian rho
    prod = np.einsum("iab,jcd->ijacbd", _HS_BASIS, _HS_BASIS).reshape(4, 4, 4, 4)
    coeff = np.real(np.einsum("ijxy,yx->ij", prod, a))
    u, c, vt = np.linalg.svd(coeff)
    s_ops = np.einsum("ik,iab->kab", u, _HS_BASIS)
    f_ops = np.einsum("kj,jab->kab", vt, _HS_BASIS)
    return c, s_ops, f_ops


def max_commutator(rho, side: str = "A", tol: float = COMMUTATOR_TOL) -> float:
    """Largest pairwise commutator (max-norm) among the kept local Schmidt operators."""
    if side not in ("A", "B"):
        raise ValueError("side must be 'A' or 'B'")
    c, s_ops, f_ops = operator_schmidt(rho)
    ops = (s_ops if side == "A" else f_ops)[c > tol]
    worst = 0.0
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            comm = ops[i] @ ops[j] - ops[j] @ ops[i]
            worst = max(worst, float(np.max(np.abs(comm))))
    return worst


def zero_discord_commutator_test(rho, side: str = "A", tol: float = COMMUTATOR_TOL) -> bool:
    """True iff all local Schmidt operators on ``side`` commute (zero discord for measurements there)."""
    return max_commutator(rho, side, tol) < tol


def negativity(rho, partition: Sequence[int]) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over the qubits in ``partition``."""
    a = as_matrix(rho)
    n = num_qubits_of(a)
    block = sorted(set(int(q) for q in partition))
    if not block or len(block) == n or block[0] < 0 or block[-1] >= n:
        raise ValueError(f"invalid bipartition {list(partition)} of {n} qubits")
    pt = partial_transpose(a, block)
    lam = np.linalg.eigvalsh(0.5 * (pt + dagger(pt)))
    return float(np.abs(lam[lam < 0]).sum())


def diagnostics(rho, side: str = "A", tol: float = RANK_TOL, commutator_tol: float = COMMUTATOR_TOL) -> dict:
    """One-shot report used by the ``rank`` command."""
    f: FanoForm = fano_decompose(rho)
    cls = classify_discord_by_rank(f, tol)
    return {
        "concurrence": concurrence_wootters(rho),
        "rank": cls.rank,
        "verdict": cls.verdict.value,
        "maxCommutator": max_commutator(rho, side, commutator_tol),
    }
