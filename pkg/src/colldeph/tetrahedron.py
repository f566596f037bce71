"""Bell-diagonal states as points of the tetrahedron and their fate under dephasing.

A Bell-diagonal state is ``1/4 (I + sum_i d_i sigma_i (x) sigma_i)``. The vertices
``B0 = (-1,-1,-1)``, ``B1 = (-1,1,1)``, ``B2 = (1,-1,1)``, ``B3 = (1,1,-1)`` are
the Bell states Psi-, Phi-, Phi+, Psi+; the separable states fill the octahedron
``sum |d_i| <= 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from itertools import permutations
from typing import Sequence

import numpy as np

from .dephasing import FieldDirection, FrequencyDistribution, as_direction, transient_map
from .fano import RANK_TOL, FanoForm, correlation_rank, diagonalize_beta, fano_decompose, fano_matrix

BELL_VERTICES = np.array([[-1, -1, -1], [-1, 1, 1], [1, -1, 1], [1, 1, -1]], dtype=float)
BELL_LABELS = ("psi-", "phi-", "phi+", "psi+")
PROB_FLOOR = -1e-10
SEPARABLE_SLACK = 1e-10
PRESERVATION_TOL = 1e-10
FIELD_AXIS = 1  # trajectories are reported in the frame where n = e_2


class NotBellDiagonalError(ValueError):
    pass


@dataclass(frozen=True)
class BellDiagonalCoords:
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).reshape(3)
        p = bell_probabilities(d)
        if np.any(p < PROB_FLOOR):
            raise ValueError(f"point {d.tolist()} lies outside the tetrahedron (Bell weights {p.tolist()})")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    def __array__(self, dtype=None, copy=None):
        return self.d if dtype is None else self.d.astype(dtype)

    @property
    def probabilities(self) -> np.ndarray:
        return bell_probabilities(self.d)


class CornerClass(str, Enum):
    SEPARABLE = "separable"
    B0_LIKE = "B0_like"
    B1_LIKE = "B1_like"
    B2_LIKE = "B2_like"
    B3_LIKE = "B3_like"


@dataclass(frozen=True)
class PlaneSpec:
    """Pi plane (two coordinates equal except ``pi_axis``) and Gamma plane (coordinate sum)."""

    pi_axis: int
    gamma_level: float

    def residuals(self, d) -> tuple[float, float]:
        d = _coords(d)
        others = [i for i in range(3) if i != self.pi_axis - 1]
        return abs(d[others[0]] - d[others[1]]), abs(d.sum() - self.gamma_level)


def _coords(d) -> np.ndarray:
    if isinstance(d, BellDiagonalCoords):
        return d.d
    return np.asarray(d, dtype=float).reshape(3)


def bell_probabilities(d) -> np.ndarray:
    """Weights ``(1 + <d, B_i>) / 4`` on Psi-, Phi-, Phi+, Psi+."""
    return (1 + BELL_VERTICES @ _coords(d)) / 4


def state_from_coords(d) -> np.ndarray:
    return fano_matrix(FanoForm(np.zeros(3), np.zeros(3), np.diag(_coords(d))))


def rotation_taking(a, b) -> np.ndarray:
    """Proper rotation ``R`` with ``R a = b`` for unit vectors ``a``, ``b``."""
    a = as_direction(a)
    b = as_direction(b)
    c = float(a @ b)
    axis = np.cross(a, b)
    s = float(np.linalg.norm(axis))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        # antiparallel: half turn about any axis perpendicular to a
        p = np.cross(a, np.eye(3)[int(np.argmin(np.abs(a)))])
        p /= np.linalg.norm(p)
        return 2 * np.outer(p, p) - np.eye(3)
    k = axis / s
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * kx + (1 - c) * (kx @ kx)


def field_aligned_frame(n) -> np.ndarray:
    """Collective rotation taking ``n`` to ``e_2``."""
    return rotation_taking(n, np.eye(3)[FIELD_AXIS])


def _axis_assignment(vecs: np.ndarray) -> tuple[int, ...]:
    # column k of vecs is an eigenvector; pick the permutation with largest total overlap
    overlap = vecs**2
    best = max(permutations(range(3)), key=lambda p: sum(overlap[i, p[i]] for i in range(3)))
    return best


_SIGN_PATTERNS = (
    np.array([1, 1, 1]), np.array([-1, -1, 1]), np.array([-1, 1, -1]), np.array([1, -1, -1]),
)


def coords_from_state(rho, tol: float = 1e-8, frame=None) -> BellDiagonalCoords:
    """Tetrahedron point of a state with vanishing reduced Bloch vectors.

    ``frame`` is an optional collective rotation applied first, e.g.
    :func:`field_aligned_frame`. A diagonal ``beta`` is read off directly; a
    symmetric one is diagonalized by a collective rotation, with eigenvalues
    placed on the axes their eigenvectors overlap most. Otherwise local proper
    rotations are used and the sign pattern is chosen to land inside the
    tetrahedron, preferring all coordinates negative.
    """
    f = rho if isinstance(rho, FanoForm) else fano_decompose(rho)
    for name, r in (("r_A", f.r_a), ("r_B", f.r_b)):
        if np.linalg.norm(r) >= tol:
            raise NotBellDiagonalError(f"state is not Bell-diagonal: |{name}| = {np.linalg.norm(r):.3e} >= {tol:.0e}")
    beta = f.beta
    if frame is not None:
        beta = frame @ beta @ frame.T
    off = beta - np.diag(np.diag(beta))
    if np.max(np.abs(off)) < tol:
        return BellDiagonalCoords(np.diag(beta).copy())
    if np.max(np.abs(beta - beta.T)) < tol:
        lam, vecs = np.linalg.eigh(0.5 * (beta + beta.T))
        perm = _axis_assignment(vecs)
        d = np.empty(3)
        for k in range(3):
            d[perm[k]] = lam[k]
        return BellDiagonalCoords(d)
    s, _, _ = diagonalize_beta(beta)
    mags = np.abs(s)
    neg_det = s[-1] < 0
    candidates = []
    for pat in _SIGN_PATTERNS:
        signs = -pat if neg_det else pat
        candidates.append(signs * mags)
    for cand in sorted(candidates, key=lambda c: -np.count_nonzero(c < 0)):
        if np.all(bell_probabilities(cand) >= PROB_FLOOR):
            return BellDiagonalCoords(cand)
    raise NotBellDiagonalError("no sign pattern of the singular values lies in the tetrahedron")


def is_separable(d) -> bool:
    return float(np.abs(_coords(d)).sum()) <= 1 + SEPARABLE_SLACK


def corner_classify(d) -> CornerClass:
    d = _coords(d)
    if is_separable(d):
        return CornerClass.SEPARABLE
    neg = np.flatnonzero(d < 0)
    if len(neg) == 3:
        return CornerClass.B0_LIKE
    if len(neg) == 1:
        return (CornerClass.B1_LIKE, CornerClass.B2_LIKE, CornerClass.B3_LIKE)[int(neg[0])]
    raise ValueError(f"entangled point {d.tolist()} matches no corner; numerical inconsistency")


def asymptotic_coords(d, n) -> tuple[float, float]:
    """``(lambda1, lambda2)``: eigenvalue along ``n`` and the doubly degenerate one."""
    d = _coords(d)
    n2 = as_direction(n) ** 2
    return float(d @ n2), float(0.5 * d @ (1 - n2))


def asymptotic_point(d, n, axis: int = FIELD_AXIS) -> np.ndarray:
    """Final point in the frame where ``n`` is the coordinate axis ``axis`` (0-based)."""
    lam1, lam2 = asymptotic_coords(d, n)
    out = np.full(3, lam2)
    out[axis] = lam1
    return out


def trajectory(d0, n, dist: FrequencyDistribution, times: Sequence[float]) -> list[BellDiagonalCoords]:
    """Tetrahedron points of the dephased state at each time, in the frame where ``n = e_2``."""
    rho0 = state_from_coords(d0)
    frame = field_aligned_frame(n)
    return [coords_from_state(transient_map(rho0, n, dist, float(t)), frame=frame) for t in times]


def purity_from_coords(d) -> float:
    d = _coords(d)
    return 0.25 * (1 + float(d @ d))


def concurrence_from_coords(d) -> float:
    return 0.5 * max(0.0, float(np.abs(_coords(d)).sum()) - 1)


@dataclass(frozen=True)
class PreservationReport:
    initial_concurrence: float
    final_concurrence: float
    preserved: bool


def preservation_analysis(d, n) -> PreservationReport:
    """Concurrence before and after asymptotic dephasing along ``n``."""
    d = _coords(d)
    n = as_direction(n)
    initial = concurrence_from_coords(d)
    corner = corner_classify(d)
    if corner is CornerClass.B0_LIKE:
        # the coordinate sum is conserved and stays below -1 in this corner
        final = initial
    elif corner is CornerClass.SEPARABLE:
        final = 0.0
    else:
        final = 0.5 * max(0.0, -1 + float(np.sum((1 - 2 * n**2) * d)))
    return PreservationReport(initial, final, abs(final - initial) < PRESERVATION_TOL)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Near-uniform unit vectors (golden-angle spiral), shape ``(count, 3)``."""
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    rho = np.sqrt(1 - z * z)
    phi = math.pi * (3 - math.sqrt(5)) * i
    return np.column_stack((rho * np.cos(phi), rho * np.sin(phi), z))


def _project_to_level(d: np.ndarray, level: float, n: np.ndarray, iters: int = 200) -> np.ndarray | None:
    # Newton steps on f(n) = n^T diag(d) n - level restricted to the unit sphere
    for _ in range(iters):
        f = float(d @ n**2) - level
        if abs(f) < 1e-15:
            return n
        g = 2 * d * n
        g -= (g @ n) * n
        gg = float(g @ g)
        if gg < 1e-30:
            return None
        n = n - f / gg * g
        n /= np.linalg.norm(n)
    return n if abs(float(d @ n**2) - level) < 1e-13 else None


def rank_reduction_directions(d, grid_resolution: int = 256, tol: float = 1e-6) -> list[FieldDirection]:
    """Field directions for which asymptotic dephasing leaves correlation rank below 4.

    Each grid point close to the zero set of ``lambda1(n)`` or ``lambda2(n)`` is
    projected onto it, so the result is a discretized curve (or empty).
    """
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be at least 16")
    d = _coords(d)
    k = float(d.sum())
    # lambda1 = n^T D n; lambda2 = (k - lambda1) / 2 vanishes where lambda1 = k
    levels = [lvl for lvl in (0.0, k) if d.min() - 1e-15 <= lvl <= d.max() + 1e-15]
    spacing = math.sqrt(4 * math.pi / grid_resolution)
    out = []
    for g in fibonacci_sphere(grid_resolution):
        for lvl in levels:
            p = _project_to_level(d, lvl, g.copy())
            if p is None or math.acos(min(1.0, abs(float(p @ g)))) > spacing:
                continue
            lam1, lam2 = asymptotic_coords(d, p)
            if min(abs(lam1), abs(lam2)) < tol:
                out.append(FieldDirection(p))
    return out


@dataclass(frozen=True)
class ScanRow:
    n: np.ndarray
    lambda1: float
    lambda2: float
    final_rank: int
    final_concurrence: float
    preserved: bool


def _scan_one(d: np.ndarray, n: np.ndarray, tol: float) -> ScanRow:
    lam1, lam2 = asymptotic_coords(d, n)
    point = np.array([lam2, lam1, lam2])
    rank = correlation_rank(FanoForm(np.zeros(3), np.zeros(3), np.diag(point)), tol)
    rep = preservation_analysis(d, n)
    return ScanRow(n, lam1, lam2, rank, rep.final_concurrence, rep.preserved)


def direction_scan(d, grid_resolution: int, workers: int | None = None, tol: float = RANK_TOL) -> list[ScanRow]:
    """Evaluate the asymptotic outcome on a Fibonacci grid; rows follow grid order."""
    d = _coords(d)
    grid = fibonacci_sphere(grid_resolution)
    if workers == 1:
        return [_scan_one(d, n, tol) for n in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda n: _scan_one(d, n, tol), grid))
