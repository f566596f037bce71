"""Preparing correlated states with collective dephasing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlations import zero_discord_commutator_test
from .dephasing import FieldDirection, as_direction, asymptotic_map, factorizes_under_dephasing
from .fano import RANK_TOL, FanoForm, correlation_rank, fano_decompose, fano_reconstruct, numerical_rank
from .qcore import I2, as_matrix, num_qubits_of, pauli_dot, validate_density
from .tetrahedron import BELL_VERTICES, BellDiagonalCoords, coords_from_state

ANGLE_TOL = 1e-9
RESIDUAL_TOL = 1e-10
VERIFY_TOL = 1e-9

# Bell state -> (tetrahedron vertex index, field axis)
TARGETS = {
    "psi-": (0, 2),
    "phi-": (1, 0),
    "phi+": (2, 1),
    "psi+": (3, 2),
}


class SynthesisError(ValueError):
    pass


class SynthesisVerificationError(SynthesisError):
    """The recipe's end-to-end channel output misses its target."""


@dataclass(frozen=True)
class AngleSolution:
    """Angles between the field and the singular vectors of the initial beta."""

    theta_v: float
    theta_w: float
    residual: float


@dataclass(frozen=True)
class SynthesisRecipe:
    initial_state: FanoForm
    field_direction: FieldDirection
    expected_output: BellDiagonalCoords
    target: str
    s: float
    d: float
    angles: AngleSolution
    residual: float

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "s": self.s,
            "d": self.d,
            "thetaV": self.angles.theta_v,
            "thetaW": self.angles.theta_w,
            "initialState": self.initial_state.to_json(),
            "fieldDirection": self.field_direction.vector.tolist(),
            "expectedOutput": self.expected_output.d.tolist(),
            "residual": self.residual,
        }


def _wrap(x: float) -> float:
    y = math.fmod(x, 2 * math.pi)
    if y < 0:
        y += 2 * math.pi
    # fold values a hair below 2 pi onto 0
    return 0.0 if abs(y - 2 * math.pi) < 1e-12 else y


def _clip_arccos(c: float) -> float:
    return math.acos(max(-1.0, min(1.0, c)))


def solve_werner_angles(k: float, family: str = "singlet") -> list[AngleSolution]:
    """All ``(theta_v, theta_w)`` in ``[0, 2 pi)`` with ``sin sin = 2k`` and ``cos cos = +k``
    (``family="singlet"``) or ``-k`` (``family="werner_like"``)."""
    if family not in ("singlet", "werner_like"):
        raise ValueError("family must be 'singlet' or 'werner_like'")
    sign = 1.0 if family == "singlet" else -1.0
    cc, ss = sign * k, 2 * k
    diff, tot = cc + ss, cc - ss  # cos(tv - tw), cos(tv + tw)
    if abs(diff) > 1 + 1e-12 or abs(tot) > 1 + 1e-12:
        return []
    a0, b0 = _clip_arccos(diff), _clip_arccos(tot)
    found: list[AngleSolution] = []
    for a in (a0, -a0, a0 + 2 * math.pi, -a0 + 2 * math.pi):
        for b in (b0, -b0):
            tv, tw = _wrap(0.5 * (a + b)), _wrap(0.5 * (b - a))
            res = max(abs(math.sin(tv) * math.sin(tw) - ss), abs(math.cos(tv) * math.cos(tw) - cc))
            if res >= RESIDUAL_TOL:
                continue
            if any(abs(tv - s.theta_v) < 1e-9 and abs(tw - s.theta_w) < 1e-9 for s in found):
                continue
            found.append(AngleSolution(tv, tw, res))
    return sorted(found, key=lambda s: (s.theta_v, s.theta_w))


def _in_plane(axis: int) -> tuple[np.ndarray, np.ndarray]:
    e = np.eye(3)
    return e[axis], e[(axis + 1) % 3]


def synthesize_werner(s: float, target: str = "psi-", d: float | None = None, axis: int | None = None) -> SynthesisRecipe:
    """Recipe turning a rank-2 zero-discord state into the Werner(-like) state ``s|B><B| + (1-s) I/4``.

    ``axis`` (0-based) sets the field axis for the singlet target, which is
    invariant under collective rotations; the other targets fix it.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {sorted(TARGETS)}")
    if not (0 < abs(s) <= 1 / 3 + 1e-15):
        raise SynthesisError(f"s = {s} is out of range: need 0 < |s| <= 1/3 (separable inputs cannot give s > 1/3)")
    vertex, field_axis = TARGETS[target]
    family = "singlet" if target == "psi-" else "werner_like"
    if target == "psi-" and axis is not None:
        field_axis = int(axis)
    if d is None:
        d = -3 * s if family == "singlet" else 3 * s
    d = float(d)
    if d == 0 or abs(d) > 1 + 1e-15:
        raise SynthesisError(f"d = {d} must satisfy 0 < |d| <= 1")
    # the asymptotic beta is d cos cos n n^T + (d/2) sin sin (I - n n^T)
    k = -s / d if family == "singlet" else s / d
    solutions = solve_werner_angles(k, family)
    if not solutions:
        raise SynthesisError(f"no angles for k = {k:.6g}; need |k| <= 1/3, i.e. |d| >= 3|s|")
    sol = solutions[0]
    n, u = _in_plane(field_axis)
    v = math.cos(sol.theta_v) * n + math.sin(sol.theta_v) * u
    w = math.cos(sol.theta_w) * n + math.sin(sol.theta_w) * u
    initial = FanoForm(np.zeros(3), np.zeros(3), d * np.outer(v, w))
    expected = BellDiagonalCoords(s * BELL_VERTICES[vertex])
    out = asymptotic_map(fano_reconstruct(initial), n)
    got = coords_from_state(out).d
    residual = float(np.max(np.abs(got - expected.d)))
    if residual > VERIFY_TOL:
        raise SynthesisVerificationError(f"recipe verification failed: residual {residual:.3e}")
    return SynthesisRecipe(initial, FieldDirection(n), expected, target, float(s), d, sol, residual)


def _parallel(a: np.ndarray, n: np.ndarray, tol: float) -> bool:
    na = np.linalg.norm(a)
    if na < 1e-12:
        return True
    return math.asin(min(1.0, float(np.linalg.norm(np.cross(a / na, n))))) < tol


def _perpendicular(a: np.ndarray, n: np.ndarray, tol: float) -> bool:
    return abs(float(a @ n)) / np.linalg.norm(a) < math.sin(tol)


def predict_rank_after_dephasing(f: FanoForm, n, angle_tol: float = ANGLE_TOL, tol: float = RANK_TOL) -> int:
    """Correlation rank after asymptotic dephasing, from geometry alone.

    Supports product states and rank-2 Bell-diagonal states ``d v w^T``.
    A zero Bloch vector counts as parallel to any field (the marginal commutes).
    """
    n = as_direction(n)
    if numerical_rank(f.beta - np.outer(f.r_a, f.r_b), tol) == 0:
        if _parallel(f.r_a, n, angle_tol) or _parallel(f.r_b, n, angle_tol):
            return 1
        return 3
    bell_diag = np.linalg.norm(f.r_a) < tol and np.linalg.norm(f.r_b) < tol
    if not (bell_diag and numerical_rank(f.beta, tol) == 1):
        raise ValueError("prediction supports only product states and rank-2 Bell-diagonal states")
    u, _, vt = np.linalg.svd(f.beta)
    v, w = u[:, 0], vt[0]
    v_par, w_par = _parallel(v, n, angle_tol), _parallel(w, n, angle_tol)
    v_perp, w_perp = _perpendicular(v, n, angle_tol), _perpendicular(w, n, angle_tol)
    if (v_par and w_perp) or (w_par and v_perp):
        return 1
    if v_par or w_par:
        return 2
    if v_perp or w_perp:
        return 3
    return 4


def double_dephase_to_L4(rho0, n1, n2, angle_tol: float = ANGLE_TOL) -> np.ndarray:
    """Dephase a product state along ``n1`` and then along a different ``n2``."""
    n1, n2 = as_direction(n1), as_direction(n2)
    if _parallel(n2, n1, angle_tol):
        raise ValueError("second field direction equals +-n1; the second dephasing would have no effect")
    f = fano_decompose(validate_density(rho0).matrix)
    if correlation_rank(f) != 1:
        raise ValueError("double_dephase_to_L4 expects a product state")
    if _parallel(f.r_a, n1, angle_tol) or _parallel(f.r_b, n1, angle_tol):
        raise ValueError("a reduced Bloch vector is parallel to n1; the first dephasing leaves a product state")
    return asymptotic_map(asymptotic_map(rho0, n1), n2)


def prepare_distribution_resource(p: float) -> tuple[np.ndarray, SynthesisRecipe]:
    """Three-qubit resource ``rho_AB (x) I/2`` with ``rho_AB`` the Phi+ Werner-like state at ``p``."""
    if not (0 < p <= 1 / 3 + 1e-15):
        raise SynthesisError(f"p = {p} is out of range: need 0 < p <= 1/3")
    recipe = synthesize_werner(p, "phi+")
    carrier = I2 / 2
    n = recipe.field_direction
    if not factorizes_under_dephasing(carrier, n):
        raise SynthesisError("carrier qubit does not commute with the field")
    initial_ab = fano_reconstruct(recipe.initial_state)
    if not zero_discord_commutator_test(initial_ab):
        raise SynthesisError("pre-dephasing state is not zero-discord")
    state = asymptotic_map(np.kron(initial_ab, carrier), n)
    target = np.kron(
        p * _bell_projector("phi+") + (1 - p) * np.eye(4) / 4,
        carrier,
    )
    dev = float(np.max(np.abs(state - target)))
    if dev > VERIFY_TOL:
        raise SynthesisVerificationError(f"resource state deviates from target by {dev:.3e}")
    return state, recipe


def _bell_projector(label: str) -> np.ndarray:
    s = 1 / math.sqrt(2)
    vecs = {
        "psi-": [0, s, -s, 0],
        "psi+": [0, s, s, 0],
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
    }
    psi = np.array(vecs[label], dtype=complex)
    return np.outer(psi, psi.conj())


def meter_state(n) -> np.ndarray:
    """``|1><1|``: the -1 eigenprojector of ``n.sigma``."""
    return 0.5 * (I2 - pauli_dot(as_direction(n)))


def prepare_activation_input(rho_ab, n) -> np.ndarray:
    """``rho_AB (x) |1><1|_M`` with the meter in an eigenstate of ``n.sigma``."""
    a = as_matrix(rho_ab)
    if num_qubits_of(a) != 2:
        raise ValueError("prepare_activation_input expects a two-qubit state")
    validate_density(a)
    return np.kron(a, meter_state(n))
