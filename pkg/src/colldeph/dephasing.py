"""Collective dephasing of N qubits in a field of fixed direction and fluctuating strength.

The ensemble-averaged evolution is

    rho(t) = sum_ij phi[(i - j) t] Theta_i rho(0) Theta_j

where ``phi`` is the characteristic function of the frequency distribution and
``Theta_j`` projects onto the eigenspace of ``sum_k n.sigma^(k)`` with ``j``
qubits in the ``-1`` eigenstate of ``n.sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import ndtr, ndtri

from .fano import FanoForm
from .qcore import (
    I2,
    MAX_QUBITS,
    as_matrix,
    kron_all,
    num_qubits_of,
    pauli_dot,
    validate_density,
)

DECAY_THRESHOLD = 1e-9


@dataclass(frozen=True)
class FieldDirection:
    """Unit vector along the field; normalized on construction."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float).reshape(3)
        norm = float(np.linalg.norm(v))
        if not np.isfinite(norm) or norm < 1e-12:
            raise ValueError("field direction must be a nonzero finite 3-vector")
        v = v / norm
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    def __array__(self, dtype=None, copy=None):
        return self.vector if dtype is None else self.vector.astype(dtype)

    def key(self) -> tuple[float, float, float]:
        return tuple(float(x) for x in self.vector)


def as_direction(n) -> np.ndarray:
    """Unit 3-vector from a FieldDirection or anything array-like."""
    if isinstance(n, FieldDirection):
        return n.vector
    return FieldDirection(n).vector


_KINDS = {"gaussian": "sigma", "lorentzian": "gamma", "uniform": "halfWidth"}


@dataclass(frozen=True)
class FrequencyDistribution:
    """Gaussian, Lorentzian (Cauchy) or uniform law for the angular frequency.

    ``width`` is the standard deviation, the half width at half maximum, or
    the half width of the support, respectively.
    """

    kind: str
    omega0: float
    width: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ValueError(f"{_KINDS[self.kind]} must be positive, got {self.width}")
        if not math.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")
        object.__setattr__(self, "omega0", float(self.omega0))
        object.__setattr__(self, "width", float(self.width))

    @classmethod
    def gaussian(cls, omega0: float, sigma: float) -> "FrequencyDistribution":
        return cls("gaussian", omega0, sigma)

    @classmethod
    def lorentzian(cls, omega0: float, gamma: float) -> "FrequencyDistribution":
        return cls("lorentzian", omega0, gamma)

    @classmethod
    def uniform(cls, omega0: float, half_width: float) -> "FrequencyDistribution":
        return cls("uniform", omega0, half_width)

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencyDistribution":
        kind = obj.get("kind")
        if kind not in _KINDS:
            raise ValueError(f"distribution JSON: field 'kind' must be one of {sorted(_KINDS)}, got {kind!r}")
        wkey = _KINDS[kind]
        if wkey not in obj:
            raise KeyError(f"distribution JSON missing field {wkey!r}")
        return cls(kind, float(obj.get("omega0", 0.0)), float(obj[wkey]))

    def to_json(self) -> dict:
        return {"kind": self.kind, "omega0": self.omega0, _KINDS[self.kind]: self.width}

    def characteristic(self, t):
        """``phi(t) = E[exp(i omega t)]`` in closed form."""
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * self.omega0 * t)
        w = self.width
        if self.kind == "gaussian":
            env = np.exp(-0.5 * (w * t) ** 2)
        elif self.kind == "lorentzian":
            env = np.exp(-w * np.abs(t))
        else:
            env = np.sinc(w * t / np.pi)
        out = phase * env
        return complex(out) if out.ndim == 0 else out

    def pdf(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega0
        w = self.width
        if self.kind == "gaussian":
            return np.exp(-0.5 * (x / w) ** 2) / (w * math.sqrt(2 * math.pi))
        if self.kind == "lorentzian":
            return w / (math.pi * (w * w + x * x))
        return np.where(np.abs(x) <= w, 0.5 / w, 0.0)

    def cdf(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega0
        w = self.width
        if self.kind == "gaussian":
            return ndtr(x / w)
        if self.kind == "lorentzian":
            # arctan2 keeps full relative precision deep in both tails
            return np.arctan2(w, -x) / math.pi
        return np.clip((x + w) / (2 * w), 0.0, 1.0)

    def ppf(self, u):
        """Inverse CDF, used to map uniforms on (0, 1) to samples."""
        u = np.asarray(u, dtype=float)
        w = self.width
        if self.kind == "gaussian":
            return self.omega0 + w * ndtri(u)
        if self.kind == "lorentzian":
            return self.omega0 + w * np.tan(math.pi * (u - 0.5))
        return self.omega0 + w * (2 * u - 1)

    def decay_time(self, threshold: float = DECAY_THRESHOLD) -> float:
        """Smallest time after which ``|phi(t)| < threshold`` is guaranteed."""
        w = self.width
        if self.kind == "gaussian":
            return math.sqrt(2 * math.log(1 / threshold)) / w * (1 + 1e-12)
        if self.kind == "lorentzian":
            return math.log(1 / threshold) / w * (1 + 1e-12)
        return 1.0 / (w * threshold) * (1 + 1e-12)


@dataclass(frozen=True)
class KrausSet:
    direction: FieldDirection
    num_qubits: int
    thetas: tuple = field(repr=False)


def _lambda_pm(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ns = pauli_dot(n)
    return 0.5 * (I2 + ns), 0.5 * (I2 - ns)


@lru_cache(maxsize=64)
def _thetas_cached(num_qubits: int, key: tuple[float, float, float]) -> tuple:
    lam_p, lam_m = _lambda_pm(np.array(key))
    out = []
    for j in range(num_qubits + 1):
        theta = np.zeros((1 << num_qubits,) * 2, dtype=complex)
        for minus in combinations(range(num_qubits), j):
            chosen = set(minus)
            theta += kron_all(lam_m if k in chosen else lam_p for k in range(num_qubits))
        theta.setflags(write=False)
        out.append(theta)
    return tuple(out)


def build_kraus_set(num_qubits: int, n) -> KrausSet:
    """Projectors ``Theta_0 .. Theta_N`` for field direction ``n``."""
    if not (isinstance(num_qubits, (int, np.integer)) and 1 <= num_qubits <= MAX_QUBITS):
        raise ValueError(f"number of qubits must be an integer in [1, {MAX_QUBITS}], got {num_qubits}")
    direction = n if isinstance(n, FieldDirection) else FieldDirection(n)
    return KrausSet(direction, int(num_qubits), _thetas_cached(int(num_qubits), direction.key()))


def dephasing_weights(dist: FrequencyDistribution, num_qubits: int, t: float) -> np.ndarray:
    """Matrix ``M_ij = phi[(i - j) t]`` for ``i, j = 0..N``."""
    k = np.arange(num_qubits + 1)
    return dist.characteristic((k[:, None] - k[None, :]) * float(t))


def _apply(thetas, rho: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
    left = [th @ rho for th in thetas]
    out = np.zeros_like(rho)
    for i, li in enumerate(left):
        if weights is None:
            out += li @ thetas[i]
            continue
        for j, th in enumerate(thetas):
            w = weights[i, j]
            if w != 0:
                out += w * (li @ th)
    return out


def transient_map(rho0, n, dist: FrequencyDistribution, t: float) -> np.ndarray:
    """State at time ``t >= 0`` under collective dephasing."""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    state = validate_density(rho0)
    ks = build_kraus_set(state.num_qubits, n)
    if t == 0:
        return np.array(state.matrix)
    return _apply(ks.thetas, state.matrix, dephasing_weights(dist, state.num_qubits, t))


def evolve(rho0, n, dist: FrequencyDistribution, times) -> list[np.ndarray]:
    return [transient_map(rho0, n, dist, float(t)) for t in np.atleast_1d(times)]


def asymptotic_map(rho0, n) -> np.ndarray:
    """Long-time limit ``sum_j Theta_j rho Theta_j`` (independent of the distribution)."""
    state = validate_density(rho0)
    ks = build_kraus_set(state.num_qubits, n)
    return _apply(ks.thetas, state.matrix, None)


def dephase_bloch(r, n) -> np.ndarray:
    """Reduced Bloch vector after asymptotic dephasing: ``(r.n) n``."""
    n = as_direction(n)
    return float(np.dot(r, n)) * n


def dephase_dyad(v, w, n) -> np.ndarray:
    """Image of the correlation dyad ``v w^T`` under asymptotic dephasing."""
    n = as_direction(n)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    nv, nw = float(n @ v), float(n @ w)
    return 0.5 * (
        2 * nv * nw * np.outer(n, n)
        + np.outer(np.cross(v, n), np.cross(w, n))
        + np.outer(v - nv * n, w - nw * n)
    )


def dephase_fano(f, n):
    """Closed-form asymptotic map on a two-qubit Fano form."""
    n = as_direction(n)
    # beta is linear in its dyads; the columns of the identity give beta = sum_ij b_ij e_i e_j^T
    beta = np.zeros((3, 3))
    eye = np.eye(3)
    for i in range(3):
        for j in range(3):
            if f.beta[i, j] != 0:
                beta += f.beta[i, j] * dephase_dyad(eye[i], eye[j], n)
    return FanoForm(dephase_bloch(f.r_a, n), dephase_bloch(f.r_b, n), beta)


def factorizes_under_dephasing(rho_local, n, tol: float = 1e-10) -> bool:
    """True iff the single-qubit state commutes with ``n.sigma``."""
    rho = as_matrix(rho_local)
    if num_qubits_of(rho) != 1:
        raise ValueError("factorizes_under_dephasing expects a single-qubit state")
    validate_density(rho)
    ns = pauli_dot(as_direction(n))
    return float(np.max(np.abs(ns @ rho - rho @ ns))) < tol
