"""Brute-force evaluation of the ensemble average over field strengths.

These routines integrate ``U(omega) rho U(omega)^dagger`` against ``p(omega)``
directly, with ``U(omega) = exp(-i omega t n.sigma / 2)^{(x) N}``. They never use
the projector decomposition or the closed-form characteristic functions, so
they serve as an independent check of :mod:`colldeph.dephasing`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .dephasing import FrequencyDistribution, as_direction, transient_map
from .qcore import I2, dagger, pauli_dot, random_density, validate_density

MAX_TRACE_DRIFT = 1e-6
VERIFY_QUADRATURE_TOL = 1e-6
_WRAP_TERMS = 2000
_NODE_CHUNK = 1024


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSettings:
    """``scheme`` is ``"gauss"`` (composite Gauss-Legendre) or ``"adaptive"`` (scipy quad_vec).

    ``node_count`` is the number of Gauss nodes per panel; ``window`` is the
    half width of the Gaussian integration range in standard deviations.
    """

    scheme: str = "gauss"
    node_count: int = 32
    window: float = 12.0

    def __post_init__(self):
        if self.scheme not in ("gauss", "adaptive"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.node_count < 8:
            raise ValueError("node_count must be at least 8")
        if self.window <= 0:
            raise ValueError("window must be positive")


@dataclass(frozen=True)
class QuadratureResult:
    state: np.ndarray
    trace_drift: float


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: np.ndarray
    std_error: float
    samples: int
    seed: int


def _conjugated(rho: np.ndarray, n: np.ndarray, t: float, omegas: np.ndarray) -> np.ndarray:
    """Stack of ``U(omega) rho U(omega)^dagger`` for each omega."""
    alpha = 0.5 * omegas * t
    ns = pauli_dot(n)
    u1 = np.cos(alpha)[:, None, None] * I2 - 1j * np.sin(alpha)[:, None, None] * ns
    num_qubits = rho.shape[0].bit_length() - 1
    u = u1
    for _ in range(num_qubits - 1):
        k, a, b = u.shape
        u = np.einsum("kab,kcd->kacbd", u, u1).reshape(k, 2 * a, 2 * b)
    return u @ rho @ dagger(u)


def _weighted_sum(rho, n, t, omegas, weights) -> np.ndarray:
    acc = np.zeros_like(rho)
    for start in range(0, len(omegas), _NODE_CHUNK):
        sl = slice(start, start + _NODE_CHUNK)
        acc += np.tensordot(weights[sl], _conjugated(rho, n, t, omegas[sl]), axes=1)
    return acc


def _gauss_panels(lo: float, hi: float, panels: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _panel_count(length: float, num_qubits: int, t: float, scale: float | None) -> int:
    # one panel per shortest oscillation period and per distribution width
    widths = [length]
    if t > 0:
        widths.append(2 * math.pi / (num_qubits * t))
    if scale is not None:
        widths.append(scale)
    return max(1, math.ceil(length / min(widths)))


def _wrapped_lorentzian(dist: FrequencyDistribution, x: np.ndarray, period: float) -> np.ndarray:
    """Density folded onto one period, ``sum_k p(x + k T)``, with integral remainders."""
    k = np.arange(-_WRAP_TERMS, _WRAP_TERMS + 1)
    total = np.zeros_like(x)
    for chunk in np.array_split(k, 8):
        total += dist.pdf(x[None, :] + chunk[:, None] * period).sum(axis=0)
    edge = (_WRAP_TERMS + 0.5) * period
    total += (dist.cdf(x - edge) + (1 - dist.cdf(x + edge))) / period
    return total


def _integration_plan(dist: FrequencyDistribution, num_qubits: int, t: float, q: QuadratureSettings):
    """Interval and density for the integral; Lorentzian tails are folded onto one period."""
    w0, w = dist.omega0, dist.width
    if dist.kind == "gaussian":
        return w0 - q.window * w, w0 + q.window * w, dist.pdf, w
    if dist.kind == "uniform":
        return w0 - w, w0 + w, dist.pdf, None
    if t == 0:
        # no oscillation: the substitution omega = omega0 + gamma tan(pi u / 2) maps the law to du / 2
        return -1.0, 1.0, (lambda u: np.full_like(u, 0.5)), None
    period = 2 * math.pi / t
    return w0 - period / 2, w0 + period / 2, (lambda x: _wrapped_lorentzian(dist, x, period)), min(w, period)


def ensemble_average_quadrature(rho0, n, dist: FrequencyDistribution, t: float, q: QuadratureSettings | None = None) -> QuadratureResult:
    """Integrate the ensemble average numerically and renormalize the trace."""
    q = q or QuadratureSettings()
    state = validate_density(rho0)
    rho = np.array(state.matrix)
    n = as_direction(n)
    t = float(t)
    lo, hi, density, scale = _integration_plan(dist, state.num_qubits, t, q)
    # the t = 0 Lorentzian plan integrates in the substituted variable, where U = I anyway
    t_eff = 0.0 if (dist.kind == "lorentzian" and t == 0) else t
    if q.scheme == "gauss":
        panels = _panel_count(hi - lo, state.num_qubits, t_eff, scale)
        x, w = _gauss_panels(lo, hi, panels, q.node_count)
        weights = w * density(x)
        if not np.any(weights > 0):
            raise OracleError("all quadrature weights underflowed to zero")
        acc = _weighted_sum(rho, n, t_eff, x, weights)
    else:
        def integrand(xi):
            return float(density(np.array([xi]))[0]) * _conjugated(rho, n, t_eff, np.array([xi]))[0]

        acc, _ = quad_vec(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=20000)
    drift = float(np.real(np.trace(acc)) - 1.0)
    if abs(drift) > MAX_TRACE_DRIFT:
        raise OracleError(f"quadrature trace drift {drift:.3e} exceeds {MAX_TRACE_DRIFT:.0e}")
    return QuadratureResult(acc / np.real(np.trace(acc)), drift)


def _pairwise(parts: list):
    while len(parts) > 1:
        nxt = [tuple(a + b for a, b in zip(parts[i], parts[i + 1])) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _mc_chunk(rho, n, dist, t, seed: int, index: int, size: int):
    gen = np.random.Generator(np.random.Philox(key=np.array([index, seed], dtype=np.uint64)))
    # (k + 1/2) / 2^53 keeps uniforms strictly inside (0, 1)
    u = gen.random(size) + 2.0**-54
    x = _conjugated(rho, n, t, dist.ppf(u))
    return x.sum(axis=0), (x.real**2).sum(axis=0), (x.imag**2).sum(axis=0)


def ensemble_average_monte_carlo(
    rho0,
    n,
    dist: FrequencyDistribution,
    t: float,
    samples: int,
    seed: int,
    workers: int | None = 1,
    chunk_size: int = 4096,
) -> MonteCarloResult:
    """Sample-mean estimate of the ensemble average.

    Chunk ``c`` draws from a Philox stream keyed by ``(seed, c)`` and chunk sums
    are combined by a fixed pairwise tree, so the result is bit-for-bit the
    same for any ``workers``.
    """
    if samples < 100:
        raise ValueError("samples must be at least 100")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    state = validate_density(rho0)
    rho = np.array(state.matrix)
    n = as_direction(n)
    sizes = [min(chunk_size, samples - s) for s in range(0, samples, chunk_size)]
    jobs = [(rho, n, dist, float(t), seed, i, sz) for i, sz in enumerate(sizes)]
    if workers == 1:
        parts = [_mc_chunk(*j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _mc_chunk(*j), jobs))
    total, sq_re, sq_im = _pairwise(parts)
    mean = total / samples
    var_re = np.clip(sq_re / samples - mean.real**2, 0, None)
    var_im = np.clip(sq_im / samples - mean.imag**2, 0, None)
    se = math.sqrt(max(float(var_re.max()), float(var_im.max())) / (samples - 1))
    return MonteCarloResult(mean, se, samples, seed)


TIME_GRID = (0.0, 0.3, 1.0, 2.5, 6.0)  # in units of 1 / width
KINDS = ("gaussian", "lorentzian", "uniform")


@dataclass(frozen=True)
class VerifyCase:
    index: int
    rho0: np.ndarray
    n: np.ndarray
    dist: FrequencyDistribution
    t: float

    @property
    def num_qubits(self) -> int:
        return self.rho0.shape[0].bit_length() - 1


def case_matrix(count: int = 100, seed: int = 0) -> list[VerifyCase]:
    """Random comparison cases cycling over qubit number, distribution kind and time grid."""
    if count < 1:
        raise ValueError("case count must be positive")
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(count):
        # 3 and 5 are coprime, so every 15 consecutive cases cover all (N, t) pairs
        num_qubits = 1 + i % 3
        t_scaled = TIME_GRID[i % len(TIME_GRID)]
        kind = KINDS[(i // 15) % 3]
        rho = random_density(num_qubits, rng)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        width = float(rng.uniform(0.5, 2.0))
        omega0 = float(rng.uniform(-2.0, 2.0))
        dist = FrequencyDistribution(kind, omega0, width)
        cases.append(VerifyCase(i, rho, n, dist, t_scaled / width))
    return cases


@dataclass(frozen=True)
class ComparisonRow:
    case: VerifyCase
    dev_quadrature: float
    trace_drift: float
    dev_monte_carlo: float
    mc_std_error: float
    mc_samples: int

    @property
    def passed(self) -> bool:
        return self.dev_quadrature <= VERIFY_QUADRATURE_TOL


def compare_case(case: VerifyCase, samples: int, seed: int, q: QuadratureSettings | None = None,
                 analytic=None, workers: int | None = 1) -> ComparisonRow:
    """Deviations of the quadrature and Monte Carlo averages from ``analytic(rho0, n, dist, t)``."""
    analytic = analytic or transient_map
    exact = analytic(case.rho0, case.n, case.dist, case.t)
    quad = ensemble_average_quadrature(case.rho0, case.n, case.dist, case.t, q)
    mc = ensemble_average_monte_carlo(case.rho0, case.n, case.dist, case.t, samples, seed + case.index, workers)
    return ComparisonRow(
        case,
        float(np.max(np.abs(quad.state - exact))),
        quad.trace_drift,
        float(np.max(np.abs(mc.estimate - exact))),
        mc.std_error,
        samples,
    )
