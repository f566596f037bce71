"""Collective dephasing of qubit registers: channel, correlation diagnostics and state synthesis."""

from .correlations import (
    concurrence_bell_diagonal,
    concurrence_wootters,
    diagnostics,
    negativity,
    zero_discord_commutator_test,
)
from .dephasing import (
    FieldDirection,
    FrequencyDistribution,
    asymptotic_map,
    build_kraus_set,
    evolve,
    transient_map,
)
from .fano import FanoForm, correlation_rank, fano_decompose, fano_reconstruct, generalized_beta
from .oracle import QuadratureSettings, ensemble_average_monte_carlo, ensemble_average_quadrature
from .qcore import DensityOperator, InvalidStateError, partial_trace, purity, validate_density
from .synthesis import SynthesisError, synthesize_werner
from .tetrahedron import BellDiagonalCoords, asymptotic_coords, coords_from_state, trajectory

__version__ = "0.1.0"

__all__ = [
    "asymptotic_coords",
    "asymptotic_map",
    "BellDiagonalCoords",
    "build_kraus_set",
    "concurrence_bell_diagonal",
    "concurrence_wootters",
    "coords_from_state",
    "correlation_rank",
    "DensityOperator",
    "diagnostics",
    "ensemble_average_monte_carlo",
    "ensemble_average_quadrature",
    "evolve",
    "fano_decompose",
    "fano_reconstruct",
    "FanoForm",
    "FieldDirection",
    "FrequencyDistribution",
    "generalized_beta",
    "InvalidStateError",
    "negativity",
    "partial_trace",
    "purity",
    "QuadratureSettings",
    "SynthesisError",
    "synthesize_werner",
    "trajectory",
    "transient_map",
    "validate_density",
    "zero_discord_commutator_test",
]
