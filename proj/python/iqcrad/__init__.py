"""Certified convergence-rate bounds and worst-case trajectories for linear
systems interconnected with uncertainties described by quadratic constraints."""

from ._core import (
    DimensionError,
    ParseError,
    attainment_check,
    augment_problem,
    iqc_partial_sums,
    load_problem,
    lyapunov_adjoint,
    lyapunov_operator,
    simulate,
    spectral_radius,
    worst_case,
)

__all__ = [
    "DimensionError",
    "ParseError",
    "attainment_check",
    "augment_problem",
    "iqc_partial_sums",
    "load_problem",
    "lyapunov_adjoint",
    "lyapunov_operator",
    "simulate",
    "spectral_radius",
    "worst_case",
]
