"""Spectral toolkit for dispersive PDEs with quasi-periodic boundary conditions."""

__version__ = "0.1.0"

from .numbers import (
    DispersionPolynomial,
    RationalTime,
    Surd,
    ThetaValue,
    Turns,
    composition_plan,
    drift,
    parse_theta,
    parse_time,
    transform_polynomial,
)
from .spectral import (
    GridProfile,
    SpectralState,
    analyze,
    box_coefficients_closed_form,
    evolve_composition,
    evolve_correspondence,
    evolve_quasi,
    revival_weights,
    synthesize,
)
from .analysis import box_dimension, boundary_twist_residual, oscillation_at, total_variation
from .nls import NlsConfig, nls_evolve_quasi, nls_step_periodic

__all__ = [
    "__version__",
    "DispersionPolynomial", "RationalTime", "Surd", "ThetaValue", "Turns",
    "composition_plan", "drift", "parse_theta", "parse_time", "transform_polynomial",
    "GridProfile", "SpectralState", "analyze", "box_coefficients_closed_form",
    "evolve_composition", "evolve_correspondence", "evolve_quasi", "revival_weights",
    "synthesize", "box_dimension", "boundary_twist_residual", "oscillation_at",
    "total_variation", "NlsConfig", "nls_evolve_quasi", "nls_step_periodic",
]
