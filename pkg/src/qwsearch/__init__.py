"""Spectral predictions and exact dynamics for continuous-time quantum-walk search."""

from __future__ import annotations

__version__ = "0.1.0"

from .graphs import GraphSpec, Hamiltonian, build_graph, hamiltonian_for, normalize
from .predictor import (
    CostInputs,
    PredictorConfig,
    check_spectral_condition,
    classify_optimality,
    cost_model,
    off_critical_bound,
    predict_critical,
    quasi_degenerate_condition,
)
from .rank_one import amplitude_curve, dense_oracle, find_peak, solve_search_spectrum
from .spectra import (
    GroupedSpectrum,
    SParams,
    analytic_spectrum,
    decompose,
    detect_quasi_degenerate,
    initial_state,
    rotated_overlap,
    s_params,
)

__all__ = [
    "CostInputs",
    "GraphSpec",
    "GroupedSpectrum",
    "Hamiltonian",
    "PredictorConfig",
    "SParams",
    "amplitude_curve",
    "analytic_spectrum",
    "build_graph",
    "check_spectral_condition",
    "classify_optimality",
    "cost_model",
    "decompose",
    "dense_oracle",
    "detect_quasi_degenerate",
    "find_peak",
    "hamiltonian_for",
    "initial_state",
    "normalize",
    "off_critical_bound",
    "predict_critical",
    "quasi_degenerate_condition",
    "rotated_overlap",
    "s_params",
    "solve_search_spectrum",
]
