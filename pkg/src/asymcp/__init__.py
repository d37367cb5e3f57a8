"""Two-stage contact process with asymptomatic (1) and symptomatic (2) infection.

Exact lattice simulation, monotone couplings, mean-field analysis and
closed-form bounds.
"""
from .dynamics import (
    EventStream,
    Params,
    Trajectory,
    Variant,
    estimate_beta_c,
    evolve_from_stream,
    exit_estimate,
    initial_configuration,
    run_ctmc,
    sample_event_stream,
    survival_estimate,
)
from .errors import BracketError, DomainError, StepSizeError
from .lattice import Configuration, LatticeGeometry, density, neighbor_fraction, neighbors

__all__ = [
    "BracketError",
    "Configuration",
    "DomainError",
    "EventStream",
    "LatticeGeometry",
    "Params",
    "StepSizeError",
    "Trajectory",
    "Variant",
    "density",
    "estimate_beta_c",
    "evolve_from_stream",
    "exit_estimate",
    "initial_configuration",
    "neighbor_fraction",
    "neighbors",
    "run_ctmc",
    "sample_event_stream",
    "survival_estimate",
]
__version__ = "0.1.0"
