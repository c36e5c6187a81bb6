"""Numerical laboratory for density-matrix ontologies of open quantum systems.

Submodules: ``hilbert`` (states, partial traces, spectra), ``channels``
(Kraus/Choi/Lindblad maps), ``conditional`` (quantum conditional
probabilities), ``trajectories``, ``swap``, ``scenarios`` and ``cli``.
"""

from .channels import (KrausChannel, LindbladGenerator, apply, assignment_map, choi, conditional_state,
                       kraus_from_choi, lindblad_evolve, luders_channel, verify_cpt)
from .conditional import (ConditionalProbabilityTable, coarse_grained_cond_probs, dynamical_cond_probs,
                          general_cond_probs, kinematical_cond_probs, leifer_spekkens_check,
                          propagate_epistemic, subsystem_inner_product, transition_rates)
from .config import DEFAULT, Tolerances
from .hilbert import (DensityMatrix, EpistemicState, Operator, Partition, StateVector, partial_trace,
                      random_density_matrix, random_pure_state, spectral_decompose, tensor,
                      validate_density_matrix, von_neumann_entropy)
from .swap import SwapBlockModel, eigenstate_swap_analysis
from .trajectories import OnticTrajectory, sample_trajectories

__version__ = "0.1.0"

__all__ = [
    "ConditionalProbabilityTable", "DEFAULT", "DensityMatrix", "EpistemicState", "KrausChannel",
    "LindbladGenerator", "OnticTrajectory", "Operator", "Partition", "StateVector", "SwapBlockModel",
    "Tolerances", "apply", "assignment_map", "choi", "coarse_grained_cond_probs", "conditional_state",
    "dynamical_cond_probs", "eigenstate_swap_analysis", "general_cond_probs", "kinematical_cond_probs",
    "kraus_from_choi", "leifer_spekkens_check", "lindblad_evolve", "luders_channel", "partial_trace",
    "propagate_epistemic", "random_density_matrix", "random_pure_state", "sample_trajectories",
    "spectral_decompose", "subsystem_inner_product", "tensor", "transition_rates",
    "validate_density_matrix", "verify_cpt", "von_neumann_entropy",
]
