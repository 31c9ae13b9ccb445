"""Continuum minimisers and phase classification of the rate function."""
from variational.continuum import (
    CriticalLength,
    CubicMinimiser,
    biharmonic_minimiser,
    critical_lengths,
    left_segment,
    right_segment,
    second_branch_limit,
    segment_energy_derivative,
    segment_energy_tau,
    zero_count,
)
from variational.phases import (
    MinimiserDescriptor,
    MinimiserKind,
    PhaseReport,
    build_profile,
    classify,
    classify_dirichlet,
    classify_dirichlet_symmetric,
    classify_free,
    delta_tau,
    phase_thresholds,
    sigma,
    sigma_free,
    tau0,
    tau_star,
    tau_star_symmetric,
)
