"""Numerical checks of the large-deviation statements: energies, rates and concentration."""
from ldp.concentration import ConcentrationRow, concentration_experiment
from ldp.rates import (
    GammaReport,
    RateEvaluation,
    SmoothProfile,
    evaluate_rate,
    gamma_convergence_check,
    gaussian_conjugate,
    mogulskii_rate,
    numeric_conjugate,
    rescaled_energy,
    standard_profiles,
)
