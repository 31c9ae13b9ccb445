"""Exact finite-N Gaussian algebra for the Laplacian pinning model."""
from core.field import BoundaryData, LatticeField, MacroProfile, PinningSet, as_pins, variable_sites
from core.partition import (
    CubicCoefficients,
    correction_map,
    discrete_cubic_coefficients,
    discrete_minimiser,
    field_variance,
    hamiltonian,
    log_partition_bc,
    log_partition_split,
    log_partition_zero,
)
from core.precision import BandedPrecision, dense_precision, log_det_closed_form, precision_matrix
