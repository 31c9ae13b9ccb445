"""Exact and estimated free energies of the pinned Laplacian model."""
from free_energy.enumeration import PinEnumeration, RatioTable, get_enumeration, log_partition_pinned, ratio_exact
from free_energy.integration import (
    ChainBudget,
    ScanRow,
    TauEstimate,
    TauRow,
    bracket_critical,
    critical_region_scan,
    extrapolate,
    geometric_grid,
    tau_estimate,
    tau_for_size,
)
