"""Exact Gaussian draws and heat-bath chains for the pinned Laplacian field."""
from sampler.diagnostics import RHAT_THRESHOLD, split_rhat, standard_error
from sampler.gibbs import (
    BatchTrace,
    ChainSample,
    ChainState,
    HeatBath,
    SamplerConfig,
    ScanOrder,
    gibbs_sweep,
    run_batched,
    run_chain,
    run_replicas,
    sample_pinned_gaussian,
)
from sampler.profile import contact_number, empirical_profile
from sampler.walks import (
    bridge_correction,
    bridge_from_conditioning,
    bridge_map,
    integrated_rw_covariance,
    integrated_rw_paths,
    sample_integrated_rw,
)
