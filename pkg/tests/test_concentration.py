import math

import numpy as np
import pytest

from core.field import BoundaryData
from ldp.concentration import concentration_experiment
from sampler.gibbs import SamplerConfig, ScanOrder
from suites.ldp import concentration
from utils.errors import DomainError
from variational.phases import classify

GAUSSIAN_BC = BoundaryData.dirichlet(1.0, 0.0, 0.5, 0.0)


def gaussian_config(N: int = 16) -> SamplerConfig:
    return SamplerConfig(N=N, bc=GAUSSIAN_BC, eps=0.0, seed=4, sweeps=2)


def test_report_must_match_the_boundary_data():
    with pytest.raises(DomainError):
        concentration_experiment(gaussian_config(), classify(BoundaryData.zero(), 0.0), [0.1])


def test_delta_grid_must_be_non_empty():
    with pytest.raises(DomainError):
        concentration_experiment(gaussian_config(), classify(GAUSSIAN_BC, 0.0), [])


def test_gaussian_profiles_concentrate_on_the_cubic():
    report = classify(GAUSSIAN_BC, 0.0)
    rows = concentration_experiment(gaussian_config(), report, [0.5, 0.05, 0.01], [16, 64, 256], samples=200)
    medians = [row.median for row in rows]
    assert medians[0] > medians[1] > medians[2]
    for row in rows:
        coverage = [row.coverage[delta] for delta in sorted(row.coverage)]
        assert coverage == sorted(coverage)
        assert math.isnan(row.rhat) and not row.flagged
        assert row.mean_contact == 0.0


def test_rows_serialise():
    rows = concentration_experiment(gaussian_config(), classify(GAUSSIAN_BC, 0.0), [0.1], samples=20)
    document = rows[0].to_dict()
    assert document["samples"] == 20
    assert set(document["coverage"]) == {"0.10000000000000001"}
    assert len(rows[0].csv_row()) == 5


def test_chains_feed_the_experiment():
    config = SamplerConfig(
        N=16, bc=BoundaryData.zero(), eps=1e3, seed=9, sweeps=60, burn_in=20, thin=2, scan=ScanOrder.CHROMATIC
    )
    rows = concentration_experiment(config, classify(BoundaryData.zero(), math.log(1e3)), [0.05], samples=10)
    assert rows[0].distances.size == 2 * 20
    assert 0.0 < rows[0].mean_contact <= 1.0
    assert np.isfinite(rows[0].rhat)


@pytest.mark.slow
def test_localized_and_gaussian_suites_concentrate(tmp_path):
    result = concentration(True, 0, tmp_path)
    assert result["passed"], result
    assert (tmp_path / "concentration.csv").exists()
