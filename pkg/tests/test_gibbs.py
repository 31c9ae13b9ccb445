import numpy as np
import pytest

from core.field import BoundaryData, LatticeField, PinningSet
from free_energy.enumeration import PinEnumeration
from sampler.diagnostics import split_rhat, standard_error
from sampler.gibbs import (
    ChainState,
    HeatBath,
    SamplerConfig,
    ScanOrder,
    gibbs_sweep,
    initial_rows,
    run_batched,
    run_chain,
    run_replicas,
    sample_pinned_gaussian,
)
from sampler.profile import contact_number, empirical_profile
from suites.sampler import enumeration_distance, pin_set_histogram, total_variation
from utils.errors import DomainError


def config(**overrides) -> SamplerConfig:
    options = dict(N=8, bc=BoundaryData.zero(), eps=2.0, seed=3, sweeps=30, burn_in=5)
    options.update(overrides)
    return SamplerConfig(**options)


def test_pinned_gaussian_respects_pins_and_boundary(rng):
    bc = BoundaryData.dirichlet(1.0, 0.5, -1.0, 2.0)
    field = sample_pinned_gaussian(10, bc, [2, 6], rng)
    assert field[2] == 0.0 and field[6] == 0.0
    assert (field[-1], field[0]) == bc.left_slots(10)
    assert (field[10], field[11]) == bc.right_slots(10)

    draws = sample_pinned_gaussian(10, bc, [2, 6], rng, size=4)
    assert draws.shape == (4, 13)
    assert not draws[:, 3].any()


def test_pinned_gaussian_needs_a_generator():
    with pytest.raises(DomainError):
        sample_pinned_gaussian(5, BoundaryData.zero())


@pytest.mark.parametrize(
    "overrides",
    [dict(N=1), dict(eps=-1.0), dict(eps=float("inf")), dict(sweeps=5, burn_in=5), dict(thin=0), dict(seed=-1), dict(init="cold")],
)
def test_config_guards(overrides):
    with pytest.raises(DomainError):
        config(**overrides)


def test_config_coerces_scan_names():
    assert config(scan="chromatic").scan is ScanOrder.CHROMATIC
    assert config().with_replica(4).replica == 4


def test_initial_rows():
    bc = BoundaryData.zero()
    phi, pinned = initial_rows(6, bc, "auto", [0.5, 3.0])
    assert phi.shape == (2, 9) and pinned.shape == (2, 5)
    assert not pinned[0].any() and pinned[1].all()
    with pytest.raises(DomainError):
        initial_rows(6, bc, "gaussian", [1.0])


def test_chain_state_checks_pinned_zeros():
    values = np.zeros(7)
    values[3] = 1.0
    with pytest.raises(DomainError):
        ChainState(LatticeField(4, values), PinningSet.of([2]))


@pytest.mark.parametrize("scan", list(ScanOrder))
def test_sweep_keeps_pins_at_zero(scan, rng):
    state = ChainState(LatticeField(10, np.zeros(13)), PinningSet())
    for _ in range(20):
        state = gibbs_sweep(state, 5.0, rng, scan)
        assert all(state.field[site] == 0.0 for site in state.pins)
        assert state.field[-1] == 0.0 and state.field[11] == 0.0


def test_zero_strength_never_pins():
    samples = list(run_chain(config(eps=0.0, init="minimiser")))
    assert all(sample.pin_density == 0.0 for sample in samples)
    # The zero right boundary slot at site N still counts as a contact.
    assert all(sample.contact_fraction == pytest.approx(1.0 / 8) for sample in samples)


def test_chain_emits_after_burn_in_every_thin_sweeps():
    samples = list(run_chain(config(sweeps=20, burn_in=5, thin=3)))
    assert [sample.sweep for sample in samples] == [8, 11, 14, 17, 20]
    assert all(sample.profile.contacts == len(sample.state.pins) for sample in samples)


def test_chains_are_deterministic_in_seed_and_replica():
    first = [sample.contact_fraction for sample in run_chain(config())]
    again = [sample.contact_fraction for sample in run_chain(config())]
    assert first == again
    other = [sample.state.field.values.sum() for sample in run_chain(config(replica=1))]
    assert other != [sample.state.field.values.sum() for sample in run_chain(config())]


def test_replicas_do_not_depend_on_workers():
    serial = run_replicas(config(), replicas=3, workers=1)
    parallel = run_replicas(config(), replicas=3, workers=2)
    assert serial == parallel
    assert len(serial) == 3


def test_batched_rows_do_not_depend_on_grouping():
    options = dict(sweeps=15, burn_in=3, scan=ScanOrder.CHROMATIC)
    together = run_batched(8, BoundaryData.zero(), [0.5, 4.0], 11, replicas=2, **options)
    alone = run_batched(8, BoundaryData.zero(), [0.5, 4.0], 11, replicas=1, first_replica=1, **options)
    assert together.pin_counts.shape == (2, 2, 12)
    np.testing.assert_array_equal(together.pin_counts[1], alone.pin_counts[0])
    np.testing.assert_array_equal(together.contact_counts[1], alone.contact_counts[0])


def test_batched_guards():
    with pytest.raises(DomainError):
        run_batched(8, BoundaryData.zero(), [1.0], 0, 1, sweeps=5, burn_in=5)


def test_heat_bath_rejects_negative_strength():
    with pytest.raises(DomainError):
        HeatBath(5, False, [-1.0])


def test_profile_rescaling():
    values = np.arange(7, dtype=float)
    profile = empirical_profile(LatticeField(4, values), contacts=0)
    np.testing.assert_allclose(profile.values, np.arange(1, 6) / 16.0)
    assert profile.left_ext == 0.0
    assert profile.right_ext == 6.0 / 16.0
    assert contact_number(LatticeField(4, np.zeros(7))) == 4


def test_split_rhat():
    assert split_rhat(np.ones((2, 10))) == 1.0
    assert split_rhat([[0.0] * 10, [1.0] * 10]) == float("inf")
    with pytest.raises(DomainError):
        split_rhat(np.zeros((2, 3)))
    assert np.isnan(standard_error([1.0]))


@pytest.mark.slow
def test_heat_bath_matches_enumeration(tmp_path):
    result = enumeration_distance(True, 0, tmp_path)
    assert result["passed"], result


@pytest.mark.parametrize("scan", list(ScanOrder))
@pytest.mark.parametrize("eps", [0.5, 2.0])
def test_every_scan_matches_enumeration(scan, eps):
    empirical = pin_set_histogram(5, eps, chains=2000, sweeps=120, burn_in=20, seed=17, scan=scan)
    exact = PinEnumeration(5).pin_set_distribution(eps)
    assert total_variation(empirical, exact) <= 0.02


@pytest.mark.slow
@pytest.mark.parametrize("scan", list(ScanOrder))
def test_free_right_heat_bath_matches_enumeration(scan):
    # The free end mixes slowly, so most of the budget is burn-in.
    empirical = pin_set_histogram(3, 2.0, chains=1000, sweeps=2000, burn_in=1000, seed=23, scan=scan, free_right=True)
    exact = PinEnumeration(3, free_right=True).pin_set_distribution(2.0)
    assert empirical.shape == exact.shape == (16,)
    assert total_variation(empirical, exact) <= 0.03


def test_chain_diagnostics_are_measured():
    frozen = list(run_chain(config(eps=0.0)))[-1].diagnostics
    assert frozen == {"pin_rate": 0.0, "flip_rate": 0.0}
    moving = list(run_chain(config(eps=2.0)))[-1].diagnostics
    assert 0.0 < moving["flip_rate"] <= 1.0
    assert 0.0 < moving["pin_rate"] <= 1.0


def test_split_rhat_by_hand():
    chains = np.array([[1.0, 2.0, 3.0, 4.0], [2.0, 3.0, 4.0, 5.0]])
    # Halves [1,2], [3,4], [2,3], [4,5]: means 1.5, 3.5, 2.5, 4.5, within variance 0.5.
    within, between = 0.5, 2.0 * np.var([1.5, 3.5, 2.5, 4.5], ddof=1)
    expected = np.sqrt((0.5 * within + 0.5 * between) / within)
    assert split_rhat(chains) == pytest.approx(expected, rel=1e-12)
    assert standard_error([1.0, 2.0, 3.0]) == pytest.approx(np.std([1.0, 2.0, 3.0], ddof=1) / np.sqrt(3.0))
