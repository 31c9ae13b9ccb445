import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.field import BoundaryData, LatticeField, MacroProfile, PinningSet, as_pins, variable_sites
from utils.errors import DomainError

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_boundary_needs_both_right_values():
    with pytest.raises(DomainError):
        BoundaryData(1.0, 0.0, b=1.0)


@pytest.mark.parametrize("value", [math.inf, -math.inf, math.nan])
def test_boundary_rejects_non_finite(value):
    with pytest.raises(DomainError):
        BoundaryData.dirichlet(0.0, value, 0.0, 0.0)


def test_boundary_kinds():
    assert BoundaryData.free(1, 2).free_right
    assert not BoundaryData.zero().free_right
    assert BoundaryData.zero().is_zero
    assert BoundaryData.free(0, 0).is_zero
    assert BoundaryData.dirichlet(1, 2, 1, -2).is_symmetric
    assert not BoundaryData.dirichlet(1, 2, 1, 2).is_symmetric


def test_mirror_swaps_and_flips_slopes():
    assert BoundaryData.dirichlet(1, 2, 3, 4).mirror() == BoundaryData.dirichlet(3, -4, 1, -2)
    with pytest.raises(DomainError):
        BoundaryData.free(1, 2).mirror()


@given(finite, finite, finite, finite)
def test_mirror_is_an_involution(a, alpha, b, beta):
    bc = BoundaryData.dirichlet(a, alpha, b, beta)
    assert bc.mirror().mirror() == bc


def test_boundary_slots_scale_with_N():
    bc = BoundaryData.dirichlet(1.0, 2.0, 1.0, 2.0)
    assert bc.left_slots(10) == (80.0, 100.0)
    assert bc.right_slots(10) == (100.0, 120.0)
    with pytest.raises(DomainError):
        BoundaryData.free(1.0, 2.0).right_slots(10)


def test_pinning_set_is_sorted_and_strict():
    assert PinningSet.of([5, 2, 2, 9]).sites == (2, 5, 9)
    with pytest.raises(DomainError):
        PinningSet((3, 3))
    with pytest.raises(DomainError):
        PinningSet((0, 1))


def test_pinning_set_from_mask():
    assert PinningSet.from_mask(0b101).sites == (1, 3)
    assert PinningSet.from_mask(0).sites == ()


def test_pinning_set_validation_depends_on_right_boundary():
    pins = PinningSet.of([1, 5])
    with pytest.raises(DomainError):
        pins.validate(5)
    assert pins.validate(5, free_right=True) is pins
    with pytest.raises(DomainError):
        PinningSet.of([7]).validate(5, free_right=True)


def test_as_pins_accepts_iterables_and_none():
    assert as_pins(None).sites == ()
    assert as_pins([4, 1]).sites == (1, 4)
    pins = PinningSet.of([2])
    assert as_pins(pins) is pins


def test_variable_sites():
    assert variable_sites(4).tolist() == [1, 2, 3]
    assert variable_sites(4, free_right=True).tolist() == [1, 2, 3, 4, 5]


def test_lattice_field_layout():
    bc = BoundaryData.dirichlet(1.0, 2.0, 0.5, -1.0)
    field = LatticeField.from_boundary(4, bc, interior=[7.0, 8.0, 9.0])
    assert field[-1] == 16.0 - 8.0
    assert field[0] == 16.0
    assert field.sites(1, 3).tolist() == [7.0, 8.0, 9.0]
    assert field[4] == 8.0
    assert field[5] == 8.0 - 4.0
    assert field.laplacians().shape == (5,)
    with pytest.raises(IndexError):
        field[6]


def test_lattice_field_is_read_only():
    field = LatticeField(2, np.zeros(5))
    with pytest.raises(ValueError):
        field.values[2] = 1.0


def test_lattice_field_rejects_bad_shapes_and_slots():
    with pytest.raises(DomainError):
        LatticeField(3, np.zeros(5))
    values = np.zeros(6)
    values[0] = math.nan
    with pytest.raises(DomainError):
        LatticeField(3, values)


def test_macro_profile_distance_and_extension():
    first = MacroProfile(4, [0.0, 1.0, 2.0, 1.0, 0.0])
    second = MacroProfile(4, [0.0, 0.5, 2.5, 1.0, 0.0], left_ext=0.0, right_ext=0.0)
    assert first.sup_distance(second) == 0.5
    assert first(0.125) == pytest.approx(0.5)
    assert second.extended_values().shape == (7,)
    with pytest.raises(DomainError):
        first.extended_values()
    with pytest.raises(DomainError):
        first.sup_distance(MacroProfile(2, [0.0, 0.0, 0.0]))
