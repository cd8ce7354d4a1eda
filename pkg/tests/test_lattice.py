"""Tests for lattice enumeration and Sobolev weights."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sobolev.core import lattice
from sobolev.core.lattice import (
    LatticeSpec,
    enumerate_lattice,
    lattice_array,
    negation_half_space,
    sobolev_weight,
    sobolev_weights,
)
from sobolev.errors import InvalidSpecError


class TestLatticeSpec:
    def test_size_and_shape(self) -> None:
        spec = LatticeSpec(dimension=3, zn=2)
        assert spec.side == 5
        assert spec.shape == (5, 5, 5)
        assert spec.size == 125

    @pytest.mark.parametrize(
        ("dimension", "zn", "s"),
        [(0, 1, 0.0), (1, -1, 0.0), (1, 1, -0.5), (1, 1, float("nan"))],
    )
    def test_invalid_spec_raises(self, dimension: int, zn: int, s: float) -> None:
        with pytest.raises(InvalidSpecError):
            LatticeSpec(dimension, zn, s)

    def test_index_of_matches_enumeration(self) -> None:
        spec = LatticeSpec(dimension=2, zn=2)
        for i, z in enumerate(enumerate_lattice(spec)):
            assert spec.index_of(z) == i
        assert spec.index_of((0, 0)) == 12

    def test_index_outside_radius_raises(self) -> None:
        with pytest.raises(InvalidSpecError, match="outside"):
            LatticeSpec(dimension=1, zn=1).index_of((2,))

    def test_same_lattice_ignores_order(self) -> None:
        spec = LatticeSpec(2, 3, 0.0)
        assert spec.same_lattice(spec.with_order(1.5))
        assert not spec.same_lattice(LatticeSpec(2, 2, 0.0))


class TestEnumerate:
    def test_one_dimension(self) -> None:
        assert enumerate_lattice(LatticeSpec(1, 1)) == [(-1,), (0,), (1,)]

    def test_lexicographic_order(self) -> None:
        points = enumerate_lattice(LatticeSpec(2, 1))
        assert len(points) == 9
        assert points[0] == (-1, -1)
        assert points[1] == (-1, 0)
        assert points[-1] == (1, 1)
        assert points == sorted(points)

    def test_zero_radius_is_origin(self) -> None:
        assert enumerate_lattice(LatticeSpec(3, 0)) == [(0, 0, 0)]

    def test_array_matches_enumeration(self) -> None:
        spec = LatticeSpec(3, 2)
        arr = lattice_array(spec)
        assert arr.shape == (125, 3)
        assert [tuple(int(c) for c in row) for row in arr] == enumerate_lattice(spec)


class TestWeights:
    def test_integer_order(self) -> None:
        assert sobolev_weight((2, 3), 1) == 36.0
        assert sobolev_weight((-2,), 2) == 16.0

    def test_zero_coordinate_vanishes_for_positive_order(self) -> None:
        assert sobolev_weight((0, 3), 1) == 0.0
        assert sobolev_weight((0, 3), 0.5) == 0.0

    def test_zero_to_the_zero_is_one(self) -> None:
        assert sobolev_weight((0, 0), 0) == 1.0

    def test_fractional_order(self) -> None:
        assert sobolev_weight((4,), 0.25) == pytest.approx(2.0, rel=1e-14)
        assert sobolev_weight((3,), 0.5) == 3.0

    def test_negative_order_raises(self) -> None:
        with pytest.raises(InvalidSpecError):
            sobolev_weight((1,), -1)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.5])
    def test_symmetric_under_negation(self, s: float) -> None:
        for z in enumerate_lattice(LatticeSpec(2, 3, s)):
            assert sobolev_weight(z, s) == sobolev_weight(tuple(-c for c in z), s)

    def test_overflow_is_infinite(self) -> None:
        assert sobolev_weight((10,), 200) == math.inf
        assert sobolev_weight((10**30,), 8) == math.inf

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 1.3, 2.0])
    def test_vector_matches_scalar(self, s: float) -> None:
        spec = LatticeSpec(2, 3, s)
        expected = [sobolev_weight(z, s) for z in enumerate_lattice(spec)]
        np.testing.assert_allclose(sobolev_weights(spec), expected, rtol=1e-13)

    def test_explicit_order_overrides_spec(self) -> None:
        spec = LatticeSpec(1, 2, 0.0)
        np.testing.assert_array_equal(sobolev_weights(spec, 1.0), [4.0, 1.0, 0.0, 1.0, 4.0])


class TestFrequencySets:
    def test_order_zero_drops_origin_only(self) -> None:
        freqs = lattice.test_frequency_set(LatticeSpec(1, 2, 0.0))
        assert freqs == [(-2,), (-1,), (1,), (2,)]

    def test_positive_order_drops_zero_coordinates(self) -> None:
        freqs = lattice.test_frequency_set(LatticeSpec(2, 1, 1.0))
        assert sorted(freqs) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]

    def test_closed_under_negation(self) -> None:
        freqs = set(lattice.test_frequency_set(LatticeSpec(2, 2, 0.0)))
        assert freqs == {tuple(-c for c in z) for z in freqs}

    def test_zero_radius_raises(self) -> None:
        with pytest.raises(InvalidSpecError):
            lattice.test_frequency_set(LatticeSpec(1, 0, 0.0))

    def test_half_space_keeps_one_of_each_pair(self) -> None:
        freqs = lattice.test_frequency_set(LatticeSpec(2, 2, 0.0))
        half = negation_half_space(freqs)
        assert len(half) * 2 == len(freqs)
        for z in half:
            assert tuple(-c for c in z) not in half
