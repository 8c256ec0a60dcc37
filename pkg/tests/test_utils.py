"""
vekua-cascade: Warped analytic bases with a differentiable ridge solver
Copyright (C) 2026 The vekua-cascade developers

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program. If not, see <http://www.gnu.org/licenses/>.
"""

import numpy as np
import pytest

from vekua.exceptions import InvalidInputException, ShapeMismatchException
from vekua.utils import as_coordinates, as_vector, derive_seed, format_float, lattice, make_rng


class TestRandomStreams:
    def test_same_seed_and_stream_repeat(self):
        assert np.array_equal(make_rng(3, 1).normal(size=5), make_rng(3, 1).normal(size=5))

    def test_streams_differ(self):
        assert not np.array_equal(make_rng(3, 1).normal(size=5), make_rng(3, 2).normal(size=5))
        assert not np.array_equal(make_rng(3).normal(size=5), make_rng(4).normal(size=5))

    def test_derived_seeds(self):
        assert derive_seed(0, 1) == derive_seed(0, 1)
        assert len({derive_seed(0, l) for l in range(1, 10)}) == 9
        assert derive_seed(0, 1) >= 0

    def test_negative_seed_raises_InvalidInputException(self):
        with pytest.raises(InvalidInputException):
            make_rng(-1)
        with pytest.raises(InvalidInputException):
            derive_seed(0, -2)


class TestCoordinates:
    def test_vector_becomes_column(self):
        assert as_coordinates([0.0, 0.5, 1.0]).shape == (3, 1)

    def test_matrix_is_kept(self):
        X = as_coordinates([[1, 2], [3, 4]], 2)
        assert X.dtype == np.float64
        assert X.shape == (2, 2)

    def test_wrong_column_count_raises_ShapeMismatchException(self):
        with pytest.raises(ShapeMismatchException):
            as_coordinates(np.zeros((3, 2)), 3)

    def test_three_dimensional_array_raises_ShapeMismatchException(self):
        with pytest.raises(ShapeMismatchException):
            as_coordinates(np.zeros((2, 2, 2)))

    def test_non_finite_raises_InvalidInputException(self):
        with pytest.raises(InvalidInputException):
            as_coordinates([[0.0, np.inf]])

    def test_vector_length(self):
        assert as_vector([1, 2, 3], 3).tolist() == [1.0, 2.0, 3.0]
        with pytest.raises(ShapeMismatchException):
            as_vector([1, 2, 3], 2)
        with pytest.raises(ShapeMismatchException):
            as_vector(np.zeros((2, 2)))


class TestLattice:
    def test_last_axis_varies_fastest(self):
        x, y = np.array([0.0, 1.0]), np.array([10.0, 20.0, 30.0])
        grid = lattice([x, y])
        assert grid.shape == (2, 3)
        assert grid.points.tolist() == [[0, 10], [0, 20], [0, 30], [1, 10], [1, 20], [1, 30]]

    def test_three_axes(self):
        grid = lattice([np.arange(2.0), np.arange(3.0), np.arange(4.0)])
        assert grid.points.shape == (24, 3)
        assert grid.points[1 * 12 + 2 * 4 + 3].tolist() == [1, 2, 3]


def test_format_float_round_trips():
    for value in (0.1, 1 / 3, 1e-300, -2.5e17, 5e-324):
        assert float(format_float(value)) == value
    assert format_float(np.float64(0.5)) == '0.5'
