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

from vekua.exceptions import InvalidInputException, ShapeMismatchException


def mse(pred, truth) -> float:
    """
    Mean of the squared differences.

    :raises InvalidInputException: When the vectors are empty
    :raises ShapeMismatchException: When the lengths differ
    """
    pred = np.asarray(pred, dtype=np.float64).ravel()
    truth = np.asarray(truth, dtype=np.float64).ravel()
    if pred.shape != truth.shape:
        raise ShapeMismatchException(f'Cannot compare {pred.shape[0]} predictions with {truth.shape[0]} values')
    if pred.size == 0:
        raise InvalidInputException('Mean squared error of empty vectors is undefined')
    return float(np.mean((pred - truth) ** 2))
