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


class InvalidDimensionException(Exception):
    """
    A dimension or size that must be positive is not (input dimension, bank size, ...).
    """

    def __init__(self, msg):
        super().__init__(msg)


class ShapeMismatchException(Exception):
    """
    The shapes of two operands do not agree.
    """

    def __init__(self, msg):
        super().__init__(msg)


class InvalidInputException(Exception):
    """
    A value is outside the domain the operation accepts (non-finite data, non-positive
    regularization, empty vectors, ...).
    """

    def __init__(self, msg):
        super().__init__(msg)


class SingularSystemException(Exception):
    """
    The regularized normal matrix could not be factorized, even after increasing the regularization.
    """

    def __init__(self, msg, pivot: int, lam: float):
        super().__init__(msg)
        self.pivot = pivot
        self.lam = lam


class BlockTrainingException(Exception):
    """
    Training one block of a cascade failed.  The original error is chained as `__cause__`.
    """

    def __init__(self, msg, block_index: int):
        super().__init__(msg)
        self.block_index = block_index


class NearSingularDerivativeException(Exception):
    """
    The first derivative of a fitted field is too close to zero to divide by.
    """

    def __init__(self, msg, x: float):
        super().__init__(msg)
        self.x = x


class ConfigurationException(Exception):
    """
    The run configuration (flags or config file) is not valid.
    """

    def __init__(self, msg):
        super().__init__(msg)


class ModelFormatException(Exception):
    """
    A saved model cannot be read.
    """

    def __init__(self, msg):
        super().__init__(msg)


class InsufficientSamplesWarning(UserWarning):
    """
    Fewer samples than basis columns; the ridge solve is underdetermined and leans on the regularization.
    """
