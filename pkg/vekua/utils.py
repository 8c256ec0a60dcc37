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

from typing import NamedTuple, Sequence, Tuple

import numpy as np

from vekua.exceptions import InvalidInputException, ShapeMismatchException


class Lattice(NamedTuple):
    points: np.ndarray
    shape: Tuple[int, ...]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    A counter-based (Philox) generator for `seed` and an optional stream path.  Different streams of the same seed are
    statistically independent.

    Raises `InvalidInputException` when `seed` or a stream id is negative.
    """
    if seed < 0 or any(s < 0 for s in stream):
        raise InvalidInputException(f'Seeds must be non-negative: {(seed, *stream)}')
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


def derive_seed(seed: int, *stream: int) -> int:
    """
    Derive a child integer seed, e.g. one per cascade block.
    """
    if seed < 0 or any(s < 0 for s in stream):
        raise InvalidInputException(f'Seeds must be non-negative: {(seed, *stream)}')
    return int(np.random.SeedSequence([seed, *stream]).generate_state(1, dtype=np.uint32)[0])


def as_coordinates(X, in_dim: int = None) -> np.ndarray:
    """
    Coerce `X` to a finite float64 matrix of shape (N, d).  A 1-D input is read as N points in one dimension.

    :raises ShapeMismatchException: When `in_dim` is given and the number of columns differs
    :raises InvalidInputException: When any coordinate is not finite
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeMismatchException(f'Coordinates must be a 2-D array, got shape {X.shape}')
    if in_dim is not None and X.shape[1] != in_dim:
        raise ShapeMismatchException(f'Expected {in_dim} coordinate columns, got {X.shape[1]}')
    if not np.all(np.isfinite(X)):
        raise InvalidInputException('Coordinates must be finite')
    return X


def as_vector(v, length: int = None, name: str = 'vector') -> np.ndarray:
    """
    Coerce `v` to a 1-D float64 array, optionally of a required length.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeMismatchException(f'{name} must be 1-D, got shape {v.shape}')
    if length is not None and v.shape[0] != length:
        raise ShapeMismatchException(f'{name} must have length {length}, got {v.shape[0]}')
    return v


def lattice(axes: Sequence[np.ndarray]) -> Lattice:
    """
    Cartesian product of 1-D axes, flattened row-major (the last axis varies fastest).

    Example: `lattice([x, y]).points[i * len(y) + j] == (x[i], y[j])`
    """
    grids = np.meshgrid(*axes, indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)
    return Lattice(points, tuple(len(a) for a in axes))


def format_float(value: float) -> str:
    """
    Shortest decimal text that reads back to the identical float64.
    """
    return repr(float(value))
