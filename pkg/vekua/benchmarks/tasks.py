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

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from vekua.basis import DEFAULT_BANK_SIZE
from vekua.benchmarks.diffusion import diffusion_coefficient, forcing, manufactured_solution
from vekua.benchmarks.phantom import shepp_logan
from vekua.exceptions import InsufficientSamplesWarning, InvalidInputException
from vekua.utils import as_coordinates, lattice, make_rng

logger = logging.getLogger(__name__)

_NOISE_STREAM = 10
_SAMPLE_STREAM = 11


@dataclass(frozen=True)
class AffineMap:
    """
    Per-axis affine map from a physical box [lower, upper] onto [-1, 1]^d.
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def to_unit(self, P) -> np.ndarray:
        lower, upper = np.asarray(self.lower), np.asarray(self.upper)
        return 2.0 * (as_coordinates(P, len(self.lower)) - lower) / (upper - lower) - 1.0

    def to_physical(self, U) -> np.ndarray:
        lower, upper = np.asarray(self.lower), np.asarray(self.upper)
        return lower + (as_coordinates(U, len(self.lower)) + 1.0) * (upper - lower) / 2.0


@dataclass(frozen=True)
class TaskData:
    """
    Training sample and clean evaluation grid of one benchmark task.

    `eval_shape` is the lattice shape of `X_eval` (row-major), used to lay out rasters.
    """

    task_id: str
    X_train: np.ndarray
    y_train: np.ndarray
    X_eval: np.ndarray
    y_eval_clean: np.ndarray
    eval_shape: Tuple[int, ...]
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def in_dim(self) -> int:
        return self.X_train.shape[1]


def _noise(seed: int, sigma: float, n: int) -> np.ndarray:
    return make_rng(seed, _NOISE_STREAM).normal(0.0, sigma, n)


def helmholtz_field(X) -> np.ndarray:
    """
    sin(20x) cos(20y) + 0.5 sin(5x) sin(5y)
    """
    X = as_coordinates(X, 2)
    x, y = X[:, 0], X[:, 1]
    return np.sin(20 * x) * np.cos(20 * y) + 0.5 * np.sin(5 * x) * np.sin(5 * y)


def chirp_field(x) -> np.ndarray:
    return np.sin(30 * np.asarray(x, dtype=np.float64) ** 2)


def tgv_velocity(x, y, t, viscosity: float) -> np.ndarray:
    """
    x-velocity of the decaying Taylor-Green vortex, cos(x) sin(y) exp(-2 nu t).
    """
    return np.cos(x) * np.sin(y) * np.exp(-2.0 * viscosity * np.asarray(t))


def gen_helmholtz(seed: int, n_grid: int = 128) -> TaskData:
    """
    Task A: a high-frequency wave field with a low-frequency component on [-1, 1]^2, with Gaussian noise of 10% of the
    field's standard deviation added to the training targets.
    """
    if n_grid < 32:
        raise InvalidInputException(f'Helmholtz grid needs at least 32 points per side, got {n_grid}')
    axis = np.linspace(-1.0, 1.0, n_grid)
    grid = lattice([axis, axis])
    clean = helmholtz_field(grid.points)
    sigma = 0.1 * float(np.std(clean))
    noisy = clean + _noise(seed, sigma, clean.shape[0])
    return TaskData('A', grid.points, noisy, grid.points, clean, grid.shape, {'noise_sigma': sigma})


def gen_phantom(
    seed: int, n_grid: int = 128, sample_frac: float = 0.02, min_samples: int = 4 * DEFAULT_BANK_SIZE
) -> TaskData:
    """
    Task B: the Shepp-Logan phantom on [-1, 1]^2, observed noise-free at a random `sample_frac` of the lattice pixels.

    Warns with `InsufficientSamplesWarning` when fewer than `min_samples` pixels are drawn.
    """
    if not 0 < sample_frac <= 1:
        raise InvalidInputException(f'Sample fraction must be in (0, 1], got {sample_frac}')
    if n_grid < 2:
        raise InvalidInputException(f'Phantom grid needs at least 2 points per side, got {n_grid}')
    axis = np.linspace(-1.0, 1.0, n_grid)
    grid = lattice([axis, axis])
    image = shepp_logan(grid.points)

    n_samples = math.ceil(sample_frac * grid.points.shape[0])
    if n_samples < min_samples:
        warnings.warn(
            f'Only {n_samples} phantom samples for {min_samples} basis columns',
            InsufficientSamplesWarning,
            stacklevel=2,
        )
    rows = np.sort(make_rng(seed, _SAMPLE_STREAM).choice(grid.points.shape[0], size=n_samples, replace=False))
    meta = {'sample_frac': sample_frac, 'sample_rows': rows}
    return TaskData('B', grid.points[rows], image[rows], grid.points, image, grid.shape, meta)


def gen_inverse_diffusion(seed: int, n_pts: int = 512, n_eval: int = 4096) -> TaskData:
    """
    Task C: noisy observations of the manufactured solution u of -(k u')' = f on [0, 1], for recovering k.

    The targets carry Gaussian noise of 1% of std(u).  `meta` holds k(0), f and the true k on the evaluation grid.
    """
    if n_pts < 64:
        raise InvalidInputException(f'Inverse diffusion needs at least 64 points, got {n_pts}')
    if n_eval < 2:
        raise InvalidInputException(f'Evaluation grid needs at least 2 points, got {n_eval}')
    x = np.linspace(0.0, 1.0, n_pts)
    x_eval = np.linspace(0.0, 1.0, n_eval)
    clean = manufactured_solution(x)
    sigma = 0.01 * float(np.std(clean))
    meta = {
        'noise_sigma': sigma,
        'k0': float(diffusion_coefficient(0.0)),
        'forcing': forcing(x_eval),
        'k_true': diffusion_coefficient(x_eval),
    }
    return TaskData(
        'C',
        x[:, None],
        clean + _noise(seed, sigma, n_pts),
        x_eval[:, None],
        manufactured_solution(x_eval),
        (n_eval,),
        meta,
    )


def gen_chirp(seed: int, n_pts: int = 2048) -> TaskData:
    """
    Task D: the chirp sin(30 x^2) on [0, 1], whose local frequency grows linearly, with 10% Gaussian noise.
    """
    if n_pts < 64:
        raise InvalidInputException(f'Chirp needs at least 64 points, got {n_pts}')
    x = np.linspace(0.0, 1.0, n_pts)
    clean = chirp_field(x)
    sigma = 0.1 * float(np.std(clean))
    noisy = clean + _noise(seed, sigma, n_pts)
    return TaskData('D', x[:, None], noisy, x[:, None], clean, (n_pts,), {'noise_sigma': sigma})


def gen_tgv(seed: int, n_grid_xy: int = 32, n_t: int = 8, viscosity: float = 0.1) -> TaskData:
    """
    Task E: x-velocity of the Taylor-Green vortex over (x, y, t) in [0, 2 pi]^2 x [0, 1], noise-free.

    Coordinates are mapped onto [-1, 1]^3; the map is `meta['normalizer']`.
    """
    if n_grid_xy < 16 or n_t < 4:
        raise InvalidInputException(
            f'Taylor-Green lattice needs at least 16x16x4 points, got {n_grid_xy}x{n_grid_xy}x{n_t}'
        )
    axis = np.linspace(0.0, 2 * math.pi, n_grid_xy)
    grid = lattice([axis, axis, np.linspace(0.0, 1.0, n_t)])
    P = grid.points
    clean = tgv_velocity(P[:, 0], P[:, 1], P[:, 2], viscosity)

    normalizer = AffineMap((0.0, 0.0, 0.0), (2 * math.pi, 2 * math.pi, 1.0))
    X = normalizer.to_unit(P)
    meta = {'viscosity': viscosity, 'normalizer': normalizer, 'seed': seed}
    return TaskData('E', X, clean.copy(), X, clean, grid.shape, meta)


TASK_GENERATORS = {
    'A': gen_helmholtz,
    'B': gen_phantom,
    'C': gen_inverse_diffusion,
    'D': gen_chirp,
    'E': gen_tgv,
}


def generate_task(task_id: str, seed: int, **sizes) -> TaskData:
    """
    Generate task `task_id` (A-E) with its default desk-scale sizes, overridable by keyword.

    :raises KeyError: When no task has that id
    """
    try:
        generator = TASK_GENERATORS[task_id]
    except KeyError:
        raise KeyError('No task named "%s" exists' % task_id)
    logger.info('generating task %s (%s) with seed %d', task_id, generator.__name__, seed)
    return generator(seed, **sizes)
