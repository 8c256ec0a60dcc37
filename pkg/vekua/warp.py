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

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from vekua.exceptions import InvalidDimensionException, ShapeMismatchException
from vekua.utils import as_coordinates, as_vector, make_rng

HIDDEN_WIDTH = 32
IDENTITY_SCALE = 1e-5
DEFORMING_SCALE = 0.1

_WARP_STREAM = 0


@dataclass(frozen=True)
class WarpParams:
    """
    Weights of the shallow sine network that bends the input coordinates into the latent complex plane.

    `W` is (in_dim, 32), `b` is (32,), `W_out` is (32, 2).  `scale` records the initialization scale the weights
    were drawn with.
    """

    W: np.ndarray
    b: np.ndarray
    W_out: np.ndarray
    scale: float = DEFORMING_SCALE

    def __post_init__(self):
        if self.W.ndim != 2 or self.W.shape[1] != HIDDEN_WIDTH:
            raise ShapeMismatchException(f'W must be (in_dim, {HIDDEN_WIDTH}), got {self.W.shape}')
        if self.b.shape != (HIDDEN_WIDTH,):
            raise ShapeMismatchException(f'b must be ({HIDDEN_WIDTH},), got {self.b.shape}')
        if self.W_out.shape != (HIDDEN_WIDTH, 2):
            raise ShapeMismatchException(f'W_out must be ({HIDDEN_WIDTH}, 2), got {self.W_out.shape}')

    @property
    def in_dim(self) -> int:
        return self.W.shape[0]

    @property
    def size(self) -> int:
        """
        Number of scalar parameters.
        """
        return self.W.size + self.b.size + self.W_out.size


@dataclass(frozen=True)
class LatentPoints:
    z_re: np.ndarray
    z_im: np.ndarray

    def __len__(self) -> int:
        return self.z_re.shape[0]

    def as_complex(self) -> np.ndarray:
        return self.z_re + 1j * self.z_im


@dataclass(frozen=True)
class WarpGradients:
    W: np.ndarray
    b: np.ndarray
    W_out: np.ndarray


def init_warp(seed: int, in_dim: int, is_first: bool) -> WarpParams:
    """
    Draw warp weights from a standard normal scaled by 1e-5 for the first block of a cascade (an almost exact identity
    map) and by 0.1 for later blocks.  The bias starts at zero.

    Draw order is `W` row-major, then `W_out` row-major, from one stream of `seed`.

    :raises InvalidDimensionException: When `in_dim` < 1
    """
    if in_dim < 1:
        raise InvalidDimensionException(f'Input dimension must be positive: {in_dim}')

    scale = IDENTITY_SCALE if is_first else DEFORMING_SCALE
    rng = make_rng(seed, _WARP_STREAM)
    W = rng.standard_normal((in_dim, HIDDEN_WIDTH)) * scale
    W_out = rng.standard_normal((HIDDEN_WIDTH, 2)) * scale
    return WarpParams(W, np.zeros(HIDDEN_WIDTH), W_out, scale)


class WarpTape(NamedTuple):
    """
    Intermediates of one forward pass, kept so the backward pass does not repeat them.
    """

    X: np.ndarray
    pre: np.ndarray
    h: np.ndarray
    z: LatentPoints


def _latent(X: np.ndarray, uv: np.ndarray) -> LatentPoints:
    if X.shape[1] >= 2:
        return LatentPoints(X[:, 0] + uv[:, 0], X[:, 1] + uv[:, 1])
    return LatentPoints(uv[:, 0].copy(), uv[:, 1].copy())


def warp_forward_tape(p: WarpParams, X) -> WarpTape:
    X = as_coordinates(X, p.in_dim)
    pre = X @ p.W + p.b
    h = np.sin(pre)
    return WarpTape(X, pre, h, _latent(X, h @ p.W_out))


def warp_forward(p: WarpParams, X) -> LatentPoints:
    """
    Map coordinates to latent points z = (x1 + u(x)) + i(x2 + v(x)), where (u, v) = sin(X W + b) W_out.

    Only the first two coordinates get the identity term.  One-dimensional input has no identity term at all, so the
    latent point is (u, v) alone.
    """
    return warp_forward_tape(p, X).z


def warp_backward_tape(p: WarpParams, tape: WarpTape, g_re: np.ndarray, g_im: np.ndarray) -> WarpGradients:
    g_uv = np.stack([g_re, g_im], axis=1)
    grad_W_out = tape.h.T @ g_uv
    g_pre = g_uv @ p.W_out.T
    g_pre *= np.cos(tape.pre)
    return WarpGradients(tape.X.T @ g_pre, g_pre.sum(axis=0), grad_W_out)


def warp_backward(p: WarpParams, X, g_re, g_im) -> WarpGradients:
    """
    Vector-Jacobian product of `warp_forward` with respect to the warp weights, given the loss gradient with respect
    to the real and imaginary parts of the latent points.
    """
    tape = warp_forward_tape(p, X)
    n = tape.X.shape[0]
    return warp_backward_tape(p, tape, as_vector(g_re, n, 'g_re'), as_vector(g_im, n, 'g_im'))
