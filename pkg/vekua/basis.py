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

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from vekua.exceptions import InvalidDimensionException, InvalidInputException, ShapeMismatchException
from vekua.utils import as_vector, make_rng
from vekua.warp import LatentPoints

DEFAULT_BANK_SIZE = 24

_MAGNITUDE_STREAM = 1
_PHASE_STREAM = 2

# (N, 4K) feature matrix, columns [sin | cos | |z| sin | |z| cos], each K wide.
BasisMatrix = np.ndarray


@dataclass(frozen=True)
class FrequencyBank:
    """
    K complex spectral frequencies, kept as separate real and imaginary parts.
    """

    omega_re: np.ndarray
    omega_im: np.ndarray

    def __post_init__(self):
        if self.omega_re.ndim != 1 or self.omega_re.shape != self.omega_im.shape:
            raise ShapeMismatchException(
                f'Frequency parts must be equal-length vectors: {self.omega_re.shape} vs {self.omega_im.shape}'
            )
        if self.omega_re.shape[0] == 0:
            raise InvalidDimensionException('A frequency bank needs at least one frequency')
        if np.any(np.hypot(self.omega_re, self.omega_im) == 0):
            raise InvalidInputException('Frequencies must have non-zero magnitude')

    @property
    def K(self) -> int:
        return self.omega_re.shape[0]

    @property
    def width(self) -> int:
        """
        Number of basis columns this bank produces.
        """
        return 4 * self.K

    @property
    def magnitudes(self) -> np.ndarray:
        return np.hypot(self.omega_re, self.omega_im)


@dataclass(frozen=True)
class BasisGradients:
    z_re: np.ndarray
    z_im: np.ndarray
    omega_re: np.ndarray
    omega_im: np.ndarray


def init_frequencies(seed: int, K: int, freq_scale: float) -> FrequencyBank:
    """
    Draw magnitudes uniformly from [freq_scale / 2, 1.5 freq_scale] and phases uniformly from [0, 2 pi), each from its
    own stream of `seed`.

    :raises InvalidDimensionException: When `K` < 1
    :raises InvalidInputException: When `freq_scale` is not positive
    """
    if K < 1:
        raise InvalidDimensionException(f'Bank size must be positive: {K}')
    if not freq_scale > 0:
        raise InvalidInputException(f'Frequency scale must be positive: {freq_scale}')

    r = make_rng(seed, _MAGNITUDE_STREAM).uniform(freq_scale / 2, freq_scale * 1.5, K)
    theta = make_rng(seed, _PHASE_STREAM).uniform(0.0, 2 * math.pi, K)
    return FrequencyBank(r * np.cos(theta), r * np.sin(theta))


def _check_latent(z: LatentPoints) -> int:
    n = z.z_re.shape[0]
    as_vector(z.z_re, name='z_re')
    as_vector(z.z_im, n, 'z_im')
    return n


def _phase(bank: FrequencyBank, z: LatentPoints) -> np.ndarray:
    # Re(z * conj(omega))
    return np.outer(z.z_re, bank.omega_re) + np.outer(z.z_im, bank.omega_im)


class BasisTape(NamedTuple):
    """
    Feature matrix together with the sine and cosine blocks (views into `Phi`) and the moduli it was built from.
    """

    Phi: BasisMatrix
    s: np.ndarray
    c: np.ndarray
    m: np.ndarray


def basis_forward_tape(bank: FrequencyBank, z: LatentPoints) -> BasisTape:
    n = _check_latent(z)
    K = bank.K
    Phi = np.empty((n, 4 * K))
    s, c = Phi[:, :K], Phi[:, K : 2 * K]
    a = _phase(bank, z)
    np.sin(a, out=s)
    np.cos(a, out=c)
    m = np.hypot(z.z_re, z.z_im)
    np.multiply(m[:, None], s, out=Phi[:, 2 * K : 3 * K])
    np.multiply(m[:, None], c, out=Phi[:, 3 * K :])
    return BasisTape(Phi, s, c, m)


def basis_features(bank: FrequencyBank, z: LatentPoints) -> BasisMatrix:
    """
    Evaluate the feature bank at the latent points.

    For frequency k and point n, with a = Re(z_n conj(omega_k)) and m = |z_n|, the row holds sin(a), cos(a),
    m sin(a) and m cos(a), laid out in four K-wide blocks.
    """
    return basis_forward_tape(bank, z).Phi


def basis_backward_tape(bank: FrequencyBank, z: LatentPoints, tape: BasisTape, G: np.ndarray) -> BasisGradients:
    K = bank.K
    s, c, m = tape.s, tape.c, tape.m
    g_s, g_c, g_ms, g_mc = (G[:, i * K : (i + 1) * K] for i in range(4))

    g_a = g_ms * m[:, None]
    g_a += g_s
    g_a *= c
    t = g_mc * m[:, None]
    t += g_c
    t *= s
    g_a -= t
    g_m = np.einsum('ij,ij->i', g_ms, s) + np.einsum('ij,ij->i', g_mc, c)

    # d|z| is taken to be 0 at z = 0
    safe_m = np.where(m > 0, m, 1.0)
    dm_re = np.where(m > 0, z.z_re / safe_m, 0.0)
    dm_im = np.where(m > 0, z.z_im / safe_m, 0.0)

    return BasisGradients(
        z_re=g_a @ bank.omega_re + g_m * dm_re,
        z_im=g_a @ bank.omega_im + g_m * dm_im,
        omega_re=z.z_re @ g_a,
        omega_im=z.z_im @ g_a,
    )


def basis_backward(bank: FrequencyBank, z: LatentPoints, upstream) -> BasisGradients:
    """
    Vector-Jacobian product of `basis_features` with respect to the latent points and the frequencies.

    The derivative of |z| at z = 0 is taken to be 0.
    """
    tape = basis_forward_tape(bank, z)
    G = np.asarray(upstream, dtype=np.float64)
    if G.shape != tape.Phi.shape:
        raise ShapeMismatchException(f'Upstream gradient must be {tape.Phi.shape}, got {G.shape}')
    return basis_backward_tape(bank, z, tape, G)
