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

from vekua.utils import as_coordinates

# Modified (higher contrast) Shepp-Logan phantom, as tabulated by P. Toft, "The Radon Transform - Theory and
# Implementation", 1996, and used by MATLAB's `phantom`.  Rows are
# (intensity, semi-axis a, semi-axis b, centre x0, centre y0, rotation in degrees).
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


def ellipse_mask(X, a, b, x0, y0, phi_degrees) -> np.ndarray:
    """
    Which points of `X` (N x 2) lie inside the ellipse, boundary included.
    """
    X = as_coordinates(X, 2)
    phi = np.radians(phi_degrees)
    dx, dy = X[:, 0] - x0, X[:, 1] - y0
    u = dx * np.cos(phi) + dy * np.sin(phi)
    v = -dx * np.sin(phi) + dy * np.cos(phi)
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def shepp_logan(X) -> np.ndarray:
    """
    Phantom intensity at each point of `X`: the sum of the intensities of every ellipse containing it.
    """
    X = as_coordinates(X, 2)
    values = np.zeros(X.shape[0])
    for intensity, a, b, x0, y0, phi in SHEPP_LOGAN_ELLIPSES:
        values[ellipse_mask(X, a, b, x0, y0, phi)] += intensity
    return values
