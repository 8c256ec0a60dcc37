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
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from vekua.cascade import CascadeModel, predict
from vekua.exceptions import NearSingularDerivativeException

logger = logging.getLogger(__name__)

DERIVATIVE_FLOOR = 1e-3


class DiffusionRecovery(NamedTuple):
    k_hat: np.ndarray
    pde_residual: float


def diffusion_coefficient(x) -> np.ndarray:
    """
    k(x) = 1 + 0.5 sin(pi x)
    """
    return 1.0 + 0.5 * np.sin(math.pi * np.asarray(x, dtype=np.float64))


def manufactured_solution(x) -> np.ndarray:
    """
    u(x) = x + 0.1 sin(2 pi x); u' > 0 on the whole line.
    """
    x = np.asarray(x, dtype=np.float64)
    return x + 0.1 * np.sin(2 * math.pi * x)


def forcing(x) -> np.ndarray:
    """
    f = -(k u')' = -(k' u' + k u'') for the manufactured k and u.
    """
    x = np.asarray(x, dtype=np.float64)
    dk = 0.5 * math.pi * np.cos(math.pi * x)
    du = 1.0 + 0.2 * math.pi * np.cos(2 * math.pi * x)
    d2u = -0.4 * math.pi**2 * np.sin(2 * math.pi * x)
    return -(dk * du + diffusion_coefficient(x) * d2u)


def recover_diffusion(model: Union[CascadeModel, Callable], task, h: float = 1e-4) -> DiffusionRecovery:
    """
    Recover k on the evaluation grid of a 1-D diffusion task from a fitted field.

    Derivatives of the field are central differences of the fitted model with step `h`.  The flux
    F(x) = k(0) u'(0) - int_0^x f is integrated with the trapezoidal rule, and k = F / u'.  The RMS of
    k' u' + k u'' + f is returned as a diagnostic of the second derivative.

    :param model: A `CascadeModel`, or any callable mapping an (N, 1) coordinate array to N values
    :raises NearSingularDerivativeException: When |u'| < 1e-3 at some evaluation point
    """
    if isinstance(model, CascadeModel):

        def evaluate(P):
            return predict(model, P)

    else:
        evaluate = model

    x = task.X_eval[:, 0]

    def field(points):
        return np.asarray(evaluate(points[:, None]), dtype=np.float64).ravel()

    u0, up, um = field(x), field(x + h), field(x - h)
    du = (up - um) / (2 * h)
    d2u = (up - 2 * u0 + um) / h**2

    flat = np.flatnonzero(np.abs(du) < DERIVATIVE_FLOOR)
    if flat.size:
        x_bad = float(x[flat[0]])
        raise NearSingularDerivativeException(f"Fitted u' = {du[flat[0]]:.3e} is near zero at x = {x_bad:g}", x_bad)

    f = np.asarray(task.meta['forcing'], dtype=np.float64)
    flux = task.meta['k0'] * du[0] - cumulative_trapezoid(f, x, initial=0.0)
    k_hat = flux / du

    residual = np.gradient(k_hat, x, edge_order=2) * du + k_hat * d2u + f
    rms = float(np.sqrt(np.mean(residual**2)))
    logger.info('recovered diffusion coefficient on %d points, PDE residual RMS %.3e', x.shape[0], rms)
    return DiffusionRecovery(k_hat, rms)
