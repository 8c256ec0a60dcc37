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
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import blas, cho_solve, lapack

from vekua.exceptions import InvalidInputException, ShapeMismatchException, SingularSystemException
from vekua.utils import as_vector

logger = logging.getLogger(__name__)

JITTER_RETRIES = 3
JITTER_FACTOR = 10.0


@dataclass(frozen=True)
class RidgeSolution:
    """
    Result of a ridge solve.  `factor` is the lower Cholesky factor of (Phi^T Phi + lam I) in the form `cho_solve`
    takes, so the backward pass reuses it instead of factorizing again.  `lam` is the regularization actually used,
    which is larger than the requested one if jitter retries were needed.
    """

    w: np.ndarray
    residual: np.ndarray
    lam: float
    factor: Tuple[np.ndarray, bool]


class RidgeGradients(NamedTuple):
    grad_Phi: np.ndarray
    grad_y: np.ndarray


class LossGradient(NamedTuple):
    loss: float
    grad_Phi: np.ndarray
    solution: RidgeSolution


def _check_system(Phi, y):
    Phi = np.asarray(Phi, dtype=np.float64)
    if Phi.ndim != 2 or Phi.shape[0] < 1 or Phi.shape[1] < 1:
        raise ShapeMismatchException(f'Design matrix must be a non-empty 2-D array, got shape {Phi.shape}')
    y = as_vector(y, Phi.shape[0], 'y')
    if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(y))):
        raise InvalidInputException('Design matrix and targets must be finite')
    return Phi, y


def _gram(Phi: np.ndarray) -> np.ndarray:
    # lower triangle of Phi^T Phi; the upper triangle is left at zero
    return blas.dsyrk(1.0, Phi.T, lower=1)


def _cholesky(A: np.ndarray) -> Tuple[Optional[np.ndarray], int]:
    """
    Lower Cholesky factor of `A` (only its lower triangle is read), or `(None, pivot)` with the 1-based order of the
    first leading minor that is not positive definite.
    """
    c, info = lapack.dpotrf(A, lower=1, clean=1)
    if info > 0:
        return None, int(info)
    if info < 0:
        raise InvalidInputException(f'Illegal argument {-info} to the Cholesky factorization')
    return c, 0


def _solve(Phi: np.ndarray, y: np.ndarray, lam: float, max_retries: int) -> RidgeSolution:
    gram = _gram(Phi)
    rhs = Phi.T @ y
    eye = np.eye(gram.shape[0])

    trial = float(lam)
    for attempt in range(max_retries + 1):
        c, pivot = _cholesky(gram + trial * eye)
        if c is not None:
            break
        if attempt < max_retries:
            logger.warning(
                'Cholesky failed at pivot %d with lambda=%g; retrying with lambda=%g',
                pivot,
                trial,
                trial * JITTER_FACTOR,
            )
            trial *= JITTER_FACTOR
    else:
        raise SingularSystemException(
            f'Normal matrix is not positive definite (pivot {pivot}) with lambda={trial:g}', pivot, trial
        )

    factor = (c, True)
    w = cho_solve(factor, rhs)
    return RidgeSolution(w, Phi @ w - y, trial, factor)


def ridge_solve(Phi, y, lam: float, max_retries: int = JITTER_RETRIES) -> RidgeSolution:
    """
    Solve (Phi^T Phi + lam I) w = Phi^T y with a Cholesky factorization.

    If the matrix is not numerically positive definite, `lam` is multiplied by 10 and the factorization retried, up to
    `max_retries` times.

    :raises InvalidInputException: When `lam` is not positive or the data is not finite
    :raises SingularSystemException: When every attempt fails; carries the failing pivot and the last `lam` tried
    """
    if not lam > 0:
        raise InvalidInputException(f'Regularization must be positive: {lam}')
    Phi, y = _check_system(Phi, y)
    return _solve(Phi, y, lam, max_retries)


def ridge_vjp(Phi, y, lam: float, sol: RidgeSolution, gbar) -> RidgeGradients:
    """
    Gradients of <gbar, w*> with respect to `Phi` and `y`, by implicit differentiation of the normal equations.

    With u solving (Phi^T Phi + lam I) u = gbar:
        grad_Phi = y u^T - Phi (u w^T + w u^T) = (y - Phi w) u^T - (Phi u) w^T
        grad_y = Phi u

    The factorization stored in `sol` is reused, so the system solved is the one `sol` was factorized with (`sol.lam`,
    which only differs from `lam` after jitter retries).
    """
    Phi, y = _check_system(Phi, y)
    gbar = as_vector(gbar, Phi.shape[1], 'gbar')

    u = cho_solve(sol.factor, gbar)
    Phi_u = Phi @ u
    grad_Phi = np.outer(y - Phi @ sol.w, u)
    grad_Phi -= np.outer(Phi_u, sol.w)
    return RidgeGradients(grad_Phi, Phi_u)


def fit_loss_grad(Phi, y, lam: float, *, validate: bool = True) -> LossGradient:
    """
    Mean squared training residual of the ridge fit, loss = |Phi w* - y|^2 / N, and its total derivative with respect
    to `Phi` (including the dependence of w* on `Phi`).

    With r = Phi w* - y and u solving the regularized system for (2/N) Phi^T r, the derivative is
    r ((2/N) w* - u)^T - (Phi u) w*^T, built from one factorization.

    :param validate: Check shapes, `lam` and finiteness first.  Callers that built `Phi` themselves from checked
        inputs pass `False`.
    """
    if validate:
        if not lam > 0:
            raise InvalidInputException(f'Regularization must be positive: {lam}')
        Phi, y = _check_system(Phi, y)
    n = Phi.shape[0]
    sol = _solve(Phi, y, lam, JITTER_RETRIES)
    r = sol.residual

    u = cho_solve(sol.factor, (2.0 / n) * (Phi.T @ r))
    grad_Phi = np.outer(r, (2.0 / n) * sol.w - u)
    grad_Phi -= np.outer(Phi @ u, sol.w)
    return LossGradient(float(r @ r) / n, grad_Phi, sol)
