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
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from vekua.basis import (
    DEFAULT_BANK_SIZE,
    FrequencyBank,
    basis_backward_tape,
    basis_features,
    basis_forward_tape,
    init_frequencies,
)
from vekua.exceptions import (
    BlockTrainingException,
    ConfigurationException,
    InvalidDimensionException,
    InvalidInputException,
    ModelFormatException,
    NearSingularDerivativeException,
    ShapeMismatchException,
    SingularSystemException,
)
from vekua.solver import RidgeSolution, fit_loss_grad, ridge_solve
from vekua.utils import as_coordinates, as_vector, derive_seed, make_rng
from vekua.warp import HIDDEN_WIDTH, WarpParams, init_warp, warp_backward_tape, warp_forward, warp_forward_tape

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# held-out selection searches lam * 10**k for k = 0 .. HOLDOUT_LAMBDA_DECADES
HOLDOUT_LAMBDA_DECADES = 8

_BATCH_STREAM = 3
_HOLDOUT_STREAM = 4

# every package error a block can raise while training
_BLOCK_FAILURES = (
    ConfigurationException,
    InvalidDimensionException,
    InvalidInputException,
    ModelFormatException,
    NearSingularDerivativeException,
    ShapeMismatchException,
    SingularSystemException,
)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters for growing a cascade.  One block is trained per entry of `freq_schedule`.

    `batch_size=None` trains on the full sample at every step.

    `holdout_frac` > 0 sets that share of each block's rows aside.  Adam then trains on the rest, every state it
    passes through is scored on the held-out rows over the regularizations lam * 10**k, and the block keeps the
    earliest state (and, for that state, the largest regularization) within one standard error of the best score.  A
    block whose chosen score does not beat predicting zero on the held-out rows contributes nothing.  Held-out
    selection needs full-batch steps.
    """

    freq_schedule: Tuple[float, ...] = (5.0, 15.0, 30.0)
    iters_per_block: int = 2000
    learning_rate: float = 1e-2
    lam: float = 1e-5
    K: int = DEFAULT_BANK_SIZE
    train_freqs: bool = False
    ablate_warp: bool = False
    seed: int = 0
    batch_size: Optional[int] = None
    log_every: int = 100
    holdout_frac: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'freq_schedule', tuple(float(f) for f in self.freq_schedule))
        if len(self.freq_schedule) == 0 or any(not f > 0 for f in self.freq_schedule):
            raise InvalidInputException(f'Frequency schedule must be non-empty and positive: {self.freq_schedule}')
        if self.iters_per_block < 0:
            raise InvalidInputException(f'Iterations per block must be non-negative: {self.iters_per_block}')
        if not self.learning_rate > 0:
            raise InvalidInputException(f'Learning rate must be positive: {self.learning_rate}')
        if not self.lam > 0:
            raise InvalidInputException(f'Regularization must be positive: {self.lam}')
        if self.K < 1:
            raise InvalidDimensionException(f'Bank size must be positive: {self.K}')
        if self.seed < 0:
            raise InvalidInputException(f'Seed must be non-negative: {self.seed}')
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidInputException(f'Batch size must be positive: {self.batch_size}')
        if self.log_every < 1:
            raise InvalidInputException(f'Logging interval must be positive: {self.log_every}')
        if not 0.0 <= self.holdout_frac < 0.5:
            raise InvalidInputException(f'Held-out fraction must be in [0, 0.5): {self.holdout_frac}')
        if self.holdout_frac > 0 and self.batch_size is not None:
            raise InvalidInputException('Held-out selection cannot be combined with mini-batches')

    @property
    def n_blocks(self) -> int:
        return len(self.freq_schedule)


@dataclass(frozen=True)
class Block:
    """
    One trained stage of a cascade: warp, frequency bank, and the ridge coefficients solved for them.  `lam` is the
    regularization the coefficients were solved with.
    """

    warp: WarpParams
    bank: FrequencyBank
    w: np.ndarray
    lam: float

    def __post_init__(self):
        if self.w.shape != (self.bank.width,):
            raise ShapeMismatchException(f'Coefficients must have length {self.bank.width}, got {self.w.shape}')

    @property
    def in_dim(self) -> int:
        return self.warp.in_dim


@dataclass(frozen=True)
class CascadeModel:
    """
    An ordered, immutable sequence of blocks whose outputs are summed.
    """

    in_dim: int
    blocks: Tuple[Block, ...] = ()

    def __post_init__(self):
        if self.in_dim < 1:
            raise InvalidDimensionException(f'Input dimension must be positive: {self.in_dim}')
        object.__setattr__(self, 'blocks', tuple(self.blocks))
        for i, b in enumerate(self.blocks):
            if b.in_dim != self.in_dim:
                raise ShapeMismatchException(f'Block {i + 1} has input dimension {b.in_dim}, model has {self.in_dim}')

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    def with_block(self, block: Block) -> 'CascadeModel':
        """
        A new model with `block` appended.
        """
        return CascadeModel(self.in_dim, self.blocks + (block,))



@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> 'AdamState':
        return cls(np.zeros(size), np.zeros(size), 0)


class ParameterCount(NamedTuple):
    warp: int
    frequencies: int
    coefficients: int

    @property
    def total(self) -> int:
        return self.warp + self.frequencies + self.coefficients


class ObjectiveValue(NamedTuple):
    loss: float
    grad: np.ndarray
    solution: RidgeSolution
    features: np.ndarray


class LossTrace:
    """
    Training losses as (block, iteration, loss) rows, in the order they were recorded.
    """

    def __init__(self):
        self.rows: List[Tuple[int, int, float]] = []

    def record(self, block: int, iteration: int, loss: float) -> None:
        self.rows.append((block, iteration, float(loss)))

    def __len__(self) -> int:
        return len(self.rows)

    def for_block(self, block: int) -> List[float]:
        return [loss for b, _, loss in self.rows if b == block]

    def final_losses(self) -> List[float]:
        """
        The last recorded loss of each block, ordered by block.
        """
        last = {}
        for b, _, loss in self.rows:
            last[b] = loss
        return [last[b] for b in sorted(last)]


class BlockObjective:
    """
    The training loss of one block as a function of a flat parameter vector, with its exact gradient.

    The vector holds `W`, `b`, `W_out` (row-major) when the warp is trained, followed by the real then imaginary
    frequency parts when the frequencies are trained.  Parameters that are not trained are taken from the templates.
    """

    def __init__(
        self,
        X,
        r,
        warp: WarpParams,
        bank: FrequencyBank,
        lam: float,
        *,
        train_warp: bool = True,
        train_freqs: bool = False,
    ):
        self.X = as_coordinates(X, warp.in_dim)
        self.r = as_vector(r, self.X.shape[0], 'residual targets')
        self.warp = warp
        self.bank = bank
        self.lam = lam
        self.train_warp = train_warp
        self.train_freqs = train_freqs

    @property
    def size(self) -> int:
        return (self.warp.size if self.train_warp else 0) + (2 * self.bank.K if self.train_freqs else 0)

    def pack(self, warp: WarpParams, bank: FrequencyBank) -> np.ndarray:
        parts = []
        if self.train_warp:
            parts += [warp.W.ravel(), warp.b, warp.W_out.ravel()]
        if self.train_freqs:
            parts += [bank.omega_re, bank.omega_im]
        return np.concatenate(parts) if parts else np.zeros(0)

    def unpack(self, theta: np.ndarray) -> Tuple[WarpParams, FrequencyBank]:
        theta = as_vector(theta, self.size, 'parameter vector')
        warp, bank = self.warp, self.bank
        offset = 0
        if self.train_warp:
            d = warp.in_dim
            W = theta[: d * HIDDEN_WIDTH].reshape(d, HIDDEN_WIDTH)
            offset = d * HIDDEN_WIDTH
            b = theta[offset : offset + HIDDEN_WIDTH]
            offset += HIDDEN_WIDTH
            W_out = theta[offset : offset + 2 * HIDDEN_WIDTH].reshape(HIDDEN_WIDTH, 2)
            offset += 2 * HIDDEN_WIDTH
            warp = WarpParams(W.copy(), b.copy(), W_out.copy(), warp.scale)
        if self.train_freqs:
            K = bank.K
            bank = FrequencyBank(theta[offset : offset + K].copy(), theta[offset + K : offset + 2 * K].copy())
        return warp, bank

    def __call__(self, theta: np.ndarray, rows: Optional[np.ndarray] = None) -> ObjectiveValue:
        """
        Loss and gradient at `theta`, on all points or on the subset `rows`.
        """
        warp, bank = self.unpack(theta)
        X = self.X if rows is None else self.X[rows]
        r = self.r if rows is None else self.r[rows]

        warp_tape = warp_forward_tape(warp, X)
        basis_tape = basis_forward_tape(bank, warp_tape.z)
        value = fit_loss_grad(basis_tape.Phi, r, self.lam, validate=False)
        g_basis = basis_backward_tape(bank, warp_tape.z, basis_tape, value.grad_Phi)

        grads = []
        if self.train_warp:
            g_warp = warp_backward_tape(warp, warp_tape, g_basis.z_re, g_basis.z_im)
            grads += [g_warp.W.ravel(), g_warp.b, g_warp.W_out.ravel()]
        if self.train_freqs:
            grads += [g_basis.omega_re, g_basis.omega_im]
        grad = np.concatenate(grads) if grads else np.zeros(0)
        return ObjectiveValue(value.loss, grad, value.solution, basis_tape.Phi)


class ValidationCurve(NamedTuple):
    lams: np.ndarray
    mse: np.ndarray
    stderr: np.ndarray


def validation_curve(Phi_fit, r_fit, Phi_val, r_val, lams) -> ValidationCurve:
    """
    Held-out mean squared error of ridge fits on (`Phi_fit`, `r_fit`), one per regularization in `lams`, with the
    standard error of each mean.  All fits share one eigendecomposition of the Gram matrix.
    """
    Phi_fit, Phi_val = np.asarray(Phi_fit, dtype=np.float64), np.asarray(Phi_val, dtype=np.float64)
    r_fit = as_vector(r_fit, Phi_fit.shape[0], 'fit targets')
    r_val = as_vector(r_val, Phi_val.shape[0], 'held-out targets')
    lams = as_vector(lams, name='regularizations')
    if Phi_fit.shape[1] != Phi_val.shape[1]:
        raise ShapeMismatchException(f'Fit and held-out features differ in width: {Phi_fit.shape} vs {Phi_val.shape}')
    if r_val.shape[0] < 2:
        raise InvalidInputException('A validation curve needs at least two held-out rows')

    s, V = np.linalg.eigh(Phi_fit.T @ Phi_fit)
    s = np.clip(s, 0.0, None)
    projected = V.T @ (Phi_fit.T @ r_fit)
    coef = projected[None, :] / (s[None, :] + lams[:, None])
    err = (coef @ (Phi_val @ V).T - r_val[None, :]) ** 2
    return ValidationCurve(lams, err.mean(axis=1), err.std(axis=1, ddof=1) / math.sqrt(r_val.shape[0]))


def within_one_stderr(mse, stderr) -> np.ndarray:
    """
    Mask of the entries whose score is no worse than the best score plus the best entry's standard error.
    """
    mse, stderr = np.asarray(mse, dtype=np.float64), np.asarray(stderr, dtype=np.float64)
    best = int(np.argmin(mse))
    return mse <= mse[best] + stderr[best]


def holdout_split(n: int, frac: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sorted (fit, held-out) row indices, with ceil(frac * n) rows held out.
    """
    n_val = int(math.ceil(frac * n))
    if n_val < 2 or n - n_val < 1:
        raise InvalidInputException(f'Cannot hold out {n_val} of {n} rows')
    order = make_rng(seed, _HOLDOUT_STREAM).permutation(n)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


class HoldoutChoice(NamedTuple):
    iteration: int
    warp: WarpParams
    bank: FrequencyBank
    lam: float
    val_mse: float
    baseline_mse: float

    @property
    def accepted(self) -> bool:
        return self.val_mse < self.baseline_mse


class HoldoutSelector:
    """
    Collects the states of one block's descent and picks one by its held-out error.
    """

    def __init__(self, objective: BlockObjective, X_val, r_val, lam: float):
        self.objective = objective
        self.X_val = as_coordinates(X_val, objective.warp.in_dim)
        self.r_val = as_vector(r_val, self.X_val.shape[0], 'held-out targets')
        self.lams = lam * 10.0 ** np.arange(HOLDOUT_LAMBDA_DECADES + 1)
        self.baseline_mse = float(self.r_val @ self.r_val) / self.r_val.shape[0]
        self.states: List[Tuple[int, WarpParams, FrequencyBank, ValidationCurve]] = []

    def observe(self, iteration: int, theta: np.ndarray, value: ObjectiveValue) -> None:
        warp, bank = self.objective.unpack(theta)
        Phi_val = basis_features(bank, warp_forward(warp, self.X_val))
        curve = validation_curve(value.features, self.objective.r, Phi_val, self.r_val, self.lams)
        self.states.append((iteration, warp, bank, curve))

    def select(self) -> HoldoutChoice:
        if not self.states:
            raise InvalidInputException('No training state has been observed')
        best = np.array([curve.mse.min() for *_, curve in self.states])
        stderr = np.array([curve.stderr[np.argmin(curve.mse)] for *_, curve in self.states])
        index = int(np.argmax(within_one_stderr(best, stderr)))

        iteration, warp, bank, curve = self.states[index]
        k = int(np.flatnonzero(within_one_stderr(curve.mse, curve.stderr))[-1])
        return HoldoutChoice(iteration, warp, bank, float(curve.lams[k]), float(curve.mse[k]), self.baseline_mse)


class _LowestLoss:
    def __init__(self):
        self.theta, self.loss = None, math.inf

    def observe(self, iteration: int, theta: np.ndarray, value: ObjectiveValue) -> None:
        if self.theta is None or value.loss < self.loss:
            self.theta, self.loss = theta, value.loss


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    lr: float,
    beta1: float = ADAM_BETA1,
    beta2: float = ADAM_BETA2,
    eps: float = ADAM_EPS,
) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam update.  Returns the new parameters and state; the inputs are not modified.
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ShapeMismatchException(
            f'Parameters {params.shape}, gradients {grads.shape} and state {state.m.shape} must match'
        )

    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * grads
    v = beta2 * state.v + (1 - beta2) * grads * grads
    m_hat = m / (1 - beta1**t)
    v_hat = v / (1 - beta2**t)
    return params - lr * m_hat / (np.sqrt(v_hat) + eps), AdamState(m, v, t)


def block_forward(b: Block, X) -> np.ndarray:
    return basis_features(b.bank, warp_forward(b.warp, X)) @ b.w


def predict(model: CascadeModel, X) -> np.ndarray:
    """
    Sum of the block outputs at `X`; zero everywhere for a model without blocks.
    """
    X = as_coordinates(X, model.in_dim)
    out = np.zeros(X.shape[0])
    for b in model.blocks:
        out += block_forward(b, X)
    return out


def _descend(
    objective: BlockObjective,
    theta: np.ndarray,
    cfg: TrainConfig,
    block_index: int,
    seed: int,
    trace: Optional[LossTrace],
    observe: Callable[[int, np.ndarray, ObjectiveValue], None],
) -> None:
    # `observe` sees every full-sample state, the state after the last step included
    n = objective.X.shape[0]
    full_batch = cfg.batch_size is None or cfg.batch_size >= n
    batch_rng = None if full_batch else make_rng(seed, _BATCH_STREAM)
    if not full_batch:
        observe(0, theta, objective(theta))

    if objective.size > 0:
        state = AdamState.zeros(objective.size)
        for it in range(cfg.iters_per_block):
            rows = None if full_batch else batch_rng.choice(n, size=cfg.batch_size, replace=False)
            value = objective(theta, rows)
            if trace is not None:
                trace.record(block_index, it, value.loss)
            if full_batch:
                observe(it, theta, value)
            if it % cfg.log_every == 0:
                logger.debug('block %d iteration %d: loss %.6e', block_index, it, value.loss)
            theta, state = adam_step(theta, value.grad, state, cfg.learning_rate)

    observe(cfg.iters_per_block, theta, objective(theta))


def train_block(X, r, cfg: TrainConfig, block_index: int, trace: Optional[LossTrace] = None) -> Block:
    """
    Train block `block_index` (1-based) of a cascade on the residual targets `r`.

    The first block starts from a near-identity warp; later blocks start deformed.  The frequency scale comes from
    `cfg.freq_schedule[block_index - 1]`.  After `cfg.iters_per_block` Adam steps, the state with the lowest full-sample
    loss seen is kept and its coefficients are solved once more on the full sample.  With `cfg.holdout_frac` > 0 the
    state and the regularization are picked on held-out rows instead (see `TrainConfig`).
    """
    X = as_coordinates(X)
    r = as_vector(r, X.shape[0], 'residual targets')
    if not 1 <= block_index <= cfg.n_blocks:
        raise InvalidInputException(f'Block index must be in [1, {cfg.n_blocks}], got {block_index}')

    seed = derive_seed(cfg.seed, block_index)
    warp = init_warp(seed, X.shape[1], is_first=block_index == 1)
    bank = init_frequencies(seed, cfg.K, cfg.freq_schedule[block_index - 1])
    n = X.shape[0]
    train_warp = not cfg.ablate_warp
    start = time.perf_counter()

    lam, accepted = cfg.lam, True
    if cfg.holdout_frac > 0:
        fit_rows, val_rows = holdout_split(n, cfg.holdout_frac, seed)
        objective = BlockObjective(
            X[fit_rows], r[fit_rows], warp, bank, cfg.lam, train_warp=train_warp, train_freqs=cfg.train_freqs
        )
        selector = HoldoutSelector(objective, X[val_rows], r[val_rows], cfg.lam)
        _descend(objective, objective.pack(warp, bank), cfg, block_index, seed, trace, selector.observe)
        choice = selector.select()
        warp, bank, lam, accepted = choice.warp, choice.bank, choice.lam, choice.accepted
        logger.info(
            'block %d: held-out error %.6e at iteration %d with lambda=%g (zero predictor %.6e)',
            block_index,
            choice.val_mse,
            choice.iteration,
            choice.lam,
            choice.baseline_mse,
        )
        if not accepted:
            logger.info('block %d does not beat predicting zero on held-out rows; w set to zero', block_index)
    else:
        objective = BlockObjective(X, r, warp, bank, cfg.lam, train_warp=train_warp, train_freqs=cfg.train_freqs)
        lowest = _LowestLoss()
        _descend(objective, objective.pack(warp, bank), cfg, block_index, seed, trace, lowest.observe)
        warp, bank = objective.unpack(lowest.theta)

    if accepted:
        sol = ridge_solve(basis_features(bank, warp_forward(warp, X)), r, lam)
        w, lam, residual = sol.w, sol.lam, sol.residual
    else:
        w, residual = np.zeros(bank.width), -r
    block_loss = float(residual @ residual) / n
    if trace is not None:
        trace.record(block_index, cfg.iters_per_block, block_loss)

    logger.info(
        'block %d: frequency scale %g, loss %.6e after %d iterations (%.2fs)',
        block_index,
        cfg.freq_schedule[block_index - 1],
        block_loss,
        cfg.iters_per_block,
        time.perf_counter() - start,
    )
    return Block(warp, bank, w, lam)


def fit(X, y, cfg: TrainConfig, trace: Optional[LossTrace] = None) -> CascadeModel:
    """
    Grow a cascade: each block is trained on what the blocks before it leave unexplained.

    :raises BlockTrainingException: When a block fails; `block_index` names it and the cause is chained
    """
    X = as_coordinates(X)
    y = as_vector(y, X.shape[0], 'targets')
    if not np.all(np.isfinite(y)):
        raise InvalidInputException('Targets must be finite')

    model = CascadeModel(X.shape[1])
    for l in range(1, cfg.n_blocks + 1):
        residual = y - predict(model, X)
        try:
            block = train_block(X, residual, cfg, l, trace)
        except _BLOCK_FAILURES as ex:
            raise BlockTrainingException(f'Training block {l} failed: {ex}', l) from ex
        model = model.with_block(block)
    return model


def parameter_breakdown(source: Union[CascadeModel, TrainConfig], in_dim: Optional[int] = None) -> ParameterCount:
    """
    Parameters per category: warp weights, frequency reals and solved coefficients.

    :param source: A trained model, or a configuration (which then needs `in_dim`)
    """
    if isinstance(source, CascadeModel):
        shapes = [(b.in_dim, b.bank.K) for b in source.blocks]
    elif isinstance(source, TrainConfig):
        if in_dim is None:
            raise InvalidDimensionException('Counting parameters from a configuration requires in_dim')
        shapes = [(in_dim, source.K)] * source.n_blocks
    else:
        raise TypeError('Unexpected type (%s) for source: %s' % (type(source), str(source)))

    return ParameterCount(
        warp=sum(d * HIDDEN_WIDTH + HIDDEN_WIDTH + 2 * HIDDEN_WIDTH for d, _ in shapes),
        frequencies=sum(2 * K for _, K in shapes),
        coefficients=sum(4 * K for _, K in shapes),
    )


def count_params(source: Union[CascadeModel, TrainConfig], in_dim: Optional[int] = None) -> int:
    return parameter_breakdown(source, in_dim).total
