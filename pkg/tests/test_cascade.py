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
from dataclasses import replace

import numpy as np
import pytest

from vekua.basis import FrequencyBank, basis_backward, basis_features, init_frequencies
from vekua.cascade import (
    AdamState,
    Block,
    BlockObjective,
    CascadeModel,
    HoldoutSelector,
    LossTrace,
    TrainConfig,
    ValidationCurve,
    adam_step,
    block_forward,
    count_params,
    fit,
    holdout_split,
    parameter_breakdown,
    predict,
    train_block,
    validation_curve,
    within_one_stderr,
)
from vekua.exceptions import (
    BlockTrainingException,
    InvalidDimensionException,
    InvalidInputException,
    ShapeMismatchException,
    SingularSystemException,
)
from vekua.solver import fit_loss_grad, ridge_solve
from vekua.utils import derive_seed, lattice
from vekua.warp import HIDDEN_WIDTH, WarpParams, init_warp, warp_backward, warp_forward

SMALL = TrainConfig(freq_schedule=(2.0, 4.0), iters_per_block=10, K=4, lam=1e-4, seed=3)
HELD_OUT = replace(SMALL, holdout_frac=0.25)


def grid(n):
    axis = np.linspace(-1, 1, n)
    return lattice([axis, axis]).points


def zero_warp(in_dim):
    return WarpParams(np.zeros((in_dim, HIDDEN_WIDTH)), np.zeros(HIDDEN_WIDTH), np.zeros((HIDDEN_WIDTH, 2)))


def random_block(seed, in_dim=2, K=3):
    rng = np.random.default_rng(seed)
    warp = init_warp(seed, in_dim, is_first=False)
    bank = init_frequencies(seed, K, 3.0)
    return Block(warp, bank, rng.normal(size=4 * K), 1e-5)


def relative_error(analytic, numeric):
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    return np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-300)


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.freq_schedule == (5.0, 15.0, 30.0)
        assert cfg.iters_per_block == 2000
        assert cfg.learning_rate == 1e-2
        assert cfg.lam == 1e-5
        assert cfg.K == 24
        assert cfg.n_blocks == 3
        assert not cfg.train_freqs and not cfg.ablate_warp
        assert cfg.batch_size is None
        assert cfg.holdout_frac == 0.0

    def test_schedule_list_is_stored_as_tuple(self):
        assert TrainConfig(freq_schedule=[1, 2]).freq_schedule == (1.0, 2.0)

    @pytest.mark.parametrize(
        'kwargs',
        [
            {'lam': 0.0},
            {'learning_rate': -1.0},
            {'freq_schedule': ()},
            {'freq_schedule': (1.0, -2.0)},
            {'batch_size': 0},
            {'holdout_frac': -0.1},
            {'holdout_frac': 0.5},
            {'holdout_frac': 0.2, 'batch_size': 8},
        ],
    )
    def test_invalid_values_raise_InvalidInputException(self, kwargs):
        with pytest.raises(InvalidInputException):
            TrainConfig(**kwargs)


class TestBlockForward:
    def test_zero_coefficients_give_zero_output(self):
        block = random_block(0)
        block = Block(block.warp, block.bank, np.zeros(12), 1e-5)
        assert not np.any(block_forward(block, grid(4)))

    def test_sine_column_of_unit_frequency_under_identity_warp(self):
        bank = FrequencyBank(np.array([1.0]), np.array([0.0]))
        block = Block(zero_warp(2), bank, np.array([1.0, 0.0, 0.0, 0.0]), 1e-5)
        assert block_forward(block, [[math.pi / 2, 0.0]])[0] == pytest.approx(1.0)

    def test_equals_composition_of_warp_basis_and_coefficients(self):
        block = random_block(1)
        X = np.random.default_rng(0).uniform(-1, 1, (5, 2))
        expected = basis_features(block.bank, warp_forward(block.warp, X)) @ block.w
        np.testing.assert_array_equal(block_forward(block, X), expected)

    def test_coefficient_length_is_checked(self):
        block = random_block(2)
        with pytest.raises(ShapeMismatchException):
            Block(block.warp, block.bank, np.zeros(5), 1e-5)


class TestPredict:
    def test_empty_model_predicts_zero(self):
        assert np.array_equal(predict(CascadeModel(2), grid(3)), np.zeros(9))

    def test_single_block_equals_block_forward(self):
        block = random_block(3)
        X = grid(5)
        np.testing.assert_array_equal(predict(CascadeModel(2, (block,)), X), block_forward(block, X))

    def test_two_blocks_sum(self):
        b1, b2 = random_block(4), random_block(5)
        X = grid(5)
        model = CascadeModel(2).with_block(b1).with_block(b2)
        np.testing.assert_allclose(predict(model, X), block_forward(b1, X) + block_forward(b2, X), rtol=1e-15)

    def test_input_dimension_mismatch_raises_ShapeMismatchException(self):
        with pytest.raises(ShapeMismatchException):
            predict(CascadeModel(2), np.zeros((3, 1)))

    def test_model_rejects_blocks_of_other_dimension(self):
        with pytest.raises(ShapeMismatchException):
            CascadeModel(3, (random_block(0, in_dim=2),))


class TestAdamStep:
    def test_zero_gradient_leaves_parameters_unchanged_and_counts_step(self):
        params = np.array([1.0, -2.0])
        new, state = adam_step(params, np.zeros(2), AdamState.zeros(2), 1e-2)
        assert np.array_equal(new, params)
        assert state.t == 1

    def test_first_step_moves_each_parameter_by_about_the_learning_rate(self):
        params = np.zeros(3)
        new, _ = adam_step(params, np.array([5.0, -0.01, 300.0]), AdamState.zeros(3), 1e-2)
        np.testing.assert_allclose(new, [-1e-2, 1e-2, -1e-2], rtol=1e-5)

    def test_minimizes_a_parabola(self):
        p, state = np.array([1.0]), AdamState.zeros(1)
        for _ in range(100):
            p, state = adam_step(p, 2 * p, state, 1e-2)
        assert abs(p[0]) < 0.9
        assert state.t == 100

    def test_inputs_are_not_modified(self):
        params, state = np.ones(2), AdamState.zeros(2)
        adam_step(params, np.ones(2), state, 0.1)
        assert np.array_equal(params, np.ones(2))
        assert state.t == 0 and not np.any(state.m)

    def test_shape_mismatch_raises_ShapeMismatchException(self):
        with pytest.raises(ShapeMismatchException):
            adam_step(np.ones(2), np.ones(3), AdamState.zeros(2), 0.1)


class TestBlockObjective:
    def test_pack_then_unpack_restores_parameters(self):
        warp, bank = init_warp(0, 2, False), init_frequencies(0, 3, 2.0)
        objective = BlockObjective(grid(4), np.zeros(16), warp, bank, 1e-3, train_freqs=True)
        theta = objective.pack(warp, bank)
        assert theta.shape == (objective.size,)
        w2, b2 = objective.unpack(theta)
        assert np.array_equal(w2.W, warp.W) and np.array_equal(w2.W_out, warp.W_out)
        assert np.array_equal(b2.omega_im, bank.omega_im)

    def test_ablated_warp_without_frequency_training_has_no_parameters(self):
        warp, bank = init_warp(0, 2, False), init_frequencies(0, 3, 2.0)
        objective = BlockObjective(grid(4), np.zeros(16), warp, bank, 1e-3, train_warp=False)
        assert objective.size == 0

    @pytest.mark.parametrize('train_freqs', [False, True])
    @pytest.mark.parametrize('seed', range(25))
    def test_end_to_end_gradient_matches_central_differences(self, seed, train_freqs):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, (16, 2))
        r = np.sin(3 * X[:, 0]) * X[:, 1] + 0.1 * rng.normal(size=16)
        warp, bank = init_warp(seed, 2, is_first=False), init_frequencies(seed, 2, 3.0)
        objective = BlockObjective(X, r, warp, bank, 1e-3, train_freqs=train_freqs)

        theta = objective.pack(warp, bank)
        analytic = objective(theta).grad
        h = 1e-6
        numeric = np.zeros_like(theta)
        for i in range(theta.shape[0]):
            plus, minus = theta.copy(), theta.copy()
            plus[i] += h
            minus[i] -= h
            numeric[i] = (objective(plus).loss - objective(minus).loss) / (2 * h)
        assert relative_error(analytic, numeric) <= 1e-5

    @pytest.mark.parametrize('seed', range(5))
    def test_agrees_with_the_composed_public_passes(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, (40, 2))
        r = np.cos(2 * X[:, 0] - X[:, 1])
        warp, bank = init_warp(seed, 2, is_first=False), init_frequencies(seed, 3, 2.0)
        objective = BlockObjective(X, r, warp, bank, 1e-3, train_freqs=True)
        value = objective(objective.pack(warp, bank))

        z = warp_forward(warp, X)
        Phi = basis_features(bank, z)
        expected = fit_loss_grad(Phi, r, 1e-3)
        g_basis = basis_backward(bank, z, expected.grad_Phi)
        g_warp = warp_backward(warp, X, g_basis.z_re, g_basis.z_im)
        grad = np.concatenate(
            [g_warp.W.ravel(), g_warp.b, g_warp.W_out.ravel(), g_basis.omega_re, g_basis.omega_im]
        )

        assert value.loss == pytest.approx(expected.loss, rel=1e-10)
        np.testing.assert_allclose(value.grad, grad, rtol=1e-8, atol=1e-12)
        np.testing.assert_allclose(value.features, Phi, rtol=1e-15)

    def test_subset_of_rows_uses_only_those_rows(self):
        warp, bank = init_warp(1, 2, False), init_frequencies(1, 3, 2.0)
        X = grid(6)
        r = np.sin(X[:, 0])
        rows = np.arange(0, 36, 2)
        full = BlockObjective(X, r, warp, bank, 1e-3)
        subset = BlockObjective(X[rows], r[rows], warp, bank, 1e-3)
        theta = full.pack(warp, bank)
        assert full(theta, rows).loss == pytest.approx(subset(theta).loss, rel=1e-12)


class TestTrainBlock:
    def test_zero_target_gives_zero_block(self):
        X = grid(8)
        trace = LossTrace()
        block = train_block(X, np.zeros(64), SMALL, 1, trace)
        assert np.linalg.norm(block.w) <= 1e-12
        assert trace.final_losses()[0] <= 1e-20

    def test_first_block_starts_near_identity(self):
        block = train_block(grid(8), np.zeros(64), SMALL, 1)
        assert block.warp.scale == 1e-5

    def test_final_loss_is_not_above_initial_loss(self):
        X = grid(10)
        y = np.sin(3 * X[:, 0]) * np.cos(2 * X[:, 1])
        for index in (1, 2):
            trace = LossTrace()
            train_block(X, y, SMALL, index, trace)
            losses = trace.for_block(index)
            assert len(losses) == SMALL.iters_per_block + 1
            assert losses[-1] <= losses[0]

    def test_coefficients_are_the_ridge_solution_of_the_final_state(self):
        X = grid(8)
        y = np.cos(2 * X[:, 0])
        block = train_block(X, y, SMALL, 2)
        Phi = basis_features(block.bank, warp_forward(block.warp, X))
        np.testing.assert_allclose(block.w, ridge_solve(Phi, y, SMALL.lam).w, rtol=1e-12, atol=1e-14)

    def test_ablated_warp_stays_at_initialization(self):
        X = grid(8)
        cfg = TrainConfig(freq_schedule=(2.0, 4.0), iters_per_block=5, K=4, ablate_warp=True, seed=3)
        block = train_block(X, np.cos(2 * X[:, 0]), cfg, 2)
        assert np.array_equal(block.warp.W, init_warp(derive_seed(cfg.seed, 2), 2, False).W)

    def test_frequencies_move_only_when_trained(self):
        X = grid(8)
        y = np.sin(2.5 * X[:, 0] + X[:, 1])
        frozen = train_block(X, y, SMALL, 1)
        trained = train_block(X, y, replace(SMALL, train_freqs=True), 1)
        assert np.array_equal(frozen.bank.omega_re, init_frequencies(derive_seed(SMALL.seed, 1), 4, 2.0).omega_re)
        assert not np.array_equal(trained.bank.omega_re, frozen.bank.omega_re)

    def test_mini_batches_still_freeze_on_the_full_sample(self):
        X = grid(8)
        y = np.sin(2 * X[:, 0])
        cfg = TrainConfig(freq_schedule=(2.0,), iters_per_block=5, K=4, batch_size=16, seed=1)
        block = train_block(X, y, cfg, 1)
        Phi = basis_features(block.bank, warp_forward(block.warp, X))
        np.testing.assert_allclose(block.w, ridge_solve(Phi, y, cfg.lam).w, rtol=1e-12, atol=1e-14)

    def test_block_index_out_of_range_raises_InvalidInputException(self):
        with pytest.raises(InvalidInputException):
            train_block(grid(4), np.zeros(16), SMALL, 3)


class TestHoldoutSelection:
    def test_split_sizes_and_disjointness(self):
        fit_rows, val_rows = holdout_split(100, 0.2, 7)
        assert len(val_rows) == 20 and len(fit_rows) == 80
        assert np.array_equal(np.sort(np.concatenate([fit_rows, val_rows])), np.arange(100))
        assert np.all(np.diff(fit_rows) > 0) and np.all(np.diff(val_rows) > 0)

    def test_split_is_seeded(self):
        assert np.array_equal(holdout_split(50, 0.3, 1)[1], holdout_split(50, 0.3, 1)[1])
        assert not np.array_equal(holdout_split(50, 0.3, 1)[1], holdout_split(50, 0.3, 2)[1])

    def test_split_of_too_few_rows_raises_InvalidInputException(self):
        with pytest.raises(InvalidInputException):
            holdout_split(4, 0.1, 0)

    def test_one_standard_error_mask(self):
        mask = within_one_stderr([3.0, 1.0, 1.5, 1.7], [0.1, 0.6, 0.1, 0.1])
        assert mask.tolist() == [False, True, True, False]

    def test_validation_curve_matches_individual_ridge_fits(self):
        rng = np.random.default_rng(4)
        Phi_fit, Phi_val = rng.normal(size=(30, 4)), rng.normal(size=(10, 4))
        r_fit, r_val = rng.normal(size=30), rng.normal(size=10)
        lams = np.array([1e-3, 1e-1, 10.0])
        curve = validation_curve(Phi_fit, r_fit, Phi_val, r_val, lams)
        for k, lam in enumerate(lams):
            err = (Phi_val @ ridge_solve(Phi_fit, r_fit, lam).w - r_val) ** 2
            assert curve.mse[k] == pytest.approx(err.mean(), rel=1e-8)
            assert curve.stderr[k] == pytest.approx(err.std(ddof=1) / math.sqrt(10), rel=1e-8)

    def test_selector_prefers_the_earliest_state_and_the_largest_lambda_within_one_standard_error(self):
        warp, bank = init_warp(0, 2, False), init_frequencies(0, 2, 2.0)
        objective = BlockObjective(grid(4), np.ones(16), warp, bank, 1e-3)
        selector = HoldoutSelector(objective, grid(2), np.ones(4), 1e-3)
        lams = np.array([1e-3, 1e-2, 1e-1])
        curves = [
            ValidationCurve(lams, np.array([0.9, 0.8, 0.95]), np.full(3, 0.01)),
            ValidationCurve(lams, np.array([0.52, 0.5, 0.53]), np.full(3, 0.05)),
            ValidationCurve(lams, np.array([0.5, 0.45, 0.6]), np.full(3, 0.1)),
        ]
        selector.states = [(i, warp, bank, curve) for i, curve in enumerate(curves)]
        choice = selector.select()
        assert choice.iteration == 1
        assert choice.lam == 1e-1
        assert choice.val_mse == 0.53
        assert choice.baseline_mse == 1.0
        assert choice.accepted

    def test_zero_target_gives_zero_block(self):
        trace = LossTrace()
        block = train_block(grid(8), np.zeros(64), HELD_OUT, 1, trace)
        assert not np.any(block.w)
        assert trace.final_losses()[0] == 0.0
        assert len(trace) == HELD_OUT.iters_per_block + 1

    def test_kept_block_is_the_ridge_solution_on_all_rows_at_the_selected_lambda(self):
        X = grid(10)
        y = np.sin(2 * X[:, 0]) + 0.5 * X[:, 1]
        block = train_block(X, y, HELD_OUT, 1)
        assert any(block.lam == pytest.approx(HELD_OUT.lam * 10.0**k) for k in range(9))
        Phi = basis_features(block.bank, warp_forward(block.warp, X))
        np.testing.assert_allclose(block.w, ridge_solve(Phi, y, block.lam).w, rtol=1e-12, atol=1e-14)
        assert np.mean((Phi @ block.w - y) ** 2) < np.mean(y**2)

    def test_training_error_does_not_increase_across_blocks(self):
        X = grid(12)
        rng = np.random.default_rng(0)
        y = np.sin(4 * X[:, 0]) * np.cos(3 * X[:, 1]) + 0.2 * rng.normal(size=144)
        model = fit(X, y, replace(HELD_OUT, freq_schedule=(2.0, 4.0, 8.0)))
        errors = [np.mean(y**2)]
        for l in range(1, len(model) + 1):
            errors.append(np.mean((y - predict(CascadeModel(2, model.blocks[:l]), X)) ** 2))
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))

    def test_fixed_seed_is_deterministic(self):
        X = grid(8)
        y = np.cos(3 * X[:, 1])
        m1, m2 = fit(X, y, HELD_OUT), fit(X, y, HELD_OUT)
        for b1, b2 in zip(m1.blocks, m2.blocks):
            assert np.array_equal(b1.w, b2.w)
            assert b1.lam == b2.lam


class TestFit:
    def test_zero_targets_give_zero_model(self):
        X = grid(8)
        model = fit(X, np.zeros(64), SMALL)
        assert len(model) == 2
        assert np.mean(predict(model, X) ** 2) <= 1e-20

    def test_single_block_schedule_equals_train_block(self):
        X = grid(8)
        y = np.sin(2 * X[:, 0]) * X[:, 1]
        cfg = TrainConfig(freq_schedule=(3.0,), iters_per_block=5, K=4, seed=9)
        model = fit(X, y, cfg)
        block = train_block(X, y, cfg, 1)
        np.testing.assert_array_equal(model.blocks[0].w, block.w)

    def test_training_error_does_not_increase_across_blocks(self):
        X = grid(12)
        y = np.sin(4 * X[:, 0]) * np.cos(3 * X[:, 1]) + 0.3 * X[:, 0] ** 2
        cfg = TrainConfig(freq_schedule=(2.0, 4.0, 8.0), iters_per_block=10, K=4, seed=0)
        model = fit(X, y, cfg)
        errors = [np.mean(y**2)]
        for l in range(1, len(model) + 1):
            errors.append(np.mean((y - predict(CascadeModel(2, model.blocks[:l]), X)) ** 2))
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))

    def test_fixed_seed_is_deterministic(self):
        X = grid(8)
        y = np.cos(3 * X[:, 1])
        m1, m2 = fit(X, y, SMALL), fit(X, y, SMALL)
        for b1, b2 in zip(m1.blocks, m2.blocks):
            assert np.array_equal(b1.w, b2.w)
            assert np.array_equal(b1.warp.W, b2.warp.W)

    def test_one_dimensional_input(self):
        x = np.linspace(0, 1, 64)
        model = fit(x, np.sin(6 * x), SMALL)
        assert model.in_dim == 1
        assert predict(model, x).shape == (64,)

    def test_records_loss_trace_for_every_block(self):
        X = grid(6)
        trace = LossTrace()
        fit(X, X[:, 0], SMALL, trace)
        assert len(trace) == SMALL.n_blocks * (SMALL.iters_per_block + 1)
        assert len(trace.final_losses()) == SMALL.n_blocks

    @pytest.mark.parametrize(
        'error',
        [
            SingularSystemException('not positive definite', 1, 1e-2),
            ShapeMismatchException('w has the wrong length'),
            InvalidInputException('not finite'),
            InvalidDimensionException('empty bank'),
        ],
    )
    def test_block_failures_carry_the_block_index(self, monkeypatch, error):
        from vekua import cascade

        def failing(*args, **kwargs):
            raise error

        monkeypatch.setattr(cascade, 'ridge_solve', failing)
        cfg = TrainConfig(freq_schedule=(2.0,), iters_per_block=0, K=2)
        with pytest.raises(BlockTrainingException) as excinfo:
            fit(grid(4), np.ones(16), cfg)
        assert excinfo.value.block_index == 1
        assert excinfo.value.__cause__ is error

    def test_failure_in_a_later_block_names_that_block(self, monkeypatch):
        from vekua import cascade

        real_ridge_solve = cascade.ridge_solve
        calls = []

        def fail_second(*args, **kwargs):
            calls.append(1)
            if len(calls) == 2:
                raise ShapeMismatchException('w has the wrong length')
            return real_ridge_solve(*args, **kwargs)

        monkeypatch.setattr(cascade, 'ridge_solve', fail_second)
        cfg = TrainConfig(freq_schedule=(2.0, 3.0), iters_per_block=0, K=2)
        with pytest.raises(BlockTrainingException) as excinfo:
            fit(grid(4), np.ones(16), cfg)
        assert excinfo.value.block_index == 2

    def test_non_finite_targets_raise_InvalidInputException(self):
        with pytest.raises(InvalidInputException):
            fit(grid(4), np.full(16, np.nan), SMALL)


class TestCountParams:
    def test_empty_model_has_no_parameters(self):
        assert count_params(CascadeModel(2)) == 0

    def test_one_two_dimensional_block(self):
        block = Block(init_warp(0, 2, True), init_frequencies(0, 24, 5.0), np.zeros(96), 1e-5)
        assert count_params(CascadeModel(2, (block,))) == 304

    def test_default_configuration_in_two_dimensions(self):
        assert count_params(TrainConfig(), in_dim=2) == 912
        assert parameter_breakdown(TrainConfig(), in_dim=2) == (480, 144, 288)

    def test_default_configuration_in_one_and_three_dimensions(self):
        assert count_params(TrainConfig(), in_dim=1) == 816
        assert count_params(TrainConfig(), in_dim=3) == 1008

    def test_configuration_without_dimension_raises(self):
        with pytest.raises(InvalidDimensionException):
            count_params(TrainConfig())

    def test_unexpected_type_raises_TypeError(self):
        with pytest.raises(TypeError):
            count_params('model')
