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

import csv
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence

from vekua.benchmarks import generate_task, mse, recover_diffusion
from vekua.cascade import LossTrace, ParameterCount, fit, parameter_breakdown, predict
from vekua.config import RunConfig, build_argument_parser, parse_config
from vekua.exceptions import (
    BlockTrainingException,
    ConfigurationException,
    InvalidInputException,
    ModelFormatException,
    NearSingularDerivativeException,
    ShapeMismatchException,
    SingularSystemException,
)
from vekua.export import write_field_dumps, write_loss_trace
from vekua.serialization import save_model
from vekua.utils import format_float

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL_FAILURE = 1
EXIT_USAGE = 2

METRICS_FILE = 'metrics.csv'
METRICS_HEADER = (
    'task_id',
    'seed',
    'param_count',
    'warp_params',
    'frequency_params',
    'coefficient_params',
    'train_mse',
    'eval_mse',
    'wall_time_seconds',
    'block_losses',
    'status',
)

# expected failures are logged without a traceback
_TASK_FAILURES = (
    BlockTrainingException,
    NearSingularDerivativeException,
    SingularSystemException,
    InvalidInputException,
    ShapeMismatchException,
    ModelFormatException,
    OSError,
)


class TaskResult(NamedTuple):
    task_id: str
    seed: int
    params: ParameterCount
    train_mse: float
    eval_mse: float
    wall_time_seconds: float
    block_losses: List[float]
    status: str

    @property
    def ok(self) -> bool:
        return self.status == 'ok'

    def as_row(self) -> List[str]:
        return [
            self.task_id,
            str(self.seed),
            str(self.params.total),
            str(self.params.warp),
            str(self.params.frequencies),
            str(self.params.coefficients),
            format_float(self.train_mse),
            format_float(self.eval_mse),
            format_float(self.wall_time_seconds),
            ';'.join(format_float(loss) for loss in self.block_losses),
            self.status,
        ]


def run_task(task_id: str, cfg: RunConfig) -> TaskResult:
    """
    Generate, fit and evaluate one task, writing its model, loss trace and (optionally) field dumps into
    `cfg.out_dir`.  Failures of any kind are logged and reported in the result's status instead of raised.

    For task C the evaluation error is measured on the recovered diffusion coefficient.
    """
    start = time.perf_counter()
    out_dir = Path(cfg.out_dir)
    trace = LossTrace()
    train_error = eval_error = math.nan
    params = ParameterCount(0, 0, 0)
    status = 'ok'

    try:
        train_cfg = cfg.train_config(task_id)
        task = generate_task(task_id, cfg.seed)
        params = parameter_breakdown(train_cfg, task.in_dim)
        logger.info(
            'task %s: %d parameters (warp %d, frequencies %d, coefficients %d)',
            task_id,
            params.total,
            params.warp,
            params.frequencies,
            params.coefficients,
        )

        model = fit(task.X_train, task.y_train, train_cfg, trace)
        train_error = mse(predict(model, task.X_train), task.y_train)
        prediction = predict(model, task.X_eval)
        if task_id == 'C':
            recovery = recover_diffusion(model, task)
            eval_error = mse(recovery.k_hat, task.meta['k_true'])
        else:
            eval_error = mse(prediction, task.y_eval_clean)

        save_model(model, out_dir / f'model_{task_id}.bin')
        if cfg.dump_fields:
            write_field_dumps(out_dir, task, prediction)
    except _TASK_FAILURES as ex:
        logger.error('task %s failed: %s', task_id, ex)
        status = f'error:{type(ex).__name__}'
    except Exception as ex:
        logger.exception('task %s failed unexpectedly', task_id)
        status = f'error:{type(ex).__name__}'

    try:
        write_loss_trace(out_dir / f'loss_trace_{task_id}.csv', trace)
    except OSError as ex:
        logger.error('task %s: cannot write the loss trace: %s', task_id, ex)
        if status == 'ok':
            status = f'error:{type(ex).__name__}'

    elapsed = time.perf_counter() - start
    logger.info('task %s: train mse %.3e, eval mse %.3e, %.1fs (%s)', task_id, train_error, eval_error, elapsed, status)
    return TaskResult(task_id, cfg.seed, params, train_error, eval_error, elapsed, trace.final_losses(), status)


def append_metrics(filepath, results: Sequence[TaskResult]) -> None:
    """
    Append one row per result to the metrics file, writing the header first if the file is new or empty.
    """
    filepath = Path(filepath)
    new_file = not filepath.exists() or filepath.stat().st_size == 0
    with open(filepath, 'a', newline='') as fout:
        writer = csv.writer(fout)
        if new_file:
            writer.writerow(METRICS_HEADER)
        for result in results:
            writer.writerow(result.as_row())


def run(cfg: RunConfig) -> int:
    """
    Run every task selected by `cfg`.  Each task's metrics row is appended as soon as the task finishes; parallel runs
    append in completion order.

    :return: 0 when every task succeeded, 1 when any failed
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = out_dir / METRICS_FILE
    tasks = cfg.tasks
    results: List[TaskResult] = []

    def record(result: TaskResult) -> None:
        append_metrics(metrics, [result])
        results.append(result)

    if cfg.parallel and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=len(tasks)) as pool:
            futures = [pool.submit(run_task, task_id, cfg) for task_id in tasks]
            for future in as_completed(futures):
                record(future.result())
    else:
        for task_id in tasks:
            record(run_task(task_id, cfg))

    failed = [r.task_id for r in results if not r.ok]
    if failed:
        logger.error('%d of %d tasks failed: %s', len(failed), len(results), ', '.join(sorted(failed)))
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigurationException as ex:
        build_argument_parser().print_usage(sys.stderr)
        print(f'vekua: error: {ex}', file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=cfg.log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    return run(cfg)


if __name__ == '__main__':
    sys.exit(main())
