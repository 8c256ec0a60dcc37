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
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from vekua.cascade import LossTrace
from vekua.exceptions import ShapeMismatchException
from vekua.utils import as_coordinates, as_vector, format_float

logger = logging.getLogger(__name__)

PGM_MAXVAL = 255


def write_field_csv(
    filepath: Union[str, Path], X, values, header: Optional[Sequence[str]] = None
) -> None:
    """
    Write one row per point: the coordinates, then the value.  The default header is `x0, x1, ..., value`.
    """
    X = as_coordinates(X)
    values = as_vector(values, X.shape[0], 'values')
    if header is None:
        header = [f'x{i}' for i in range(X.shape[1])] + ['value']
    if len(header) != X.shape[1] + 1:
        raise ShapeMismatchException(f'Header has {len(header)} names for {X.shape[1] + 1} columns')

    with open(filepath, 'w', newline='') as fout:
        writer = csv.writer(fout)
        writer.writerow(header)
        for point, value in zip(X, values):
            writer.writerow([format_float(c) for c in point] + [format_float(value)])


def write_pgm(filepath: Union[str, Path], grid) -> Tuple[float, float]:
    """
    Write a 2-D array as an ASCII portable graymap, row-major, mapping [min, max] linearly onto [0, 255].  The min and
    max are recorded as header comments and returned.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ShapeMismatchException(f'A graymap needs a 2-D array, got shape {grid.shape}')

    lo, hi = float(np.min(grid)), float(np.max(grid))
    span = hi - lo
    if span > 0:
        pixels = np.rint((grid - lo) / span * PGM_MAXVAL).astype(int)
    else:
        pixels = np.zeros(grid.shape, dtype=int)

    rows, cols = grid.shape
    with open(filepath, 'w') as fout:
        fout.write('P2\n')
        fout.write(f'# min {format_float(lo)}\n')
        fout.write(f'# max {format_float(hi)}\n')
        fout.write(f'{cols} {rows}\n{PGM_MAXVAL}\n')
        for row in pixels:
            fout.write(' '.join(str(p) for p in row) + '\n')
    return lo, hi


def write_loss_trace(filepath: Union[str, Path], trace: LossTrace) -> None:
    with open(filepath, 'w', newline='') as fout:
        writer = csv.writer(fout)
        writer.writerow(['iteration', 'block', 'loss'])
        for block, iteration, loss in trace.rows:
            writer.writerow([iteration, block, format_float(loss)])


def write_field_dumps(out_dir: Union[str, Path], task, prediction) -> None:
    """
    Write `field_<task>_{pred,truth,err}.csv` on the evaluation grid of `task`, in physical coordinates, plus `.pgm`
    rasters for 2-D tasks.
    """
    out_dir = Path(out_dir)
    prediction = as_vector(prediction, task.X_eval.shape[0], 'prediction')
    X = task.X_eval
    normalizer = task.meta.get('normalizer')
    if normalizer is not None:
        X = normalizer.to_physical(X)

    fields = {
        'pred': prediction,
        'truth': task.y_eval_clean,
        'err': prediction - task.y_eval_clean,
    }
    for name, values in fields.items():
        write_field_csv(out_dir / f'field_{task.task_id}_{name}.csv', X, values)
        if len(task.eval_shape) == 2:
            write_pgm(out_dir / f'field_{task.task_id}_{name}.pgm', np.reshape(values, task.eval_shape))
    logger.info('wrote field dumps for task %s to %s', task.task_id, out_dir)
