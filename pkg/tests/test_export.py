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
import math

import numpy as np
import pytest

from vekua.benchmarks.tasks import AffineMap, TaskData
from vekua.cascade import LossTrace
from vekua.exceptions import ShapeMismatchException
from vekua.export import write_field_csv, write_field_dumps, write_loss_trace, write_pgm
from vekua.utils import lattice


def read_rows(path):
    with open(path, newline='') as fin:
        return list(csv.reader(fin))


class TestFieldCsv:
    def test_default_header_and_values(self, tmp_path):
        path = tmp_path / 'f.csv'
        write_field_csv(path, [[0.0, 1.0], [0.5, -1.0]], [0.1, 2.0])
        assert read_rows(path) == [['x0', 'x1', 'value'], ['0.0', '1.0', '0.1'], ['0.5', '-1.0', '2.0']]

    def test_values_read_back_exactly(self, tmp_path):
        path = tmp_path / 'f.csv'
        values = np.random.default_rng(0).normal(size=10) / 7
        write_field_csv(path, np.linspace(0, 1, 10), values, header=['x', 'u'])
        rows = read_rows(path)
        assert rows[0] == ['x', 'u']
        assert np.array_equal([float(r[1]) for r in rows[1:]], values)

    def test_wrong_header_length_raises_ShapeMismatchException(self, tmp_path):
        with pytest.raises(ShapeMismatchException):
            write_field_csv(tmp_path / 'f.csv', [[0.0, 1.0]], [0.0], header=['x', 'value'])


class TestPgm:
    def test_layout_and_scaling(self, tmp_path):
        path = tmp_path / 'g.pgm'
        assert write_pgm(path, [[0.0, 1.0, 2.0], [2.0, 1.0, 0.0]]) == (0.0, 2.0)
        lines = path.read_text().splitlines()
        assert lines[0] == 'P2'
        assert lines[1:3] == ['# min 0.0', '# max 2.0']
        assert lines[3:5] == ['3 2', '255']
        assert lines[5:] == ['0 128 255', '255 128 0']

    def test_constant_grid_is_black(self, tmp_path):
        path = tmp_path / 'g.pgm'
        write_pgm(path, np.full((2, 2), 3.0))
        assert path.read_text().splitlines()[5:] == ['0 0', '0 0']

    def test_non_grid_raises_ShapeMismatchException(self, tmp_path):
        with pytest.raises(ShapeMismatchException):
            write_pgm(tmp_path / 'g.pgm', np.zeros(4))


class TestLossTrace:
    def test_rows(self, tmp_path):
        trace = LossTrace()
        trace.record(1, 0, 2.0)
        trace.record(1, 1, 1.5)
        trace.record(2, 0, 0.25)
        write_loss_trace(tmp_path / 't.csv', trace)
        assert read_rows(tmp_path / 't.csv') == [
            ['iteration', 'block', 'loss'],
            ['0', '1', '2.0'],
            ['1', '1', '1.5'],
            ['0', '2', '0.25'],
        ]
        assert trace.for_block(1) == [2.0, 1.5]
        assert trace.final_losses() == [1.5, 0.25]


class TestFieldDumps:
    def make_task(self, normalizer=None):
        grid = lattice([np.linspace(-1, 1, 4), np.linspace(-1, 1, 3)])
        truth = grid.points[:, 0] + grid.points[:, 1]
        meta = {} if normalizer is None else {'normalizer': normalizer}
        return TaskData('A', grid.points, truth, grid.points, truth, grid.shape, meta)

    def test_two_dimensional_task_writes_csv_and_rasters(self, tmp_path):
        task = self.make_task()
        prediction = task.y_eval_clean + 0.5
        write_field_dumps(tmp_path, task, prediction)
        for name in ('pred', 'truth', 'err'):
            assert len(read_rows(tmp_path / f'field_A_{name}.csv')) == 13
            lines = (tmp_path / f'field_A_{name}.pgm').read_text().splitlines()
            assert lines[3] == '3 4'
        errors = [float(r[2]) for r in read_rows(tmp_path / 'field_A_err.csv')[1:]]
        assert errors == [0.5] * 12

    def test_normalized_coordinates_are_written_physically(self, tmp_path):
        task = self.make_task(AffineMap((0.0, 0.0), (2 * math.pi, 1.0)))
        write_field_dumps(tmp_path, task, task.y_eval_clean)
        last = read_rows(tmp_path / 'field_A_truth.csv')[-1]
        assert float(last[0]) == pytest.approx(2 * math.pi)
        assert float(last[1]) == pytest.approx(1.0)

    def test_wrong_prediction_length_raises_ShapeMismatchException(self, tmp_path):
        with pytest.raises(ShapeMismatchException):
            write_field_dumps(tmp_path, self.make_task(), np.zeros(5))
