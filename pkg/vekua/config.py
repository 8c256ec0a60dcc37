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

import argparse
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput

from vekua.cascade import TrainConfig
from vekua.exceptions import ConfigurationException, InvalidDimensionException, InvalidInputException

logger = logging.getLogger(__name__)

TASK_IDS = ('A', 'B', 'C', 'D', 'E')
TASK_CHOICES = TASK_IDS + ('all',)
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

TASK_PRESETS = {
    'A': TrainConfig(lam=1e-5),
    'B': TrainConfig(lam=1e-5, holdout_frac=0.2),
    'C': TrainConfig(lam=1e-6, holdout_frac=0.2),
    'D': TrainConfig(lam=1e-5),
    'E': TrainConfig(lam=1e-5),
}

# option name -> TrainConfig field it overrides
_TRAIN_OVERRIDES = {
    'iters': 'iters_per_block',
    'lambda': 'lam',
    'learning-rate': 'learning_rate',
    'freq-schedule': 'freq_schedule',
    'batch-size': 'batch_size',
    'holdout': 'holdout_frac',
}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a CLI run needs.  `overrides` holds `TrainConfig` field values that replace the task presets.
    """

    task: str = 'all'
    seed: int = 0
    out_dir: Path = Path('results')
    overrides: Dict[str, Any] = field(default_factory=dict)
    dump_fields: bool = False
    ablate_warp: bool = False
    train_freqs: bool = False
    parallel: bool = False
    log_level: str = 'INFO'

    @property
    def tasks(self) -> List[str]:
        return list(TASK_IDS) if self.task == 'all' else [self.task]

    def train_config(self, task_id: str) -> TrainConfig:
        """
        The task preset with this run's seed, switches and overrides applied.
        """
        return replace(
            TASK_PRESETS[task_id],
            seed=self.seed,
            ablate_warp=self.ablate_warp,
            train_freqs=self.train_freqs,
            **self.overrides,
        )


def _task(value: str) -> str:
    if value not in TASK_CHOICES:
        raise argparse.ArgumentTypeError(f'invalid task "{value}" (choose from {", ".join(TASK_CHOICES)})')
    return value


def _non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'not an integer: "{value}"')
    if number < 0:
        raise argparse.ArgumentTypeError(f'must be non-negative: {number}')
    return number


def _positive_int(value: str) -> int:
    number = _non_negative_int(value)
    if number == 0:
        raise argparse.ArgumentTypeError('must be positive: 0')
    return number


def _positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a number: "{value}"')
    if not number > 0:
        raise argparse.ArgumentTypeError(f'must be positive: {value}')
    return number


def _fraction(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'not a number: "{value}"')
    if not 0.0 <= number < 0.5:
        raise argparse.ArgumentTypeError(f'must be in [0, 0.5): {value}')
    return number


def _schedule(value: str) -> Tuple[float, ...]:
    parts = [p.strip() for p in value.split(',') if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError('the frequency schedule is empty')
    return tuple(_positive_float(p) for p in parts)


def _boolean(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise argparse.ArgumentTypeError(f'not a boolean: "{value}"')


def _log_level(value: str) -> str:
    if value.upper() not in LOG_LEVELS:
        raise argparse.ArgumentTypeError(f'invalid log level "{value}" (choose from {", ".join(LOG_LEVELS)})')
    return value.upper()


# config file key -> converter; the keys are the long flag names
_FILE_OPTIONS = {
    'task': _task,
    'seed': _non_negative_int,
    'out': Path,
    'dump-fields': _boolean,
    'ablate-warp': _boolean,
    'train-freqs': _boolean,
    'parallel': _boolean,
    'iters': _non_negative_int,
    'lambda': _positive_float,
    'learning-rate': _positive_float,
    'freq-schedule': _schedule,
    'batch-size': _positive_int,
    'holdout': _fraction,
    'log-level': _log_level,
}

_SWITCHES = ('dump-fields', 'ablate-warp', 'train-freqs', 'parallel')

_grammar = r"""
    start: (_NL | entry)*
    entry: KEY "=" VALUE? _NL

    KEY: /[A-Za-z][A-Za-z0-9_-]*/
    VALUE: /[^\s#][^\n#]*/
    COMMENT: /#[^\n]*/
    _NL: /\r?\n/

    %import common.WS_INLINE
    %ignore WS_INLINE
    %ignore COMMENT
"""


@v_args(inline=True)
class ConfigFileTransformer(Transformer):
    def entry(self, key, value=None):
        return key.value, '' if value is None else value.value.strip()

    def start(self, *entries):
        return list(entries)


_parser = Lark(_grammar, start='start', parser='lalr')


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Parse flat `key = value` config text into converted option values, keyed by long flag name.

    :raises ConfigurationException: On syntax errors, duplicate or unknown keys, and invalid values
    """
    if not text.endswith('\n'):
        text += '\n'
    try:
        entries = ConfigFileTransformer().transform(_parser.parse(text))
    except UnexpectedInput as ex:
        raise ConfigurationException(f'Malformed config file at line {ex.line}, column {ex.column}') from ex

    values = {}
    for key, raw in entries:
        if key not in _FILE_OPTIONS:
            raise ConfigurationException(f'Unknown config key: {key}')
        if key in values:
            raise ConfigurationException(f'Duplicate config key: {key}')
        try:
            values[key] = _FILE_OPTIONS[key](raw)
        except (argparse.ArgumentTypeError, ValueError) as ex:
            raise ConfigurationException(f'Invalid value for {key}: {ex}') from ex
    return values


def read_config_file(filepath) -> Dict[str, Any]:
    try:
        text = Path(filepath).read_text()
    except OSError as ex:
        raise ConfigurationException(f'Cannot read config file {filepath}: {ex}') from ex
    return parse_config_text(text)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationException(message)


def build_argument_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog='vekua',
        description='Fit warped analytic-basis cascades to the physics benchmark tasks.',
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument('--task', type=_task, help='task to run: A-E or all (default: all)')
    parser.add_argument('--seed', type=_non_negative_int, help='random seed (default: 0)')
    parser.add_argument('--out', type=Path, help='output directory (default: results)')
    parser.add_argument('--config', type=Path, help='flat key=value config file; flags take precedence')
    parser.add_argument('--dump-fields', action='store_true', help='write prediction/truth/error grids')
    parser.add_argument('--ablate-warp', action='store_true', help='freeze every warp at its initialization')
    parser.add_argument('--train-freqs', action='store_true', help='train the basis frequencies with the warp')
    parser.add_argument('--parallel', action='store_true', help='run tasks on separate threads')
    parser.add_argument('--iters', type=_non_negative_int, help='Adam iterations per block (default: 2000)')
    parser.add_argument('--lambda', type=_positive_float, help='ridge regularization (default: task preset)')
    parser.add_argument('--learning-rate', type=_positive_float, help='Adam learning rate (default: 1e-2)')
    parser.add_argument('--freq-schedule', type=_schedule, help='comma-separated frequency scales, one per block')
    parser.add_argument('--batch-size', type=_positive_int, help='mini-batch size (default: full batch)')
    parser.add_argument(
        '--holdout', type=_fraction, help='share of rows held out to select each block (default: task preset)'
    )
    parser.add_argument('--log-level', type=_log_level, help='logging level (default: INFO)')
    return parser


def parse_config(argv: Optional[Sequence[str]] = None, config_file=None) -> RunConfig:
    """
    Build a `RunConfig` from command-line flags and an optional config file.  Flags override file values, which
    override the defaults.

    :raises ConfigurationException: On unknown flags or keys, malformed files and invalid values
    """
    namespace = build_argument_parser().parse_args(argv)
    flags = {name.replace('_', '-'): value for name, value in vars(namespace).items()}

    config_file = flags.pop('config', config_file)
    values = read_config_file(config_file) if config_file is not None else {}
    values.update(flags)

    overrides = {_TRAIN_OVERRIDES[key]: values[key] for key in _TRAIN_OVERRIDES if key in values}
    cfg = RunConfig(
        task=values.get('task', 'all'),
        seed=values.get('seed', 0),
        out_dir=Path(values.get('out', 'results')),
        overrides=overrides,
        **{key.replace('-', '_'): values[key] for key in _SWITCHES if key in values},
        log_level=values.get('log-level', 'INFO'),
    )
    try:
        for task_id in cfg.tasks:
            cfg.train_config(task_id)
    except (InvalidInputException, InvalidDimensionException) as ex:
        raise ConfigurationException(f'Invalid training configuration: {ex}') from ex
    return cfg
