import abc
import argparse
import dataclasses as dc
import logging
import math
import typing as ty

import numpy as np

from carleson_lab.analysis.embed import VerdictList
from carleson_lab.analysis.enums import VerdictStatus
from carleson_lab.cli import formats
from carleson_lab.cli.manifest import RunManifest
from carleson_lab.cli.parsers.from_spec import parse_spec_file
from carleson_lab.cli.storage.base import AbstractRunStorage

logger = logging.getLogger(__name__)

# Flags shared by every subcommand that change results; they are recorded in the manifest next to the subcommand's
#   own options. --out-dir, --seed and --manifest are not: the seed has its own manifest field
GLOBAL_ARGS = ('tol', 'grid', 'window', 'refine')

MANIFEST_FILE = 'manifest.json'
VERDICT_FILE = 'verdicts.json'


##########
# Flag values
@dc.dataclass(frozen=True)
class GridSpec:
    """`lo:hi:points`, read as a linear or a geometric grid depending on the command"""
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.points < 2 or not self.lo < self.hi:
            raise ValueError(f'Grid needs lo < hi and at least two points (got {self.describe()})')

    def linear(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    def geometric(self) -> np.ndarray:
        if not self.lo > 0:
            raise ValueError(f'Geometric grids need lo > 0 (got {self.describe()})')
        return np.geomspace(self.lo, self.hi, self.points)

    def describe(self) -> str:
        return f'{self.lo!r}:{self.hi!r}:{self.points}'


def parse_grid(text: str) -> GridSpec:
    parts = text.split(':')
    if len(parts) != 3:
        raise ValueError(f'Grid must look like lo:hi:points (got {text!r})')
    return GridSpec(float(parts[0]), float(parts[1]), int(parts[2]))


def parse_window(text: str) -> ty.Tuple[int, int]:
    """`-3..6`; both ends are included"""
    lo, sep, hi = text.partition('..')
    if not sep:
        raise ValueError(f'Index window must look like lo..hi (got {text!r})')
    return int(lo), int(hi)


def as_float(value) -> ty.Optional[float]:
    """Manifest arguments come back from JSON, where inf is spelled as a string"""
    return None if value is None else float(value)


##########
# Results
@dc.dataclass
class RunOutput:
    """What a runner computed, before anything is written"""
    verdicts: VerdictList
    report: ty.Dict[str, ty.Any] = dc.field(default_factory=dict)
    tables: ty.Dict[str, ty.Tuple[ty.Sequence[str], ty.Iterable[ty.Sequence]]] = dc.field(default_factory=dict)
    status: ty.Optional[VerdictStatus] = None


@dc.dataclass(frozen=True)
class RunResult:
    command: str
    status: VerdictStatus
    run_dir: str
    files: ty.Tuple[str, ...]
    verdicts: VerdictList = dc.field(compare=False)

    @property
    def exit_code(self) -> int:
        return VerdictStatus.exit_code(self.status)


class AbstractCommandRunner(abc.ABC):
    """
    Run one subcommand from a manifest and write its outputs: the verdict table (JSON), one CSV per data series,
        and an echo of the manifest.

    Subclasses declare their own flags, which of those name spec files (and the spec kinds accepted there), and how
        the global --grid flag applies to them.
    """
    NAME: str = None
    HELP: str = ''

    # option name -> spec kinds accepted
    SPEC_OPTIONS: ty.Dict[str, ty.Tuple[str, ...]] = {}

    # How --grid applies: 'squares' retunes the square and test-point grids through the settings, 'linear' and
    #   'geometric' are sample grids the runner reads itself
    GRID_KIND: ty.Optional[str] = None
    DEFAULT_GRID: ty.Optional[str] = None

    def __init__(self, manifest: RunManifest, storage: AbstractRunStorage, *args, **kwargs):
        self._manifest = manifest
        self._storage = storage
        self._args = manifest.args

    ##########
    # Argument handling
    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser):
        """Subcommand specific flags"""
        pass

    @classmethod
    def settings_overrides(cls, args: ty.Dict[str, ty.Any]) -> ty.Dict[str, ty.Any]:
        """Settings implied by the global flags, folded into the manifest when a run is first recorded"""
        overrides: ty.Dict[str, ty.Any] = {}
        if args.get('tol') is not None:
            overrides['QUAD_RTOL'] = float(args['tol'])
        if args.get('window'):
            overrides['INDEX_WINDOW'] = parse_window(args['window'])
        if args.get('grid') and cls.GRID_KIND == 'squares':
            grid = parse_grid(args['grid'])
            grid.geometric()  # validates lo > 0
            overrides.update({
                'SIDE_MIN': grid.lo,
                'SIDE_MAX': grid.hi,
                'SIDE_RATIO': (grid.hi / grid.lo) ** (1 / (grid.points - 1)),
                'LAMBDA_RE': (grid.lo, grid.hi, grid.points),
            })
        return overrides

    def _grid(self) -> GridSpec:
        return parse_grid(self._args.get('grid') or self.DEFAULT_GRID)

    ##########
    # Public interface
    def run(self) -> RunResult:
        storage = self._storage
        storage.setup()

        specs = self._load_specs()
        output = self._execute(specs)
        status = output.status if output.status is not None else output.verdicts.final_status()
        logger.info(f'{self.NAME}: {len(output.verdicts)} verdict(s), final status {status.name}')

        files = [storage.write_contents(MANIFEST_FILE, self._manifest.dumps(), mode='wb')]
        table = {
            'command': self.NAME,
            'status': status.name,
            'exit_code': VerdictStatus.exit_code(status),
            'run_dir': self._manifest.run_dir(),
            'verdicts': [v.as_dict() for v in output.verdicts],
            'report': output.report,
        }
        files.append(storage.write_contents(VERDICT_FILE, formats.dumps(table), mode='wb'))
        for name, (header, rows) in output.tables.items():
            files.append(storage.write_contents(f'{name}.csv', formats.csv_text(header, rows)))

        return RunResult(self.NAME, status, storage.get_home(), tuple(files), output.verdicts)

    #######
    # Private / internal methods
    def _load_specs(self) -> ty.Dict[str, ty.Any]:
        return {
            name: parse_spec_file(record.path, self.SPEC_OPTIONS.get(name))
            for name, record in self._manifest.specs.items()
        }

    def _cap(self) -> ty.Optional[float]:
        cap = as_float(self._args.get('cap'))
        if cap is not None and not (cap > 0 or math.isinf(cap)):
            raise ValueError(f'Verdict cap must be positive (got {cap})')
        return cap

    @abc.abstractmethod
    def _execute(self, specs: ty.Dict[str, ty.Any]) -> RunOutput:
        raise NotImplementedError


def render_table(result: RunResult) -> str:
    """Short human-readable summary printed after a run"""
    lines = [f'{result.command}: {result.status.name} (outputs in {result.run_dir})']
    for v in result.verdicts:
        lines.append(f'  {v.label:<20} {v.status.name:<15} {formats.format_value(v.constant)}')
    return '\n'.join(lines)
