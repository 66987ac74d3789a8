"""
carleson-lab: run one analysis subcommand, or replay a stored run manifest

    carleson_lab [global flags] <subcommand> [flags]
    carleson_lab --manifest <run dir>/manifest.json

Exit status is 0 when every verdict passes, 1 when a verdict fails against its cap, and 2 on any error.
"""
import argparse
import logging

from django.core.management.base import BaseCommand, CommandError, CommandParser

from carleson_lab.analysis.exceptions import BaseCarlesonException
from carleson_lab.cli.manifest import RunManifest, build_manifest
from carleson_lab.cli.runners import get_runner, get_runner_class, get_runner_classes
from carleson_lab.cli.runners.base import GLOBAL_ARGS, render_table

logger = logging.getLogger(__name__)

# Options that never reach a runner: django's own, and the flags that only say where and how to run
NOT_RECORDED = frozenset({
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks', 'stdout', 'stderr',
    'subcommand', 'manifest', 'out_dir', 'seed',
})

ERROR_EXIT = 2
FAILURE_EXIT = 1


class _SubcommandParser(CommandParser):
    """Usage errors inside a subcommand are errors like any other: exit status 2"""
    def error(self, message):
        raise CommandError(f'Error: {message}', returncode=ERROR_EXIT)


def _add_global_arguments(parser: argparse.ArgumentParser, default=None):
    parser.add_argument('--tol', type=float, default=default, help='Relative quadrature tolerance')
    parser.add_argument('--grid', default=default,
                        help='lo:hi:points for squares or the sample grid (--grid=-8:8:129 when lo < 0)')
    parser.add_argument('--window', default=default, help='Index window for sequence conditions, e.g. --window=-3..6')
    parser.add_argument('--out-dir', default=default, help='Root directory for run outputs')
    parser.add_argument('--seed', type=int, default=default, help='Seed for randomized sampling')
    parser.add_argument('--refine', action='store_true', default=default if default is not None else False,
                        help='Refine grids until constants move by less than the configured tolerance')


class Command(BaseCommand):
    help = 'Numerical checks of Carleson embeddings, decompositions and admissibility'
    requires_system_checks = []

    def add_arguments(self, parser):
        _add_global_arguments(parser)
        parser.add_argument('--manifest', help='Replay the run recorded in this manifest')

        subparsers = parser.add_subparsers(dest='subcommand', parser_class=_SubcommandParser)
        for name, runner_class in get_runner_classes().items():
            sub = subparsers.add_parser(name, help=runner_class.HELP)
            # Global flags may also follow the subcommand
            _add_global_arguments(sub, default=argparse.SUPPRESS)
            runner_class.add_arguments(sub)

    def handle(self, *args, **options):
        try:
            manifest = self._manifest(options)
            with manifest.applied():
                result = get_runner(manifest, root=options.get('out_dir')).run()
        except CommandError:
            raise
        except (BaseCarlesonException, ValueError, OSError) as e:
            logger.exception(f'Run failed: {e}')
            raise CommandError(str(e), returncode=ERROR_EXIT)

        self.stdout.write(render_table(result))
        if result.exit_code:
            raise CommandError(f'{result.command}: {result.status.name}', returncode=FAILURE_EXIT)

    def _manifest(self, options: dict) -> RunManifest:
        command = options.get('subcommand')
        path = options.get('manifest')
        if bool(command) == bool(path):
            raise CommandError('Give either a subcommand or --manifest', returncode=ERROR_EXIT)

        if path:
            manifest = RunManifest.load(path)
            manifest.verify()
            logger.info(f'Replaying {manifest.command} from {path}')
            return manifest

        runner_class = get_runner_class(command)
        recorded = {k: v for k, v in options.items() if k not in NOT_RECORDED}
        for name in GLOBAL_ARGS:
            recorded.setdefault(name, None)
        overrides = runner_class.settings_overrides(recorded)
        return build_manifest(command, recorded, runner_class.SPEC_OPTIONS, overrides, options.get('seed'))
