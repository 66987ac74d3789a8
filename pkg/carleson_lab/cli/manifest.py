"""
Reproducible run manifests

A manifest pins everything a run depends on: the subcommand and its arguments, sha256 hashes of the spec files it
    reads, the numeric settings in effect, the seed and the tool version. Replaying a manifest re-runs the same
    command under the same settings and writes to the same run directory, so the outputs are byte-identical.
"""
import contextlib
import dataclasses as dc
import hashlib
import logging
import os
import typing as ty

from django.conf import settings

import carleson_lab
from carleson_lab.cli import formats
from carleson_lab.cli.exceptions import (
    InvalidManifest,
    ManifestMismatch,
)
from carleson_lab.cli.parsers.from_spec import spec_hash

logger = logging.getLogger(__name__)

# Wiring, not numerics: these never go into a manifest
NON_NUMERIC_SETTINGS = frozenset({'COMMANDS', 'STORAGE_ENGINE', 'OUT_DIR'})
TUPLE_SETTINGS = frozenset({'LAMBDA_RE', 'LAMBDA_IM', 'INDEX_WINDOW'})

REQUIRED_FIELDS = ('command', 'args', 'specs', 'settings', 'seed', 'version')


@dc.dataclass(frozen=True)
class SpecRecord:
    path: str
    sha256: str


def current_settings() -> ty.Dict[str, ty.Any]:
    return {k: v for k, v in settings.CARLESON_LAB.items() if k not in NON_NUMERIC_SETTINGS}


def _restore_settings(values: dict) -> dict:
    """JSON has no tuples; put them back where the settings expect them"""
    return {k: tuple(v) if k in TUPLE_SETTINGS and isinstance(v, list) else v for k, v in values.items()}


@dc.dataclass(frozen=True)
class RunManifest:
    command: str
    args: ty.Dict[str, ty.Any]
    specs: ty.Dict[str, SpecRecord]
    settings: ty.Dict[str, ty.Any]
    seed: int
    version: str = carleson_lab.__version__

    def as_dict(self) -> dict:
        return {
            'command': self.command,
            'args': self.args,
            'specs': {name: dc.asdict(record) for name, record in self.specs.items()},
            'settings': self.settings,
            'seed': self.seed,
            'version': self.version,
        }

    def dumps(self) -> bytes:
        return formats.dumps(self.as_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.dumps()).hexdigest()

    def run_dir(self) -> str:
        """Named after the content, so a replay lands in the same place"""
        return f'{self.command}-{self.digest()[:12]}'

    ##########
    # Loading and replay
    @classmethod
    def from_dict(cls, data: dict) -> 'RunManifest':
        missing = [name for name in REQUIRED_FIELDS if name not in data]
        if missing:
            raise InvalidManifest(f'Manifest is missing {", ".join(missing)}')
        try:
            specs = {name: SpecRecord(**record) for name, record in data['specs'].items()}
        except TypeError as e:
            raise InvalidManifest(f'Malformed spec record: {e}')
        return cls(
            command=data['command'],
            args=dict(data['args']),
            specs=specs,
            settings=_restore_settings(data['settings']),
            seed=int(data['seed']),
            version=data['version'],
        )

    @classmethod
    def load(cls, path: str) -> 'RunManifest':
        with open(path, 'rb') as f:
            content = f.read()
        try:
            data = formats.loads(content)
        except ValueError as e:
            raise InvalidManifest(f'Manifest {path} is not valid JSON: {e}')
        if not isinstance(data, dict):
            raise InvalidManifest(f'Manifest {path} must hold a JSON object')
        return cls.from_dict(data)

    def verify(self):
        """Refuse to replay when any input spec file changed or disappeared"""
        if self.version != carleson_lab.__version__:
            logger.warning(f'Manifest was written by version {self.version}; running {carleson_lab.__version__}')
        for name, record in self.specs.items():
            if not os.path.isfile(record.path):
                raise ManifestMismatch(f'Spec file for --{name} is gone: {record.path}')
            actual = spec_hash(record.path)
            if actual != record.sha256:
                raise ManifestMismatch(f'Spec file for --{name} changed since the manifest was written: {record.path}')

    @contextlib.contextmanager
    def applied(self):
        """Run with the manifest's settings in place of the configured ones"""
        conf = settings.CARLESON_LAB
        saved = dict(conf)
        conf.update(self.settings)
        conf['SEED'] = self.seed
        try:
            yield self
        finally:
            conf.clear()
            conf.update(saved)


def build_manifest(
        command: str,
        args: ty.Dict[str, ty.Any],
        spec_options: ty.Iterable[str],
        overrides: ty.Dict[str, ty.Any] = None,
        seed: int = None,
) -> RunManifest:
    """Record a new run: spec paths are made absolute and hashed, flag overrides are folded into the settings"""
    args = dict(args)
    specs = {}
    for name in spec_options:
        path = args.get(name)
        if not path:
            continue
        path = os.path.abspath(path)
        args[name] = path
        specs[name] = SpecRecord(path, spec_hash(path))

    conf = dict(current_settings(), **(overrides or {}))
    seed = conf['SEED'] if seed is None else int(seed)
    conf['SEED'] = seed
    return RunManifest(command, args, specs, conf, seed)
