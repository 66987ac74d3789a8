import importlib
import os
import sys
import typing as ty

from django.conf import settings

from carleson_lab.cli.exceptions import UnknownCommand
from carleson_lab.cli.manifest import RunManifest
from .base import AbstractCommandRunner
from ..storage.base import AbstractRunStorage


def _get_class_from_string(path: str):
    """h/t: django internals"""
    mp, clp = path.rsplit('.', maxsplit=1)
    if not (mod := sys.modules.get(mp)):
        mod = importlib.import_module(mp)
    return getattr(mod, clp)


def get_runner_classes() -> ty.Dict[str, ty.Type[AbstractCommandRunner]]:
    """Subcommand name -> runner class, in the order the settings list them"""
    return dict(_COMMANDS)


def get_runner_class(name: str) -> ty.Type[AbstractCommandRunner]:
    try:
        return _COMMANDS[name]
    except KeyError:
        raise UnknownCommand(f'No runner is configured for {name!r}')


def get_runner(manifest: RunManifest, root: str = None) -> AbstractCommandRunner:
    """Get the runner for a manifest, writing into the run directory named after the manifest content"""
    storage = get_storage(manifest.run_dir(), root=root)
    return get_runner_class(manifest.command)(
        manifest,
        storage,
    )


def get_storage(run_dir: str, root: str = None) -> AbstractRunStorage:
    """Get an output storage object for one run directory under the configured output root"""
    root = os.path.abspath(settings.CARLESON_LAB['OUT_DIR'] if root is None else root)
    return _SC(run_dir, root=root)


# Subcommands and the storage engine are fixed by config files at startup
_COMMANDS = {name: _get_class_from_string(path) for name, path in settings.CARLESON_LAB['COMMANDS'].items()}
_SC = _get_class_from_string(settings.CARLESON_LAB['STORAGE_ENGINE'])
