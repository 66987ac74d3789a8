import abc
import logging
import os
from pathlib import Path

from carleson_lab.analysis.exceptions import StorageAccessException


logger = logging.getLogger(__name__)


class AbstractRunStorage(abc.ABC):
    """
    Where the outputs of one run go: the verdict table, CSV series and the manifest echo.

    Every run gets its own directory under a configured root. Runners only ever hand over small text files, so the
        interface is deliberately narrow.
    """
    def __init__(self, run_dir: str, root: str = None):
        self._path = run_dir
        if root:
            self._path = os.path.join(root, run_dir)

        self._p = Path(self._path).resolve()  # Used for checking paths. Convert symlinks to absolute form

    def get_home(self) -> str:
        """The directory for this run (root + run specific name)"""
        return self._path

    def relative(self, *args, check=True) -> str:
        """
        Get a pathname inside the run directory.

        By default, raises an error if the new path is not below the run directory.
        """
        res = os.path.join(self._path, *args)

        if check:
            p = Path(res).resolve()
            if p == self._p or self._p not in p.parents:
                raise StorageAccessException('Relative path must be a child of the run directory')
        return res

    @abc.abstractmethod
    def setup(self):
        """Make sure the run directory exists and can be written"""
        raise NotImplementedError

    def delete(self, name: str = None):
        """Delete one output file, or the whole run directory"""
        if name:
            path = self.relative(name)
            logger.info(f'Deleting run output: {path}')
        else:
            path = self._path
            logger.info(f'Deleting entire run directory: {path}')

        return self._delete(path)

    @abc.abstractmethod
    def read_contents(self, name: str, mode: str = 'r'):
        """Return the full content of a small output file"""
        raise NotImplementedError

    @abc.abstractmethod
    def write_contents(self, name: str, content, mode='w') -> str:
        """Write a small output file and return its full path"""
        raise NotImplementedError

    def list_contents(self) -> list:
        return []

    ########
    # Private methods
    @abc.abstractmethod
    def _delete(self, path):
        """Internal implementation per storage subclass"""
        raise NotImplementedError
