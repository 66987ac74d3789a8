import logging
import os
import shutil

from .base import AbstractRunStorage

logger = logging.getLogger(__name__)


class LocalStorage(AbstractRunStorage):
    """Run outputs in a directory on the local filesystem"""
    def setup(self):
        wd = self._path
        if not os.path.isdir(wd):
            logger.info(f'Creating run directory: {wd}')
            os.makedirs(wd)

    def read_contents(self, name: str, mode: str = 'r'):
        full = self.relative(name)
        with open(full, mode) as f:
            return f.read()

    def write_contents(self, name: str, content, mode='w') -> str:
        full = self.relative(name)
        os.makedirs(os.path.dirname(full), exist_ok=True)  # make containing folder first if needed.
        with open(full, mode, newline=None if 'b' in mode else '') as f:
            f.write(content)
        return full

    def list_contents(self) -> list:
        if not os.path.isdir(self._path):
            return []
        return sorted(os.listdir(self._path))

    def _delete(self, path):
        if not os.path.exists(path):
            raise IOError(f'The specified file or folder does not exist: {path}')

        if os.path.isfile(path):
            os.remove(path)
        elif os.path.isdir(path):
            shutil.rmtree(path)
        else:
            raise IOError('Attempted to delete item that is neither a file nor a folder')
