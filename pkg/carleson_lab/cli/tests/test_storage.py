import os
import shutil
import tempfile
from unittest import TestCase

from carleson_lab.analysis.exceptions import StorageAccessException
from carleson_lab.cli.runners import get_storage
from carleson_lab.cli.storage import LocalStorage


class TestLocalStorage(TestCase):
    def setUp(self):
        self.root = tempfile.mkdtemp()
        self.storage = LocalStorage('check-0123456789ab', root=self.root)

    def tearDown(self):
        shutil.rmtree(self.root)

    def test_write_read_list(self):
        self.storage.setup()
        path = self.storage.write_contents('squares.csv', 'side,mass\n1,0.5\n')
        self.assertEqual(path, os.path.join(self.root, 'check-0123456789ab', 'squares.csv'), 'Files go in the run dir')
        self.storage.write_contents('verdicts.json', b'{}\n', mode='wb')

        self.assertEqual(self.storage.read_contents('squares.csv'), 'side,mass\n1,0.5\n', 'Text comes back unchanged')
        self.assertEqual(self.storage.list_contents(), ['squares.csv', 'verdicts.json'], 'Sorted listing')

    def test_paths_stay_inside_the_run(self):
        with self.assertRaises(StorageAccessException, msg='Parent directories are off limits'):
            self.storage.relative('..', 'other-run', 'verdicts.json')
        with self.assertRaises(StorageAccessException, msg='The run directory itself is not a file'):
            self.storage.relative('.')

    def test_delete(self):
        self.storage.setup()
        self.storage.write_contents('squares.csv', 'side\n')
        self.storage.delete('squares.csv')
        self.assertEqual(self.storage.list_contents(), [], 'Single file removed')

        self.storage.delete()
        self.assertFalse(os.path.exists(self.storage.get_home()), 'Whole run directory removed')
        with self.assertRaises(IOError, msg='Nothing left to delete'):
            self.storage.delete()

    def test_configured_engine(self):
        storage = get_storage('measure-0123456789ab', root=self.root)
        self.assertIsInstance(storage, LocalStorage, 'Engine comes from the settings')
        self.assertEqual(storage.get_home(), os.path.join(self.root, 'measure-0123456789ab'), 'Run dir under root')
