"""
Standalone entry point for the carleson-lab command

python3 scripts/carleson_lab.py check --mu tests/fixtures/specs/unit_atom.txt --criterion classical
python3 scripts/carleson_lab.py --manifest /tmp/carleson_lab/runs/check-0123456789ab/manifest.json
"""
import os
from pathlib import Path
import sys

import django

# Must configure standalone django usage before the management command can be loaded
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings.local')
sys.path.append(str(Path(__file__).parents[1].resolve()))
django.setup()

from django.core.management import execute_from_command_line  # noqa


if __name__ == '__main__':
    execute_from_command_line([sys.argv[0], 'carleson_lab', *sys.argv[1:]])
