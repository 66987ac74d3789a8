"""
Django settings for the carleson_lab project.

The project uses Django for configuration, the management-command CLI and the test runner. There is no web
surface and no database.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""

from pathlib import Path

import environ

env = environ.Env()

ROOT_DIR = Path(__file__).parents[2]

READ_DOT_ENV_FILE = env.bool('DJANGO_READ_DOT_ENV_FILE', default=False)
if READ_DOT_ENV_FILE:
    # OS environment variables take precedence over variables from .env
    env.read_env(str(ROOT_DIR / '.env'))


# General Django settings
DEBUG = env.bool('DJANGO_DEBUG', False)

TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True
LANGUAGE_CODE = 'en-us'

# No models are defined; commands and tests never open a connection.
DATABASES = {}

# Application definition
DJANGO_APPS = [
    'django.contrib.auth',  # DRF field machinery imports auth helpers even when only plain Serializers are used
    'django.contrib.contenttypes',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'carleson_lab.analysis.apps.AnalysisConfig',
    'carleson_lab.cli.apps.CliConfig',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


def _setting(key: str, cast, default):
    """Every numeric knob can be overridden by an environment variable named CARLESON_LAB_<KEY>"""
    return cast(f'CARLESON_LAB_{key}', default=default)


CARLESON_LAB = {
    # Adaptive quadrature (scipy.integrate.quad and the composite Gauss-Legendre rule)
    'QUAD_RTOL': _setting('QUAD_RTOL', env.float, 1e-9),
    'QUAD_ATOL': _setting('QUAD_ATOL', env.float, 1e-14),
    'QUAD_LIMIT': _setting('QUAD_LIMIT', env.int, 200),
    # Dyadic blocks summed when an integral runs to 0 or to infinity, before divergence is declared
    'QUAD_MAX_BLOCKS': _setting('QUAD_MAX_BLOCKS', env.int, 400),

    # Carleson square families: geometric side grid x center grid
    'SIDE_RATIO': _setting('SIDE_RATIO', env.float, 2 ** 0.25),
    'SIDE_MIN': _setting('SIDE_MIN', env.float, 2.0 ** -6),
    'SIDE_MAX': _setting('SIDE_MAX', env.float, 2.0 ** 10),
    'CENTER_SPAN': _setting('CENTER_SPAN', env.int, 4),  # dyadic centers per side, each direction

    # Probe radii for doubling diagnostics
    'PROBE_MIN': _setting('PROBE_MIN', env.float, 2.0 ** -20),
    'PROBE_MAX': _setting('PROBE_MAX', env.float, 2.0 ** 20),
    'PROBE_POINTS': _setting('PROBE_POINTS', env.int, 161),
    'DOUBLING_CAP': _setting('DOUBLING_CAP', env.float, 1e6),

    # A verdict fails when its constant exceeds this cap
    'VERDICT_CAP': _setting('VERDICT_CAP', env.float, 1e3),

    'BISECTION_STEPS': _setting('BISECTION_STEPS', env.int, 60),
    'INDEX_WINDOW': tuple(env.list('CARLESON_LAB_INDEX_WINDOW', cast=int, default=[-3, 6])),
    'TILE_EXTENT_FACTOR': _setting('TILE_EXTENT_FACTOR', env.int, 64),

    # Test-point grids: real parts are geometric, imaginary parts linear
    'LAMBDA_RE': (
        _setting('LAMBDA_RE_MIN', env.float, 2.0 ** -6),
        _setting('LAMBDA_RE_MAX', env.float, 2.0 ** 8),
        _setting('LAMBDA_RE_POINTS', env.int, 43),
    ),
    'LAMBDA_IM': (
        _setting('LAMBDA_IM_SPAN', env.float, 16.0),
        _setting('LAMBDA_IM_POINTS', env.int, 17),
    ),

    # Grid refinement: double densities until the constant moves less than this
    'REFINE_TOLERANCE': _setting('REFINE_TOLERANCE', env.float, 0.01),
    'REFINE_MAX_ROUNDS': _setting('REFINE_MAX_ROUNDS', env.int, 4),

    'SEED': _setting('SEED', env.int, 0),

    # WHERE results are written
    'STORAGE_ENGINE': 'carleson_lab.cli.storage.local.LocalStorage',
    'OUT_DIR': env('CARLESON_LAB_OUT_DIR', default='/tmp/carleson_lab/runs'),

    # One runner class per subcommand
    'COMMANDS': {
        'measure': 'carleson_lab.cli.runners.commands.MeasureRunner',
        'decompose': 'carleson_lab.cli.runners.commands.DecomposeRunner',
        'pw-check': 'carleson_lab.cli.runners.commands.PaleyWienerRunner',
        'balayage': 'carleson_lab.cli.runners.commands.BalayageRunner',
        'check': 'carleson_lab.cli.runners.commands.CheckRunner',
        'hankel': 'carleson_lab.cli.runners.commands.HankelRunner',
        'admiss': 'carleson_lab.cli.runners.commands.AdmissRunner',
        'counterexample': 'carleson_lab.cli.runners.commands.CounterexampleRunner',
    },
}

LOG_LEVEL = env('CARLESON_LAB_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(levelname)s %(asctime)s %(module)s %(process)d %(message)s'
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose'
        }
    },
    'loggers': {
        '': {  # Root logger; catchall for any module
            'level': LOG_LEVEL,
            'handlers': ['console'],
        },
        'carleson_lab': {
            'level': LOG_LEVEL,
            'handlers': ['console'],
            'propagate': False,
        },
    },
}
