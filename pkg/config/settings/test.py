from .base import *  # noqa
from .base import env

SECRET_KEY = env("DJANGO_SECRET_KEY", default="GgT7r-3]*?]=xDpA|KM4(YB;n;$>B;E!;HT,ZkCq+[-RNK.~}tp6q(2O%|&|bVL")

TEST_RUNNER = "django.test.runner.DiscoverRunner"

# Smaller default grids keep the suite fast; individual tests pass explicit grids when they need more
CARLESON_LAB['LAMBDA_RE'] = (2.0 ** -4, 2.0 ** 6, 21)  # noqa F405
CARLESON_LAB['LAMBDA_IM'] = (8.0, 9)  # noqa F405
CARLESON_LAB['PROBE_POINTS'] = 81  # noqa F405

LOGGING['loggers']['carleson_lab']['level'] = 'WARNING'  # noqa F405
