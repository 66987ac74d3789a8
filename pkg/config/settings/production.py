from .base import *  # noqa
from .base import env

# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env('DJANGO_SECRET_KEY')

# Batch runs on shared machines write to a configured volume; there is no sensible default
CARLESON_LAB['OUT_DIR'] = env('CARLESON_LAB_OUT_DIR')  # noqa F405
