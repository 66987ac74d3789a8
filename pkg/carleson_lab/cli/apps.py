"""Command line front end: spec files, runners and run manifests"""

from django.apps import AppConfig


class CliConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleson_lab.cli'
