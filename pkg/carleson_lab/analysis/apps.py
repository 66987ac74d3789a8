"""Measures, decompositions and embedding criteria"""

from django.apps import AppConfig


class AnalysisConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'carleson_lab.analysis'
