from .local import LocalStorage  # noqa
