"""Run and manifest exceptions"""
from carleson_lab.analysis.exceptions import BaseCarlesonException


class UnknownCommand(BaseCarlesonException):
    DEFAULT_MESSAGE = "No runner is configured for this subcommand"


class UnknownOption(BaseCarlesonException):
    """A named choice (criterion, Sobolev mode, operation) that the runner does not recognize"""
    DEFAULT_MESSAGE = "Unrecognized option value"


class InvalidManifest(BaseCarlesonException):
    DEFAULT_MESSAGE = "Run manifest is missing required fields"


class ManifestMismatch(InvalidManifest):
    """An input spec file changed since the manifest was written, so a replay would not reproduce the run"""
    DEFAULT_MESSAGE = "Spec file no longer matches the hash recorded in the manifest"
