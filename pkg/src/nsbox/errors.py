"""Exception hierarchy shared by every module."""


class NSBoxError(Exception):
    """Base class for errors raised by nsbox."""


class ArgumentError(NSBoxError, ValueError):
    """An argument is malformed, out of range or inconsistent with another."""


class CapacityError(NSBoxError):
    """A requested system exceeds the configured size cap."""


class InsufficientDataError(NSBoxError):
    """An estimator was handed too little data (e.g. zero coincidence counts)."""


class PreconditionError(NSBoxError):
    """An analysis was applied to an object outside its domain of validity."""
