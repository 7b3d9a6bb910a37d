"""Exception types shared across the package."""


class PolymixError(Exception):
    """Base class for package errors."""


class InvalidPathError(PolymixError):
    """A height or increment sequence does not describe a valid pinned path."""


class CapacityError(PolymixError):
    """An enumeration or assembly would exceed the configured memory budget."""


class ConvergenceError(PolymixError):
    """An iterative numerical routine failed to converge."""
