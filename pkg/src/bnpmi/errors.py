"""Exception hierarchy shared by the library and the CLI."""


class BnpmiError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(BnpmiError, ValueError):
    """An argument violates a documented precondition."""


class DataError(BnpmiError):
    """Input data could not be read or does not have the required shape."""


class DegenerateInputError(BnpmiError):
    """The data makes an estimator undefined (constant column, all-identical points)."""
