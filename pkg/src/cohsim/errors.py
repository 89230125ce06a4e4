"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: configuration 2, data 3, numerical 4.
"""


class CohsimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CohsimError):
    """Invalid grid, geometry, preset or parameter combination."""


class ContractError(CohsimError):
    """An operation was handed inputs that violate its preconditions
    (grid or wavelength mismatch, malformed stage list, ...)."""


class DataError(CohsimError):
    """Broken input files: IDX parse failures, manifest/hash mismatches."""


class NumericalAbortError(CohsimError):
    """A computation produced non-finite samples and was aborted."""
