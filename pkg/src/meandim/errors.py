"""Error taxonomy shared by all modules.

The CLI maps these onto its exit-code contract: usage/validation problems
exit with 2, size-cap violations with 3, anything unexpected with 4.
"""


class MeanDimError(Exception):
    """Base class for all library errors."""


class UsageError(MeanDimError):
    """Mismatched or invalid arguments (wrong complex, bad descriptor, ...)."""


class ParameterError(UsageError):
    """A numeric parameter is out of its documented range."""


class ValidationError(UsageError):
    """A config or input file failed schema validation."""


class SizeCapError(MeanDimError):
    """An enumeration guard was exceeded; retry with a larger cap or smaller instance."""


class AdmissibilityError(MeanDimError):
    """No subordinate labeling exists at the requested level.

    Only possible at level 0; subdividing once always restores feasibility,
    so the message advises a larger level.
    """
