"""Exception hierarchy. The CLI maps ValidationError to exit code 1 and
NumericalError to exit code 2."""


class GatelabError(Exception):
    pass


class ValidationError(GatelabError, ValueError):
    """Bad input: unknown option, missing unit suffix, out-of-range value."""


class NumericalError(GatelabError, ArithmeticError):
    """A numerical procedure failed or could not certify its result."""


class OracleUnconverged(NumericalError):
    pass


class AmbiguousLabelingError(NumericalError):
    """Eigenvector tracking could not match a dressed level to its bare label."""
