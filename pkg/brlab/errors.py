"""Exception hierarchy for brlab"""


class BrlabError(Exception):
    """Base class for every error raised by the toolkit"""


class DomainError(BrlabError, ValueError):
    """Parameter outside the range an operation is defined for.

    The message names the violated constraint verbatim, e.g.
    ``requires 1/2 < Re α < 1``.
    """


class SingularSetError(DomainError):
    """Evaluation requested on a singular set such as the light cone |τ| = |ξ|"""


class InfeasibleError(DomainError):
    """A constraint system has no solution"""


class ConfigError(BrlabError, ValueError):
    """Invalid grid specification, extent or configuration file"""


class InputError(BrlabError, ValueError):
    """Malformed input data (e.g. too few points for a fit)"""


class NumericalError(BrlabError, ArithmeticError):
    """Non-finite value produced during quadrature or evaluation"""


class ConstructionError(BrlabError, RuntimeError):
    """A geometric construction failed its own certificate"""
