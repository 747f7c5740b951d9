"""Exception hierarchy shared by every module."""


class SecrecyRelayError(Exception):
    """Base class for all package errors."""


class ValidationError(SecrecyRelayError, ValueError):
    """Malformed input: bad pmf, overlapping axis groups, schema violation."""


class NumericalDomainError(SecrecyRelayError, ArithmeticError):
    """A quantity left its numerical domain (singular noise covariance, ...)."""


class GeometryError(SecrecyRelayError, ValueError):
    """Node placement that cannot be turned into finite channel gains."""


class ContractError(SecrecyRelayError, ValueError):
    """A caller asked for something the evaluator does not define."""


class InfeasibleError(SecrecyRelayError):
    """No feasible point exists on the search grid."""


class BudgetExceededError(SecrecyRelayError):
    """An enumeration or search would exceed its configured budget."""
