"""Exception taxonomy shared across the package.

Exit codes used by the command line front end:
  2 -- schema / input violations
  3 -- mathematical domain errors (gates, transport failures, bad levels)
  4 -- enumeration budget exceeded
"""


class HilbertQError(Exception):
    exit_code = 1


class SchemaError(HilbertQError):
    exit_code = 2


class MathDomainError(HilbertQError):
    exit_code = 3


class GateError(MathDomainError):
    """A weight inequality required by an operator fails over the given ring."""


class TransportError(MathDomainError):
    """No transporter to a stored idele representative exists."""


class TruncationError(MathDomainError):
    """An operator would produce a family with no usable coefficients."""


class BudgetError(HilbertQError):
    exit_code = 4
