"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for malformed input, 3 for an exhausted word budget, 4 when a
mathematical hypothesis of a check does not hold.
"""


class SralError(Exception):
    exit_code = 1


class InputError(SralError, ValueError):
    exit_code = 2


class BudgetExceeded(SralError):
    exit_code = 3


class HypothesisViolation(SralError):
    exit_code = 4


# input errors
class NonSquare(InputError):
    pass


class InvalidP(InputError):
    pass


class DimMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class RowSumExceeded(InputError):
    pass


class CoefficientTooLarge(InputError):
    pass


class NodeCountZero(InputError):
    pass


class TooFewFactors(InputError):
    pass


class NotAnEigenvalue(InputError):
    pass


class EigenvalueOnContour(InputError):
    pass


class SingularResolvent(InputError):
    pass


# hypothesis violations
class RadiusNotBelowOne(HypothesisViolation):
    pass


class ClosureViolated(HypothesisViolation):
    pass


class NotInAlgebra(HypothesisViolation):
    pass


class IdealNotNil(HypothesisViolation):
    pass


class NotNilFamily(HypothesisViolation):
    pass


class ChainNotInvariant(HypothesisViolation):
    pass


class RadicalHypothesisViolated(HypothesisViolation):
    pass


class NonFiniteOperator(HypothesisViolation):
    pass


class NotSurjectiveOnSubspace(HypothesisViolation):
    pass


class ContractionFails(HypothesisViolation):
    pass
