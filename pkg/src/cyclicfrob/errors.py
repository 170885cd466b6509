"""Exception types raised across the package."""


class CyclicFrobError(Exception):
    """Base class for all errors raised by cyclicfrob."""


class NonPrime(CyclicFrobError, ValueError):
    pass


class FieldTooLarge(CyclicFrobError, ValueError):
    pass


class ExtensionTooLarge(FieldTooLarge):
    pass


class BadCongruence(CyclicFrobError, ValueError):
    """q is not 1 modulo the requested character order."""


class ZeroPolynomial(CyclicFrobError, ValueError):
    pass


class BothZero(ZeroPolynomial):
    pass


class DegreeTooLarge(CyclicFrobError, ValueError):
    pass


class TooMany(CyclicFrobError, ValueError):
    pass


class NonIntegerResult(CyclicFrobError, ArithmeticError):
    """An exact sum that must be a rational integer was not one."""


class NonIntegralGenus(CyclicFrobError, ValueError):
    pass


class EmptyFamily(CyclicFrobError, ValueError):
    pass


class FamilyTooLarge(CyclicFrobError, ValueError):
    pass


class RHViolation(CyclicFrobError, ArithmeticError):
    pass


class OutOfRange(CyclicFrobError, ValueError):
    pass


class SupportViolation(CyclicFrobError, ValueError):
    pass


class UnsupportedDirectEval(CyclicFrobError, ValueError):
    pass
