"""Exception types raised across the package."""


class QshError(Exception):
    """Base class for all package errors."""


class RealAxisPoint(QshError, ValueError):
    """The imaginary part of a point is too small for the operation (J, spherical derivative)."""


class SingularDenominator(QshError, ZeroDivisionError):
    """A quaternion that must be inverted is (numerically) zero."""


class DomainMargin(QshError, ValueError):
    """A finite-difference or quadrature stencil leaves the region where the field is finite."""


class PoleOnCircle(QshError, ValueError):
    """A circle quadrature node evaluates to -inf."""


class OutsideDomain(QshError, ValueError):
    """A point lies outside the domain of the requested function."""


class DomainEscape(QshError, ValueError):
    """A regular map sends probe points outside the domain of the field it is composed with."""


class NoClosedForm(QshError, NotImplementedError):
    """No closed form or oracle is available for the requested Green function."""
