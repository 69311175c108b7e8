"""Exception hierarchy shared by all modules."""


class MagscatError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MagscatError, ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureError(MagscatError, ArithmeticError):
    """An integrand produced a non-finite value at a quadrature node."""

    def __init__(self, node, value):
        super().__init__(f"non-finite integrand value {value!r} at node s={node!r}")
        self.node = node
        self.value = value


class UndefinedExponentError(MagscatError, ArithmeticError):
    """The function vanishes (or is non-finite) on the exponent-fit window."""


class ExtrapolationError(MagscatError, ArithmeticError):
    """Richardson extrapolation failed to converge."""

    def __init__(self, message, ladder):
        super().__init__(f"{message}; ladder={list(ladder)!r}")
        self.ladder = list(ladder)


class ResidualError(MagscatError, ArithmeticError):
    """A transport level failed its residual check."""

    def __init__(self, level, residual, tol):
        super().__init__(
            f"transport level {level}: residual {residual:.3e} exceeds tolerance {tol:.1e}"
        )
        self.level = level
        self.residual = residual
        self.tol = tol


class RankDeficientError(MagscatError, ArithmeticError):
    """Every singular value of a design matrix is below the rank floor."""


class UnsupportedDimensionError(DomainError):
    """The requested sphere dimension is not supported by this operation."""
