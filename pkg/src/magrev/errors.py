"""Exception types shared across the package.

All library errors derive from :class:`MagrevError`.  The CLI maps
:class:`ChartFormatError` (and bad chart definitions generally) to exit
code 2 and the remaining domain/numerical failures to exit code 3.
"""


class MagrevError(Exception):
    """Base class for all library errors."""


class ChartFormatError(MagrevError):
    """A chart definition (file or dict) is malformed or inconsistent."""


class ZeroMagneticField(MagrevError):
    """The magnetic density vanishes (or changes sign) on the latitude range."""


class NonMonotoneAction(MagrevError):
    """The antiderivative of the magnetic density is not strictly monotone."""


class NonPositiveR(MagrevError):
    """The requested polynomial chart has R <= 0 somewhere on its interval."""


class OutOfDomain(MagrevError):
    """A coordinate lies outside the open interval of a chart or profile."""


class NonPositiveEpsilon(MagrevError):
    """A momentum scale change requires eps > 0."""


class LeftDomain(MagrevError):
    """A trajectory left the open action interval during integration."""


class NoConvergence(MagrevError):
    """An implicit stage equation or root search failed to converge."""


class NoCircularOrbit(MagrevError):
    """F'(a) vanishes, so only the equilibrium branch of relative equilibria exists."""


class DegenerateSpeed(MagrevError):
    """A trajectory sample has (numerically) zero velocity."""


class NoTurningPoints(MagrevError):
    """The reduced radicand has no pair of simple roots for these parameters."""


class QuadratureNotConverged(MagrevError):
    """Node doubling hit its cap before the quadrature stabilised."""


class NewtonFailed(MagrevError):
    """The (E, K) match to prescribed turning latitudes failed."""


class NotHomogeneous(MagrevError):
    """An operation that assumes R*F = const was applied to a non-homogeneous chart."""
