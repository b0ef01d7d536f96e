"""Third-order jet arithmetic and smooth scalar functions.

A *jet* here is the tuple ``(f, f', f'', f''')`` of a function and its first
three derivatives evaluated at a point (scalars or numpy arrays).  Chart
coordinate functions are carried as :class:`SmoothFn` objects so curvature,
turning-point and Taylor computations all see consistent analytic
derivatives instead of ad-hoc finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline


def jet_mul(u, v):
    """Leibniz product rule through order three."""
    u0, u1, u2, u3 = u
    v0, v1, v2, v3 = v
    return (
        u0 * v0,
        u1 * v0 + u0 * v1,
        u2 * v0 + 2.0 * u1 * v1 + u0 * v2,
        u3 * v0 + 3.0 * u2 * v1 + 3.0 * u1 * v2 + u0 * v3,
    )


def jet_recip(u):
    """Jet of 1/u."""
    u0, u1, u2, u3 = u
    w = 1.0 / u0
    w2 = w * w
    return (
        w,
        -u1 * w2,
        (2.0 * u1 * u1 - u0 * u2) * w2 * w,
        (6.0 * u0 * u1 * u2 - 6.0 * u1 ** 3 - u0 * u0 * u3) * w2 * w2,
    )


def jet_scale(u, c):
    return (c * u[0], c * u[1], c * u[2], c * u[3])


def jet_pullback(g, b):
    """Jet of ``g`` re-expressed in the variable a with da/dr = b.

    ``g`` is the r-jet of the function, ``b`` the r-jet of the density
    (only b, b', b'' are used).  Repeated application of d/da = (1/b) d/dr.
    """
    g0, g1, g2, g3 = g
    b0, b1, b2 = b[0], b[1], b[2]
    ib = 1.0 / b0
    ib2 = ib * ib
    ib3 = ib2 * ib
    ib4 = ib2 * ib2
    ib5 = ib4 * ib
    return (
        g0,
        g1 * ib,
        g2 * ib2 - g1 * b1 * ib3,
        g3 * ib3 - 3.0 * g2 * b1 * ib4 - g1 * b2 * ib4 + 3.0 * g1 * b1 * b1 * ib5,
    )


@dataclass(frozen=True)
class SmoothFn:
    """Scalar function with analytic derivatives through order three.

    ``jet_fn(x)`` must return the tuple ``(f, f', f'', f''')`` and accept
    scalars as well as numpy arrays.
    """

    jet_fn: Callable

    def __call__(self, x):
        return self.jet_fn(x)[0]

    def d(self, x, order: int = 1):
        return self.jet_fn(x)[order]

    def jet(self, x):
        return self.jet_fn(x)

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(c: float) -> "SmoothFn":
        def jet(x):
            z = 0.0 * np.asarray(x, dtype=float)
            return (c + z, z, z, z)

        return SmoothFn(jet)

    @staticmethod
    def polynomial(coeffs: Sequence[float]) -> "SmoothFn":
        """Polynomial with coefficients in increasing-degree order."""
        p0 = np.polynomial.Polynomial(list(coeffs))
        p1 = p0.deriv(1)
        p2 = p0.deriv(2)
        p3 = p0.deriv(3)

        def jet(x):
            return (p0(x), p1(x), p2(x), p3(x))

        return SmoothFn(jet)

    @staticmethod
    def exponential(rate: float = 1.0, amplitude: float = 1.0) -> "SmoothFn":
        """amplitude * exp(rate * x); one exp call feeds the whole jet."""

        def jet(x):
            e = amplitude * np.exp(rate * np.asarray(x, dtype=float))
            r = rate
            return (e, r * e, r * r * e, r ** 3 * e)

        return SmoothFn(jet)

    @staticmethod
    def reciprocal(fn: "SmoothFn", numerator: float = 1.0) -> "SmoothFn":
        def jet(x):
            return jet_scale(jet_recip(fn.jet(x)), numerator)

        return SmoothFn(jet)

    @staticmethod
    def from_callables(f, d1, d2, d3) -> "SmoothFn":
        def jet(x):
            return (f(x), d1(x), d2(x), d3(x))

        return SmoothFn(jet)

    @staticmethod
    def from_spline(x: Sequence[float], y: Sequence[float]) -> "SmoothFn":
        """Cubic-spline interpolant.

        The third derivative of a cubic spline is piecewise constant and
        useless pointwise, so it is replaced by a central finite difference
        of the spline's second derivative (clamped at the table edges).
        Accuracy at order three is therefore best-effort.
        """
        x = np.asarray(x, dtype=float)
        spline = CubicSpline(x, np.asarray(y, dtype=float))
        s1 = spline.derivative(1)
        s2 = spline.derivative(2)
        lo, hi = float(x[0]), float(x[-1])
        step = max(1e-6, 1e-4 * (hi - lo))

        def d3(z):
            z = np.asarray(z, dtype=float)
            zp = np.clip(z + step, lo, hi)
            zm = np.clip(z - step, lo, hi)
            return (s2(zp) - s2(zm)) / (zp - zm)

        def jet(z):
            return (spline(z), s1(z), s2(z), d3(z))

        return SmoothFn(jet)


def fd_derivative(fn: Callable, x: float, order: int = 1, step: float = 1e-5) -> float:
    """Central finite difference of ``fn`` (orders 1..3); used by checks."""
    if order == 1:
        return (fn(x + step) - fn(x - step)) / (2.0 * step)
    if order == 2:
        return (fn(x + step) - 2.0 * fn(x) + fn(x - step)) / step ** 2
    if order == 3:
        return (
            fn(x + 2.0 * step)
            - 2.0 * fn(x + step)
            + 2.0 * fn(x - step)
            - fn(x - 2.0 * step)
        ) / (2.0 * step ** 3)
    raise ValueError(f"unsupported derivative order {order}")
