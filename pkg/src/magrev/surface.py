"""Surfaces of revolution carrying rotationally invariant magnetic fields.

Two coordinate pictures are used throughout:

* the latitude picture ``dr^2 + f(r)^2 dphi^2`` with magnetic density
  ``b(r)`` (2-form ``b dr ^ dphi``), held by :class:`RadialProfile`;
* the action picture obtained from the monotone change ``a = a(r)`` with
  ``a'(r) = b(r)``, where the geometry is encoded by ``R(a) = b(r(a))^2``
  and ``F(a) = 1/f(r(a))^2``, held by :class:`ActionChart`.

The field is *homogeneous* (proportional to the area form) exactly when
``R*F`` is constant; charts built by :func:`bertrand_chart` additionally
have constant scalar curvature because R is a quadratic polynomial.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ChartFormatError,
    NonMonotoneAction,
    NonPositiveR,
    OutOfDomain,
    ZeroMagneticField,
)
from .jets import SmoothFn, jet_mul, jet_pullback, jet_recip, jet_scale

DEFAULT_GRID = 257
ZERO_FIELD_TOL = 1e-12

# relative RF spread below which a chart built from a profile is treated
# as homogeneous (analytic profiles land around 1e-15)
_HOMOGENEITY_DECIDE_RTOL = 1e-9

BUILTIN_CHART_NAMES = ("flat", "sphere", "hyperbolic", "exp", "quadratic_f")


def interior_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n uniformly spaced points strictly inside the open interval (lo, hi)."""
    if n < 1:
        raise ValueError("grid size must be positive")
    return lo + (hi - lo) * np.arange(1, n + 1) / (n + 1)


# ---------------------------------------------------------------------------
# latitude picture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    """Surface + field data in latitude coordinates.

    ``a`` is the antiderivative of ``b`` pinned by ``a(r_ref) = 0``; its jet
    is ``(a, b, b', b'')`` by construction.
    """

    interval: tuple[float, float]
    f: SmoothFn
    b: SmoothFn
    a: SmoothFn
    r_ref: float
    analytic: bool = True
    label: str = ""

    def contains(self, r: float) -> bool:
        return self.interval[0] < r < self.interval[1]

    def require(self, r: float) -> None:
        if not self.contains(r):
            raise OutOfDomain(
                f"latitude r={r!r} outside ({self.interval[0]!r}, {self.interval[1]!r})"
            )


def _validate_profile(profile: RadialProfile, grid_size: int) -> None:
    r = interior_grid(*profile.interval, grid_size)
    f_vals = np.asarray(profile.f(r), dtype=float)
    if not np.all(np.isfinite(f_vals)) or np.min(f_vals) <= 0.0:
        raise ValueError(f"parallel radius f must be positive on {profile.interval}")
    b_vals = np.asarray(profile.b(r), dtype=float)
    if np.min(np.abs(b_vals)) < ZERO_FIELD_TOL:
        i = int(np.argmin(np.abs(b_vals)))
        raise ZeroMagneticField(f"|b({r[i]!r})| < {ZERO_FIELD_TOL}")
    if np.min(b_vals) < 0.0 < np.max(b_vals):
        raise ZeroMagneticField("magnetic density changes sign on the interval")
    a_vals = np.asarray(profile.a(r), dtype=float)
    if not (np.all(np.diff(a_vals) > 0) or np.all(np.diff(a_vals) < 0)):
        raise NonMonotoneAction("a(r) is not strictly monotone on the sample grid")


def make_profile(
    interval: tuple[float, float],
    f: SmoothFn,
    b: SmoothFn,
    a: Optional[SmoothFn] = None,
    r_ref: Optional[float] = None,
    grid_size: int = DEFAULT_GRID,
    analytic: bool = True,
    label: str = "",
) -> RadialProfile:
    """Validated profile; ``a`` defaults to the antiderivative pinned at r_ref.

    If ``a`` is supplied it is re-pinned so that a(r_ref) = 0.  Without an
    explicit antiderivative the caller must pass one (analytic profiles) or
    use :func:`tabulated_profile`, which integrates the spline exactly.
    """
    r1, r2 = float(interval[0]), float(interval[1])
    if not r1 < r2:
        raise ValueError("empty latitude interval")
    if r_ref is None:
        r_ref = 0.5 * (r1 + r2)
    if a is None:
        raise ValueError("make_profile needs the antiderivative a of b")
    shift = float(a(r_ref))

    def a_jet(r, _a=a, _b=b, _shift=shift):
        bj = _b.jet(r)
        return (_a(r) - _shift, bj[0], bj[1], bj[2])

    profile = RadialProfile(
        interval=(r1, r2),
        f=f,
        b=b,
        a=SmoothFn(a_jet),
        r_ref=float(r_ref),
        analytic=analytic,
        label=label,
    )
    _validate_profile(profile, grid_size)
    return profile


def flat_cylinder_profile(interval=(0.0, 1.0)) -> RadialProfile:
    """f = 1, b = 1: flat metric with unit magnetic density."""
    return make_profile(
        interval,
        f=SmoothFn.constant(1.0),
        b=SmoothFn.constant(1.0),
        a=SmoothFn.polynomial([0.0, 1.0]),
        label="flat-cylinder",
    )


def sphere_profile(lam: float = 1.0, interval=(0.1, math.pi - 0.1)) -> RadialProfile:
    """Unit sphere band f = sin r with area-proportional density b = lam*sin r."""

    def f_jet(r):
        s, c = np.sin(r), np.cos(r)
        return (s, c, -s, -c)

    def b_jet(r):
        s, c = np.sin(r), np.cos(r)
        return (lam * s, lam * c, -lam * s, -lam * c)

    def a_jet(r):
        s, c = np.sin(r), np.cos(r)
        return (-lam * c, lam * s, lam * c, -lam * s)

    return make_profile(
        interval,
        f=SmoothFn(f_jet),
        b=SmoothFn(b_jet),
        a=SmoothFn(a_jet),
        label=f"sphere(lam={lam})",
    )


def hyperbolic_profile(lam: float = 1.0, interval=(-1.0, 1.0)) -> RadialProfile:
    """Constant curvature -1 band f = cosh r with b = lam*cosh r."""

    def f_jet(r):
        ch, sh = np.cosh(r), np.sinh(r)
        return (ch, sh, ch, sh)

    def b_jet(r):
        ch, sh = np.cosh(r), np.sinh(r)
        return (lam * ch, lam * sh, lam * ch, lam * sh)

    def a_jet(r):
        ch, sh = np.cosh(r), np.sinh(r)
        return (lam * sh, lam * ch, lam * sh, lam * ch)

    return make_profile(
        interval,
        f=SmoothFn(f_jet),
        b=SmoothFn(b_jet),
        a=SmoothFn(a_jet),
        label=f"hyperbolic(lam={lam})",
    )


def tabulated_profile(
    r: Sequence[float],
    f: Sequence[float],
    b: Sequence[float],
    r_ref: Optional[float] = None,
    interval: Optional[tuple[float, float]] = None,
    grid_size: int = DEFAULT_GRID,
) -> RadialProfile:
    """Profile from sampled (r, f, b) tables via cubic splines.

    The antiderivative of b is the exact antiderivative of the b-spline,
    so a' = b holds to spline accuracy.  Third derivatives are
    finite-difference quality (see :meth:`SmoothFn.from_spline`).
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or len(r) < 4:
        raise ChartFormatError("tabulated profile needs at least 4 samples")
    if not np.all(np.diff(r) > 0):
        raise ChartFormatError("table latitudes must be strictly increasing")
    if len(f) != len(r) or len(b) != len(r):
        raise ChartFormatError("table columns r, f, b must have equal length")

    from scipy.interpolate import CubicSpline

    b_spline = CubicSpline(r, np.asarray(b, dtype=float))
    a_spline = b_spline.antiderivative()
    a1 = a_spline.derivative(1)
    a2 = a_spline.derivative(2)
    a3 = a_spline.derivative(3)
    a_fn = SmoothFn.from_callables(a_spline, a1, a2, a3)

    if interval is None:
        interval = (float(r[0]), float(r[-1]))
    return make_profile(
        interval,
        f=SmoothFn.from_spline(r, f),
        b=SmoothFn.from_spline(r, b),
        a=a_fn,
        r_ref=r_ref,
        grid_size=grid_size,
        analytic=False,
        label="tabulated",
    )


def scalar_curvature_r(profile: RadialProfile, r: float) -> float:
    """Scalar curvature -2 f''(r) / f(r) in latitude coordinates."""
    profile.require(r)
    jet = profile.f.jet(r)
    return -2.0 * jet[2] / jet[0]


# ---------------------------------------------------------------------------
# action picture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionChart:
    """Surface + field pair in action coordinates.

    ``lambda_sq`` is the constant value of R*F when the field is
    homogeneous, otherwise None.  ``latitude_maps`` holds ``(a_of_r,
    r_of_a)`` for charts produced from a profile.
    """

    interval: tuple[float, float]
    R: SmoothFn
    F: SmoothFn
    representation: str  # "analytic" | "polynomial" | "tabulated"
    label: str = ""
    lambda_sq: Optional[float] = None
    latitude_maps: Optional[tuple[Callable, Callable]] = None

    @property
    def homogeneous(self) -> bool:
        return self.lambda_sq is not None

    def contains(self, a: float) -> bool:
        return self.interval[0] < a < self.interval[1]

    def require(self, a: float) -> None:
        if not self.contains(a):
            raise OutOfDomain(
                f"action a={a!r} outside ({self.interval[0]!r}, {self.interval[1]!r})"
            )

    def grid(self, n: int = DEFAULT_GRID) -> np.ndarray:
        return interior_grid(*self.interval, n)


@dataclass(frozen=True)
class CurvatureReport:
    """Sampled scalar curvature with a constancy verdict."""

    samples: np.ndarray  # shape (n, 2): columns (a, Scal)
    mean: float
    max_deviation: float
    is_constant: bool
    homogeneous: bool


def to_action_chart(profile: RadialProfile, grid_size: int = DEFAULT_GRID) -> ActionChart:
    """Chart from the monotone latitude change a = a(r).

    The inverse map r(a) is a monotone interpolant refined by Newton steps
    with the analytic slope a' = b; round trips r -> a -> r hold to ~1e-12.
    """
    _validate_profile(profile, grid_size)
    r1, r2 = profile.interval

    dense_n = max(4 * grid_size + 1, 1025)
    r_dense = np.linspace(r1, r2, dense_n)
    a_dense = np.asarray(profile.a(r_dense), dtype=float)
    increasing = a_dense[-1] > a_dense[0]
    if increasing:
        seed = PchipInterpolator(a_dense, r_dense)
    else:
        seed = PchipInterpolator(a_dense[::-1], r_dense[::-1])
    a_lo, a_hi = (a_dense[0], a_dense[-1]) if increasing else (a_dense[-1], a_dense[0])

    a_fn, b_fn, f_fn = profile.a, profile.b, profile.f

    def r_of_a(a):
        a = np.asarray(a, dtype=float)
        r = np.clip(seed(a), r1, r2)
        for _ in range(3):  # quadratic convergence from the interpolant seed
            r = np.clip(r - (a_fn(r) - a) / b_fn(r), r1, r2)
        return r

    def a_of_r(r):
        return a_fn(r)

    def R_jet(a):
        r = r_of_a(a)
        bj = b_fn.jet(r)
        return jet_pullback(jet_mul(bj, bj), bj)

    def F_jet(a):
        r = r_of_a(a)
        bj = b_fn.jet(r)
        fj = f_fn.jet(r)
        return jet_pullback(jet_recip(jet_mul(fj, fj)), bj)

    chart = ActionChart(
        interval=(a_lo, a_hi),
        R=SmoothFn(R_jet),
        F=SmoothFn(F_jet),
        representation="analytic" if profile.analytic else "tabulated",
        label=profile.label,
        lambda_sq=None,
        latitude_maps=(a_of_r, r_of_a),
    )

    # decide homogeneity once, on the construction grid
    mean, defect = homogeneity_defect(chart, grid_size)
    if defect <= _HOMOGENEITY_DECIDE_RTOL * abs(mean):
        chart = ActionChart(
            interval=chart.interval,
            R=chart.R,
            F=chart.F,
            representation=chart.representation,
            label=chart.label,
            lambda_sq=mean,
            latitude_maps=chart.latitude_maps,
        )
    return chart


def homogeneity_defect(chart: ActionChart, grid_size: int = DEFAULT_GRID) -> tuple[float, float]:
    """(mean of R*F, sup |R*F - mean|) over the interior sample grid."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    a = chart.grid(grid_size)
    rf = np.asarray(chart.R(a), dtype=float) * np.asarray(chart.F(a), dtype=float)
    mean = float(np.mean(rf))
    return mean, float(np.max(np.abs(rf - mean)))


def scalar_curvature_a(chart: ActionChart, a: float) -> float:
    """Scalar curvature in action coordinates.

    Homogeneous charts use Scal = -(lambda^2/F)'' = -R''.  Otherwise the
    pointwise surrogate lambda^2(a) (F''F - 2 F'^2) / F^3 with
    lambda^2(a) = R(a) F(a) is returned; such charts are flagged as
    non-homogeneous in :func:`curvature_report`.
    """
    chart.require(a)
    if chart.homogeneous:
        return -float(chart.R.d(a, 2))
    F0, F1, F2, _ = chart.F.jet(a)
    lam2 = float(chart.R(a)) * float(F0)
    return lam2 * (F2 * F0 - 2.0 * F1 * F1) / F0 ** 3


def curvature_report(
    chart: ActionChart, grid_size: int = DEFAULT_GRID, tol: float = 1e-6
) -> CurvatureReport:
    a = chart.grid(grid_size)
    scal = np.array([scalar_curvature_a(chart, float(x)) for x in a])
    mean = float(np.mean(scal))
    dev = float(np.max(np.abs(scal - mean)))
    return CurvatureReport(
        samples=np.column_stack([a, scal]),
        mean=mean,
        max_deviation=dev,
        is_constant=dev <= tol,
        homogeneous=chart.homogeneous,
    )


def bertrand_chart(
    scal: float,
    lam1: float,
    lam2: float,
    lam_sq: float,
    interval: tuple[float, float],
) -> ActionChart:
    """Homogeneous constant-curvature chart.

    R(a) = lam1 + lam2*a - scal*a^2/2 and F = lam_sq / R, so R*F = lam_sq
    exactly and the scalar curvature -R'' = scal everywhere.
    """
    a1, a2 = float(interval[0]), float(interval[1])
    if not a1 < a2:
        raise ValueError("empty action interval")
    if lam_sq <= 0.0:
        raise ValueError("lam_sq must be positive")

    c2 = -0.5 * scal
    ends = [lam1 + lam2 * a1 + c2 * a1 * a1, lam1 + lam2 * a2 + c2 * a2 * a2]
    if min(ends) < 0.0:
        raise NonPositiveR(f"R takes value {min(ends)!r} at an interval endpoint")
    if c2 != 0.0:
        vertex = -lam2 / (2.0 * c2)
        if a1 < vertex < a2 and lam1 + lam2 * vertex + c2 * vertex * vertex <= 0.0:
            raise NonPositiveR(f"R is non-positive at its vertex a={vertex!r}")

    R = SmoothFn.polynomial([lam1, lam2, c2])
    F = SmoothFn.reciprocal(R, numerator=lam_sq)
    return ActionChart(
        interval=(a1, a2),
        R=R,
        F=F,
        representation="polynomial",
        label=f"bertrand(scal={scal}, lam1={lam1}, lam2={lam2}, lam_sq={lam_sq})",
        lambda_sq=float(lam_sq),
    )


def _exp_chart(rate: float = 1.0, lam_sq: float = 1.0, interval=(-1.0, 1.0)) -> ActionChart:
    # Homogeneous but with non-constant curvature -R'' = -lam_sq*rate^2*exp(-rate*a):
    # the stock counterexample for the constant-curvature condition.
    return ActionChart(
        interval=(float(interval[0]), float(interval[1])),
        R=SmoothFn.exponential(rate=-rate, amplitude=lam_sq),
        F=SmoothFn.exponential(rate=rate),
        representation="analytic",
        label=f"exp(rate={rate}, lam_sq={lam_sq})",
        lambda_sq=float(lam_sq),
    )


def _quadratic_f_chart(interval=(-2.0, 2.0)) -> ActionChart:
    # R = 1, F = 1 + a^2: non-homogeneous reference chart.
    return ActionChart(
        interval=(float(interval[0]), float(interval[1])),
        R=SmoothFn.constant(1.0),
        F=SmoothFn.polynomial([1.0, 0.0, 1.0]),
        representation="analytic",
        label="quadratic_f",
        lambda_sq=None,
    )


def builtin_chart(name: str, interval: Optional[tuple[float, float]] = None, **params) -> ActionChart:
    """Named charts used across the test and acceptance suites.

    flat / sphere / hyperbolic are the constant-curvature homogeneous
    charts with Scal = 0 / 2 / -2; exp is homogeneous with non-constant
    curvature; quadratic_f is non-homogeneous.
    """
    if name == "flat":
        chart = bertrand_chart(0.0, params.pop("lam1", 1.0), 0.0, params.pop("lambda_sq", 1.0), interval or (-1.0, 1.0))
        return ActionChart(
            interval=chart.interval, R=chart.R, F=chart.F,
            representation=chart.representation, label="flat", lambda_sq=chart.lambda_sq,
        )
    if name == "sphere":
        chart = bertrand_chart(2.0, 1.0, 0.0, params.pop("lambda_sq", 1.0), interval or (-0.85, 0.85))
        return ActionChart(
            interval=chart.interval, R=chart.R, F=chart.F,
            representation=chart.representation, label="sphere", lambda_sq=chart.lambda_sq,
        )
    if name == "hyperbolic":
        chart = bertrand_chart(-2.0, 1.0, 0.0, params.pop("lambda_sq", 1.0), interval or (-1.0, 1.0))
        return ActionChart(
            interval=chart.interval, R=chart.R, F=chart.F,
            representation=chart.representation, label="hyperbolic", lambda_sq=chart.lambda_sq,
        )
    if name == "exp":
        return _exp_chart(
            rate=params.pop("rate", 1.0),
            lam_sq=params.pop("lambda_sq", 1.0),
            interval=interval or (-1.0, 1.0),
        )
    if name == "quadratic_f":
        return _quadratic_f_chart(interval or (-2.0, 2.0))
    raise ChartFormatError(f"unknown builtin chart {name!r}")


# ---------------------------------------------------------------------------
# chart definition files
# ---------------------------------------------------------------------------


def chart_from_dict(spec: Mapping) -> ActionChart:
    """Chart from a definition mapping.

    Schema: ``family`` (builtin name, "bertrand" or "tabulated"),
    optional ``params`` (map of reals), optional ``interval`` ([lo, hi];
    action interval except for "tabulated", where it crops the latitude
    range), and for "tabulated" a ``table`` with arrays r, f, b.
    """
    if not isinstance(spec, Mapping):
        raise ChartFormatError("chart definition must be a JSON object")
    family = spec.get("family")
    if not isinstance(family, str):
        raise ChartFormatError("chart definition needs a 'family' string")
    params = spec.get("params", {})
    if not isinstance(params, Mapping):
        raise ChartFormatError("'params' must be a mapping")
    interval = spec.get("interval")
    if interval is not None:
        try:
            interval = (float(interval[0]), float(interval[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise ChartFormatError("'interval' must be a pair of reals") from exc

    try:
        if family == "bertrand":
            return bertrand_chart(
                scal=float(params["scal"]),
                lam1=float(params["lam1"]),
                lam2=float(params.get("lam2", 0.0)),
                lam_sq=float(params.get("lambda_sq", 1.0)),
                interval=interval or (-1.0, 1.0),
            )
        if family == "tabulated":
            table = spec.get("table")
            if not isinstance(table, Mapping):
                raise ChartFormatError("tabulated chart needs a 'table' object")
            missing = [k for k in ("r", "f", "b") if k not in table]
            if missing:
                raise ChartFormatError(f"table is missing columns: {missing}")
            profile = tabulated_profile(
                table["r"], table["f"], table["b"],
                r_ref=params.get("r_ref"),
                interval=interval,
                grid_size=int(params.get("grid_size", DEFAULT_GRID)),
            )
            return to_action_chart(profile, grid_size=int(params.get("grid_size", DEFAULT_GRID)))
        if family in BUILTIN_CHART_NAMES:
            return builtin_chart(family, interval=interval, **dict(params))
    except KeyError as exc:
        raise ChartFormatError(f"missing chart parameter: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ChartFormatError(f"bad chart parameters: {exc}") from exc
    raise ChartFormatError(f"unknown chart family {family!r}")


def chart_from_file(path: str) -> ActionChart:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise ChartFormatError(f"cannot read chart file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ChartFormatError(f"chart file {path!r} is not valid JSON: {exc}") from exc
    return chart_from_dict(spec)
