"""Reduced one-degree-of-freedom system: turning points, periods, apsidal data.

After the guiding-centre and scale changes the latitude oscillation is
governed by the radicand ``g(u) = 2*Ehat - F(kappa - eps*u) * u**2`` in the
reduced coordinate ``u = p_phi_hat``.  Its two simple roots ``A- < 0 < A+``
bound the oscillation; the radial period and the per-period longitude
increment are quadratures between them with inverse-square-root endpoint
singularities, removed analytically by the substitution
``u = m + w*sin(theta)`` (m the root midpoint, w the half width).

The longitude increment Phi is reported divided by eps^2, which stays
finite as eps -> 0 and has the closed-form limit
``pi*Ehat*(R'F + RF')/(RF)^(3/2)``.  Phi is the increment over one full
radial period (pericentre to pericentre).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    NewtonFailed,
    NoTurningPoints,
    NotHomogeneous,
    OutOfDomain,
    QuadratureNotConverged,
)
from .surface import ActionChart, homogeneity_defect

_MAX_NODES = 2 ** 14


@dataclass(frozen=True)
class ReducedParams:
    """Parameters of the reduced system: scale eps >= 0, energy Ehat in (0,1),
    kinetic momentum value kappa inside the chart interval."""

    eps: float
    ehat: float
    kappa: float

    def __post_init__(self):
        if not self.eps >= 0.0:
            raise ValueError("eps must be >= 0")
        if not 0.0 < self.ehat < 1.0:
            raise ValueError("ehat must lie in (0, 1)")


@dataclass(frozen=True)
class TurningPoints:
    """Simple roots A- < 0 < A+ of the reduced radicand and the matching
    pericentre/apocentre latitudes."""

    A_minus: float
    A_plus: float
    a_minus: float
    a_plus: float


@dataclass(frozen=True)
class ApsidalReport:
    T: float
    phi_over_eps2: float
    turning: TurningPoints


@dataclass(frozen=True)
class FJet:
    """Taylor data of F at the expansion centre c: F_i = F^(i)(c)/i!."""

    c: float
    F0: float
    F1: float
    F2: float
    F3: float
    Fhat1: float
    Fhat2: float
    Fhat3: float


@dataclass(frozen=True)
class HSweepResult:
    """Fit of -|lambda| Phi(E(c,h), K(c,h)) / (2 F(c)) against 1, h^2, h^4."""

    center: float
    h: np.ndarray
    E: np.ndarray
    K: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    coeff_h0: float
    coeff_h2: float
    coeff_h4: float
    predicted_h4: float


def effective_potential(chart: ActionChart, eps: float, kappa: float, p_phi_hat: float) -> float:
    """F(kappa - eps*p_phi_hat) * p_phi_hat**2 / 2."""
    a = kappa - eps * p_phi_hat
    chart.require(a)
    return 0.5 * float(chart.F(a)) * p_phi_hat * p_phi_hat


def _radicand(chart: ActionChart, params: ReducedParams, u):
    a = params.kappa - params.eps * u
    return 2.0 * params.ehat - np.asarray(chart.F(a), dtype=float) * u * u


def turning_points(
    chart: ActionChart,
    params: ReducedParams,
    tol: float = 1e-13,
    max_iter: int = 50,
) -> TurningPoints:
    """Newton on g(u) = 2*Ehat - F(kappa - eps*u)*u^2 from the eps=0 roots
    +-sqrt(2*Ehat/F(kappa))."""
    chart.require(params.kappa)
    eps, ehat, kappa = params.eps, params.ehat, params.kappa
    seed = math.sqrt(2.0 * ehat / float(chart.F(kappa)))

    roots = []
    for u in (-seed, seed):
        converged = False
        for _ in range(max_iter):
            a = kappa - eps * u
            if not chart.contains(a):
                raise NoTurningPoints(
                    f"Newton iterate left the chart interval (eps={eps}, ehat={ehat}, kappa={kappa})"
                )
            F0, F1 = chart.F.jet(a)[:2]
            g = 2.0 * ehat - F0 * u * u
            if abs(g) <= tol:
                converged = True
                break
            dg = eps * F1 * u * u - 2.0 * F0 * u
            if dg == 0.0:
                raise NoTurningPoints("radicand derivative vanished during Newton")
            u = u - g / dg
        if not converged:
            raise NoTurningPoints(
                f"turning-point Newton did not converge in {max_iter} iterations "
                f"(eps={eps} too large?)"
            )
        roots.append(u)

    A_minus, A_plus = sorted(roots)
    if not A_minus < 0.0 < A_plus:
        raise NoTurningPoints(f"roots {A_minus!r}, {A_plus!r} do not straddle zero")
    return TurningPoints(
        A_minus=A_minus,
        A_plus=A_plus,
        a_minus=kappa - eps * A_plus,
        a_plus=kappa - eps * A_minus,
    )


@lru_cache(maxsize=None)
def _gl_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _refine(evaluate: Callable, rtol: float, atol: float, n0: int = 32) -> float:
    """Gauss-Legendre on theta in (-pi/2, pi/2) with node doubling."""
    prev = None
    n = n0
    while n <= _MAX_NODES:
        x, w = _gl_nodes(n)
        theta = 0.5 * math.pi * x
        val = 0.5 * math.pi * float(w @ evaluate(theta))
        if prev is not None and abs(val - prev) <= max(rtol * abs(val), atol):
            return val
        prev = val
        n *= 2
    raise QuadratureNotConverged(f"no convergence with up to {_MAX_NODES} nodes")


def _smooth_radicand_factor(chart, params, tp, u):
    """S(u) = g(u) / ((A+ - u)(u - A-)); smooth and positive between the roots."""
    g = _radicand(chart, params, u)
    denom = (tp.A_plus - u) * (u - tp.A_minus)
    s = g / denom
    if np.any(s <= 0.0):
        raise NoTurningPoints(
            "radicand is non-positive strictly between the turning points; "
            "the roots are not an adjacent simple pair"
        )
    return s


def radial_period(chart: ActionChart, params: ReducedParams, rtol: float = 1e-9) -> float:
    """Minimal positive period of the latitude oscillation.

    T = 2 * int du / (sqrt(R(kappa-eps*u)) sqrt(g(u))) between the turning
    points; at eps = 0 this is 2*pi/sqrt(R(kappa)F(kappa)).
    """
    tp = turning_points(chart, params)
    m = 0.5 * (tp.A_plus + tp.A_minus)
    w = 0.5 * (tp.A_plus - tp.A_minus)
    eps, kappa = params.eps, params.kappa

    def evaluate(theta):
        u = m + w * np.sin(theta)
        s = _smooth_radicand_factor(chart, params, tp, u)
        r_val = np.asarray(chart.R(kappa - eps * u), dtype=float)
        return 2.0 / np.sqrt(r_val * s)

    return _refine(evaluate, rtol=rtol, atol=1e-12)


def apsidal_angle(chart: ActionChart, params: ReducedParams, rtol: float = 1e-8) -> float:
    """Longitude increment over one radial period, divided by eps^2.

    Integrand (in u, between the turning points):
    R' sqrt(g) / R^(3/2)  +  F' u^2 / (sqrt(R) sqrt(g)),
    with R, F and their derivatives evaluated at kappa - eps*u.  The first
    term vanishes at the endpoints; the second carries the inverse square
    root absorbed by the sine substitution.  At eps = 0 this equals the
    closed form of :func:`apsidal_limit`.
    """
    tp = turning_points(chart, params)
    m = 0.5 * (tp.A_plus + tp.A_minus)
    w = 0.5 * (tp.A_plus - tp.A_minus)
    eps, kappa = params.eps, params.kappa

    def evaluate(theta):
        cos_t = np.cos(theta)
        u = m + w * np.sin(theta)
        s = _smooth_radicand_factor(chart, params, tp, u)
        a = kappa - eps * u
        R0, R1 = chart.R.jet(a)[:2]
        F1 = chart.F.jet(a)[1]
        R0 = np.asarray(R0, dtype=float)
        term1 = R1 * (w * cos_t) ** 2 * np.sqrt(s) / R0 ** 1.5
        term2 = F1 * u * u / np.sqrt(R0 * s)
        return term1 + term2

    return _refine(evaluate, rtol=rtol, atol=1e-12)


def apsidal_limit(chart: ActionChart, ehat: float, kappa: float) -> float:
    """eps -> 0 limit of the longitude increment per eps^2:
    pi * Ehat * (R'F + RF') / (RF)^(3/2) = -2*pi*Ehat d/dkappa (RF)^(-1/2)."""
    chart.require(kappa)
    R0, R1 = chart.R.jet(kappa)[:2]
    F0, F1 = chart.F.jet(kappa)[:2]
    return math.pi * ehat * (R1 * F0 + R0 * F1) / (R0 * F0) ** 1.5


def apsidal_report(
    chart: ActionChart,
    params: ReducedParams,
    rtol_period: float = 1e-9,
    rtol_apsidal: float = 1e-8,
) -> ApsidalReport:
    tp = turning_points(chart, params)
    return ApsidalReport(
        T=radial_period(chart, params, rtol=rtol_period),
        phi_over_eps2=apsidal_angle(chart, params, rtol=rtol_apsidal),
        turning=tp,
    )


def taylor_jet(chart: ActionChart, c: float, order: int = 3) -> FJet:
    """Taylor coefficients of F at c: F_i = F^(i)(c)/i! and Fhat_i = F_i/F_0."""
    if order > 3:
        raise ValueError("jets are available up to order 3")
    chart.require(c)
    F0, d1, d2, d3 = chart.F.jet(c)
    F0 = float(F0)
    if F0 <= 0.0:
        raise ValueError("F must be positive")
    F1 = float(d1)
    F2 = float(d2) / 2.0
    F3 = float(d3) / 6.0
    return FJet(
        c=float(c), F0=F0, F1=F1, F2=F2, F3=F3,
        Fhat1=F1 / F0, Fhat2=F2 / F0, Fhat3=F3 / F0,
    )


def h4_coefficient(chart: ActionChart, c: float) -> float:
    """6 F'(c)^3 - 6 F F' F'' + F^2 F''' -- zero everywhere exactly when the
    (homogeneous-field) scalar curvature is constant."""
    chart.require(c)
    F0, F1, F2, F3 = chart.F.jet(c)
    return float(6.0 * F1 ** 3 - 6.0 * F0 * F1 * F2 + F0 * F0 * F3)


def h4_taylor_form(chart: ActionChart, c: float) -> float:
    """(pi/8)(3 Fhat1^3 - 6 Fhat1 Fhat2 + 3 Fhat3): the h^4 coefficient of the
    apsidal sweep fit; vanishes together with :func:`h4_coefficient`
    (the two differ by the factor 16 F(c)^3 / pi)."""
    jet = taylor_jet(chart, c)
    return (math.pi / 8.0) * (
        3.0 * jet.Fhat1 ** 3 - 6.0 * jet.Fhat1 * jet.Fhat2 + 3.0 * jet.Fhat3
    )


def _match_turning_latitudes(chart: ActionChart, c: float, h: float) -> tuple[float, float]:
    """(E, K) whose turning latitudes are exactly c - h and c + h.

    With sqrt(2E) = sqrt(F(c-h))*(K-c+h) = sqrt(F(c+h))*(c+h-K) the two
    root conditions are linear in K - c, so the match is exact; the second
    residual is still verified.
    """
    sm = math.sqrt(float(chart.F(c - h)))
    sp = math.sqrt(float(chart.F(c + h)))
    x = h * (sp - sm) / (sp + sm)
    K = c + x
    sqrt_2E = sm * (x + h)
    E = 0.5 * sqrt_2E * sqrt_2E
    resid = abs(sp * (h - x) - sqrt_2E)
    if resid > 1e-10 * max(sqrt_2E, 1e-30):
        raise NewtonFailed(
            f"turning-latitude match residual {resid!r} at c={c}, h={h}"
        )
    return E, K


def _phi_unit_scale(chart: ActionChart, E: float, K: float, a_minus: float, a_plus: float,
                    rtol: float) -> float:
    """Longitude increment over a radial period at unit momentum scale:
    2 * int F(a)(K - a) / (sqrt(R(a)) sqrt(2E - F(a)(K-a)^2)) da."""
    m = 0.5 * (a_plus + a_minus)
    w = 0.5 * (a_plus - a_minus)

    def evaluate(theta):
        a = m + w * np.sin(theta)
        F0 = np.asarray(chart.F(a), dtype=float)
        R0 = np.asarray(chart.R(a), dtype=float)
        g = 2.0 * E - F0 * (K - a) ** 2
        denom = (a_plus - a) * (a - a_minus)
        s = g / denom
        if np.any(s <= 0.0):
            raise NoTurningPoints("radicand non-positive between prescribed latitudes")
        return 2.0 * F0 * (K - a) / np.sqrt(R0 * s)

    return _refine(evaluate, rtol=rtol, atol=1e-13)


def apsidal_h_sweep(
    chart: ActionChart,
    c: float,
    h_list: Sequence[float] = (0.05, 0.1, 0.15, 0.2),
    rtol: float = 1e-9,
    homogeneity_rtol: float = 1e-8,
) -> HSweepResult:
    """Power-sweep of the unit-scale apsidal increment in the half width h.

    For each h, (E, K) is chosen so the turning latitudes are c -+ h, the
    increment Phi(E, K) is integrated, and -|lambda| Phi / (2 F(c)) is fit
    by least squares against 1, h^2, h^4.  On charts with constant
    curvature every coefficient vanishes; otherwise the h^4 coefficient
    approaches (pi/8)(3 Fhat1^3 - 6 Fhat1 Fhat2 + 3 Fhat3).

    Assumes a homogeneous field (R*F = const); raises NotHomogeneous
    otherwise.
    """
    if len(h_list) < 3:
        raise ValueError("need at least 3 half widths to fit 3 coefficients")
    chart.require(c)
    lam2_mean, defect = homogeneity_defect(chart)
    if defect > homogeneity_rtol * abs(lam2_mean):
        raise NotHomogeneous(
            f"R*F spread {defect!r} exceeds {homogeneity_rtol} * {lam2_mean!r}"
        )
    lam = math.sqrt(lam2_mean)
    Fc = float(chart.F(c))

    rows = []
    for h in h_list:
        h = float(h)
        if h <= 0.0:
            raise ValueError("half widths must be positive")
        chart.require(c - h)
        chart.require(c + h)
        E, K = _match_turning_latitudes(chart, c, h)
        phi = _phi_unit_scale(chart, E, K, c - h, c + h, rtol=rtol)
        rows.append((h, E, K, phi, -lam * phi / (2.0 * Fc)))

    arr = np.array(rows)
    h_arr = arr[:, 0]
    y = arr[:, 4]
    design = np.column_stack([np.ones_like(h_arr), h_arr ** 2, h_arr ** 4])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return HSweepResult(
        center=float(c),
        h=h_arr,
        E=arr[:, 1],
        K=arr[:, 2],
        phi=arr[:, 3],
        values=y,
        coeff_h0=float(coef[0]),
        coeff_h2=float(coef[1]),
        coeff_h4=float(coef[2]),
        predicted_h4=h4_taylor_form(chart, c),
    )
