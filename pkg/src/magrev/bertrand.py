"""Classification of charts by the slow-motion periodicity condition.

A chart satisfies the condition (every sufficiently slow orbit periodic)
exactly when the field is homogeneous (R*F constant) and the scalar
curvature is constant.  :func:`classify` decides from those two defects and
attaches independent numerical evidence: the h^4 obstruction on a grid,
apsidal increments over an (eps, Ehat, kappa) grid, and direct closure
simulations.  The evidence samples a uniform eps grid, so it supports but
cannot certify the "for all sufficiently small speeds" quantifier.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import closure_test, slow_initial_state
from .reduction import ReducedParams, apsidal_angle, h4_coefficient, radial_period
from .surface import ActionChart, curvature_report, homogeneity_defect

CLOSURE_ANGLES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi)


@dataclass(frozen=True)
class BertrandVerdict:
    """Defects, evidence and the resulting verdict for one chart.

    The verdict is driven by the two necessary-and-sufficient conditions
    (homogeneity and curvature constancy); h4_max, apsidal_max and
    closure_fraction are cross-validation evidence.
    """

    chart_label: str
    homogeneity_defect: float
    lambda_sq: float
    curvature_mean: float
    curvature_deviation: float
    h4_max: float
    apsidal_max: float
    closure_fraction: float
    verdict: str  # "Bertrand" | "NotBertrand"
    reasons: tuple[str, ...]
    tol_h: float
    tol_c: float
    grids: dict

    @property
    def is_bertrand(self) -> bool:
        return self.verdict == "Bertrand"

    def as_dict(self) -> dict:
        return {
            "chart": self.chart_label,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "homogeneity_defect": self.homogeneity_defect,
            "lambda_sq": self.lambda_sq,
            "curvature_mean": self.curvature_mean,
            "curvature_deviation": self.curvature_deviation,
            "h4_max": self.h4_max,
            "apsidal_max": self.apsidal_max,
            "closure_fraction": self.closure_fraction,
            "tol_h": self.tol_h,
            "tol_c": self.tol_c,
            "grids": self.grids,
        }


def _map(fn, items, jobs: Optional[int]):
    if jobs is None or jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def classify(
    chart: ActionChart,
    tol_h: Optional[float] = None,
    tol_c: Optional[float] = None,
    grid_size: int = 257,
    eps_grid: Sequence[float] = (0.2, 0.1, 0.05),
    ehat_grid: Sequence[float] = (0.25, 0.5, 0.75),
    kappa_points: int = 5,
    closure_eps: Sequence[float] = (0.1, 0.05),
    closure_ehat: float = 0.5,
    closure_tol: float = 1e-6,
    closure_max_periods: int = 2,
    steps_per_period: int = 8192,
    jobs: Optional[int] = None,
) -> BertrandVerdict:
    """Verdict from the homogeneity and curvature-constancy defects.

    Default tolerances: tol_h = 1e-8 * lambda^2 and
    tol_c = 1e-6 * max(1, |Scal|) for analytic charts; tabulated charts use
    the documented looser 1e-3 scale.  Closure sampling launches the
    standard five momentum directions at kappa placed off-centre (43% into
    the interval) so a symmetric chart cannot mask a longitude drift.
    """
    lam2_mean, h_defect = homogeneity_defect(chart, grid_size)
    report = curvature_report(chart, grid_size)

    loose = chart.representation == "tabulated"
    if tol_h is None:
        tol_h = (1e-3 if loose else 1e-8) * abs(lam2_mean)
    if tol_c is None:
        tol_c = (1e-3 if loose else 1e-6) * max(1.0, abs(report.mean))

    kappas = chart.grid(kappa_points)
    h4_max = float(np.max(np.abs([h4_coefficient(chart, float(c)) for c in chart.grid(grid_size)])))

    combos = [
        (eps, ehat, float(kappa))
        for eps in eps_grid
        for ehat in ehat_grid
        for kappa in kappas
    ]
    apsidal_vals = _map(
        lambda c: apsidal_angle(chart, ReducedParams(eps=c[0], ehat=c[1], kappa=c[2])),
        combos,
        jobs,
    )
    apsidal_max = float(np.max(np.abs(apsidal_vals)))

    a1, a2 = chart.interval
    kappa_closure = a1 + 0.43 * (a2 - a1)
    closure_cases = [(eps, theta) for eps in closure_eps for theta in CLOSURE_ANGLES]

    def run_closure(case):
        eps, theta = case
        g0 = slow_initial_state(chart, eps, closure_ehat, kappa_closure, theta)
        return closure_test(
            chart, g0,
            max_radial_periods=closure_max_periods,
            tol=closure_tol,
            steps_per_period=steps_per_period,
        )

    closures = _map(run_closure, closure_cases, jobs)
    closure_fraction = sum(1 for c in closures if c.closed) / len(closures)

    reasons = []
    if h_defect > tol_h:
        reasons.append(
            f"magnetic field not homogeneous: sup |RF - mean| = {h_defect:.3e} > {tol_h:.3e}"
        )
    if report.max_deviation > tol_c:
        reasons.append(
            f"scalar curvature not constant: sup |Scal - mean| = {report.max_deviation:.3e} > {tol_c:.3e}"
        )
    verdict = "Bertrand" if not reasons else "NotBertrand"

    return BertrandVerdict(
        chart_label=chart.label or chart.representation,
        homogeneity_defect=h_defect,
        lambda_sq=lam2_mean,
        curvature_mean=report.mean,
        curvature_deviation=report.max_deviation,
        h4_max=h4_max,
        apsidal_max=apsidal_max,
        closure_fraction=closure_fraction,
        verdict=verdict,
        reasons=tuple(reasons),
        tol_h=tol_h,
        tol_c=tol_c,
        grids={
            "grid_size": grid_size,
            "eps": list(eps_grid),
            "ehat": list(ehat_grid),
            "kappa": [float(k) for k in kappas],
            "closure_eps": list(closure_eps),
            "closure_kappa": kappa_closure,
            "closure_ehat": closure_ehat,
            "closure_tol": closure_tol,
        },
    )


@dataclass(frozen=True)
class PeriodConvergence:
    """Fit of T(eps) - T_limit on the basis {1, eps, eps^2}.

    T(eps) is even in eps (the quadrature is invariant under
    (eps, u) -> (-eps, -u)), so the model includes the quadratic term; the
    intercept then measures convergence to the frozen-coefficient period
    T_limit = 2*pi/sqrt(R(kappa) F(kappa)) instead of line-fit bias.
    """

    eps: np.ndarray
    T: np.ndarray
    T_limit: float
    intercept: float
    slope: float
    curvature: float
    max_residual: float


def period_convergence(
    chart: ActionChart,
    ehat: float,
    kappa: float,
    eps_list: Sequence[float],
) -> PeriodConvergence:
    """Radial periods over an eps list and their extrapolation to eps = 0."""
    eps_arr = np.asarray(list(eps_list), dtype=float)
    if np.any(eps_arr < 0.0):
        raise ValueError("eps values must be >= 0")
    T_vals = np.array([
        radial_period(chart, ReducedParams(eps=float(e), ehat=ehat, kappa=kappa))
        for e in eps_arr
    ])
    T_limit = 2.0 * math.pi / math.sqrt(float(chart.R(kappa)) * float(chart.F(kappa)))
    y = T_vals - T_limit
    if len(eps_arr) >= 3:
        design = np.column_stack([np.ones_like(eps_arr), eps_arr, eps_arr ** 2])
    else:
        design = np.column_stack([np.ones_like(eps_arr), eps_arr])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    return PeriodConvergence(
        eps=eps_arr,
        T=T_vals,
        T_limit=T_limit,
        intercept=float(coef[0]),
        slope=float(coef[1]),
        curvature=float(coef[2]) if len(coef) > 2 else 0.0,
        max_residual=float(np.max(np.abs(y - fitted))),
    )
