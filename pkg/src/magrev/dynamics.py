"""Full and slow-fast dynamics of a charged particle on an action chart.

State conventions
-----------------
``PhaseState`` holds (a, phi, p_a, p_phi) for the Hamiltonian
``H = R(a) p_a^2/2 + F(a) p_phi^2/2`` with twisted symplectic structure
``dp_a ^ da + d(p_phi + a) ^ dphi``; the conserved kinetic momentum is
``K = p_phi + a``.  ``GuidingState`` holds the guiding-centre variables
``a_hat = a + p_phi``, ``phi_hat = phi - p_a`` with momenta divided by the
scale ``eps`` (eps = 1 means unscaled; eps = 0 denotes the frozen limit
family of oscillators).

Angles are stored raw by the transforms so that forward/inverse composition
is an exact floating-point identity; trajectories and comparisons normalise
via :func:`wrap_angle` / ``normalized()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateSpeed,
    LeftDomain,
    NoCircularOrbit,
    NoConvergence,
    NonPositiveEpsilon,
    OutOfDomain,
)
from .serialize import write_csv
from .surface import ActionChart

TWO_PI = 2.0 * math.pi


def wrap_angle(x):
    """Reduce an angle to [0, 2*pi)."""
    return np.mod(x, TWO_PI)


def angle_separation(x, y):
    """Signed angular difference x - y wrapped to [-pi, pi)."""
    return np.mod(x - y + math.pi, TWO_PI) - math.pi


def _require_finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError("state components must be finite")


@dataclass(frozen=True)
class PhaseState:
    a: float
    phi: float
    p_a: float
    p_phi: float

    def __post_init__(self):
        _require_finite(self.a, self.phi, self.p_a, self.p_phi)

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.phi, self.p_a, self.p_phi], dtype=float)

    @classmethod
    def from_array(cls, y) -> "PhaseState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    def normalized(self) -> "PhaseState":
        return PhaseState(self.a, float(wrap_angle(self.phi)), self.p_a, self.p_phi)


@dataclass(frozen=True)
class GuidingState:
    a_hat: float
    phi_hat: float
    p_a_hat: float
    p_phi_hat: float
    eps: float

    def __post_init__(self):
        _require_finite(self.a_hat, self.phi_hat, self.p_a_hat, self.p_phi_hat)
        if not self.eps >= 0.0:
            raise ValueError("eps must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.a_hat, self.phi_hat, self.p_a_hat, self.p_phi_hat], dtype=float)

    @classmethod
    def from_array(cls, y, eps: float) -> "GuidingState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]), eps)

    def normalized(self) -> "GuidingState":
        return GuidingState(
            self.a_hat, float(wrap_angle(self.phi_hat)), self.p_a_hat, self.p_phi_hat, self.eps
        )


# ---------------------------------------------------------------------------
# pointwise quantities and vector fields
# ---------------------------------------------------------------------------


def hamiltonian(chart: ActionChart, state: PhaseState) -> float:
    """R(a) p_a^2/2 + F(a) p_phi^2/2."""
    chart.require(state.a)
    return 0.5 * (
        float(chart.R(state.a)) * state.p_a ** 2
        + float(chart.F(state.a)) * state.p_phi ** 2
    )


def kinetic_momentum(state: PhaseState) -> float:
    """Conserved momentum K = p_phi + a generating the rotation."""
    return state.p_phi + state.a


def ode_rhs(chart: ActionChart, state: PhaseState) -> np.ndarray:
    """Tangent vector (a', phi', p_a', p_phi').

    p_phi' is computed as the exact negative of a' so K = p_phi + a is
    conserved identically by the vector field.
    """
    chart.require(state.a)
    return _rhs_full(chart, state.as_array())


def _rhs_full(chart: ActionChart, y: np.ndarray) -> np.ndarray:
    a, _, p_a, p_phi = y
    R0, R1 = chart.R.jet(a)[:2]
    F0, F1 = chart.F.jet(a)[:2]
    a_dot = R0 * p_a
    return np.array([
        a_dot,
        F0 * p_phi,
        -0.5 * R1 * p_a * p_a - 0.5 * F1 * p_phi * p_phi + F0 * p_phi,
        -a_dot,
    ])


def ode_rhs_slowfast(chart: ActionChart, g: GuidingState) -> np.ndarray:
    """Tangent vector in slow-fast variables; the a_hat component is 0 exactly."""
    a = g.a_hat - g.eps * g.p_phi_hat
    chart.require(a)
    return _rhs_slowfast(chart, g.as_array(), g.eps)


def _rhs_slowfast(chart: ActionChart, y: np.ndarray, eps: float) -> np.ndarray:
    a_hat, _, pa, pf = y
    a = a_hat - eps * pf
    R0, R1 = chart.R.jet(a)[:2]
    F0, F1 = chart.F.jet(a)[:2]
    grad = 0.5 * R1 * pa * pa + 0.5 * F1 * pf * pf
    return np.array([
        0.0,
        eps * eps * grad,
        -eps * grad + F0 * pf,
        -R0 * pa,
    ])


def reduced_hamiltonian(chart: ActionChart, g: GuidingState) -> float:
    """H / eps^2: R(a_hat - eps p_phi_hat) p_a_hat^2/2 + F(...) p_phi_hat^2/2."""
    a = g.a_hat - g.eps * g.p_phi_hat
    chart.require(a)
    return 0.5 * (
        float(chart.R(a)) * g.p_a_hat ** 2 + float(chart.F(a)) * g.p_phi_hat ** 2
    )


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def guiding_transform(state: PhaseState) -> GuidingState:
    """(a, phi, p_a, p_phi) -> (a + p_phi, phi - p_a, p_a, p_phi) at unit scale."""
    return GuidingState(
        a_hat=state.a + state.p_phi,
        phi_hat=state.phi - state.p_a,
        p_a_hat=state.p_a,
        p_phi_hat=state.p_phi,
        eps=1.0,
    )


def guiding_inverse(g: GuidingState) -> PhaseState:
    """Inverse of the guiding-centre map composed with the scale change."""
    p_a = g.eps * g.p_a_hat
    p_phi = g.eps * g.p_phi_hat
    return PhaseState(
        a=g.a_hat - p_phi,
        phi=g.phi_hat + p_a,
        p_a=p_a,
        p_phi=p_phi,
    )


def scale_change(g: GuidingState, eps: float) -> GuidingState:
    """Divide unit-scale momenta by eps > 0."""
    if not eps > 0.0:
        raise NonPositiveEpsilon(f"eps must be positive, got {eps!r}")
    if g.eps != 1.0:
        raise ValueError("scale_change expects a unit-scale guiding state")
    return GuidingState(g.a_hat, g.phi_hat, g.p_a_hat / eps, g.p_phi_hat / eps, eps)


def scale_inverse(g: GuidingState) -> GuidingState:
    """Back to unit-scale momenta."""
    if not g.eps > 0.0:
        raise NonPositiveEpsilon("cannot unscale an eps = 0 limit state")
    return GuidingState(g.a_hat, g.phi_hat, g.p_a_hat * g.eps, g.p_phi_hat * g.eps, 1.0)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step trajectory of the full system.

    ``states`` rows are (a, phi, p_a, p_phi) with phi wrapped to [0, 2*pi);
    ``energies``/``momenta`` are H and K recomputed at the stored samples,
    and the drift fields are the max deviations over those arrays.
    """

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    momenta: np.ndarray
    H_drift: float
    K_drift: float

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> PhaseState:
        return PhaseState.from_array(self.states[i])

    def write_csv(self, target) -> None:
        """CSV with header t,a,phi,p_a,p_phi,H,K (one row per sample)."""
        rows = np.column_stack([self.times, self.states, self.energies, self.momenta])
        write_csv(target, ["t", "a", "phi", "p_a", "p_phi", "H", "K"], rows)


@dataclass(frozen=True)
class GuidingTrajectory:
    """Fixed-step trajectory of the slow-fast system.

    ``energies`` holds the reduced Hamiltonian H/eps^2; ``ahat_drift`` the
    max deviation of the exactly conserved a_hat.
    """

    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray
    eps: float
    H_drift: float
    ahat_drift: float

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> GuidingState:
        return GuidingState.from_array(self.states[i], self.eps)


def _step_implicit_midpoint(f, y, dt, tol, max_iter):
    z = y + dt * f(y)
    for _ in range(max_iter):
        z_new = y + dt * f(0.5 * (y + z))
        if float(np.max(np.abs(z_new - z))) <= tol:
            return z_new
        z = z_new
    raise NoConvergence(
        f"implicit midpoint stage iteration did not reach {tol} in {max_iter} steps"
    )


def _step_rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run_fixed_step(f, y0, n_steps, dt, method, stage_tol, max_stage_iter, domain_check):
    ys = np.empty((n_steps + 1, 4))
    ys[0] = y0
    y = y0
    for i in range(n_steps):
        if method == "implicit-midpoint":
            y = _step_implicit_midpoint(f, y, dt, stage_tol, max_stage_iter)
        elif method == "rk4":
            y = _step_rk4(f, y, dt)
        else:
            raise ValueError(f"unknown method {method!r}")
        domain_check(y, (i + 1) * dt)
        ys[i + 1] = y
    return ys


def integrate(
    chart: ActionChart,
    state0: PhaseState,
    t_end: float,
    dt: float,
    method: str = "implicit-midpoint",
    stage_tol: float = 1e-13,
    max_stage_iter: int = 50,
) -> Trajectory:
    """Fixed-step integration of the full system, sampled every step.

    The default scheme is the (symplectic) implicit midpoint rule with
    fixed-point stages solved to ``stage_tol``; rk4 is offered for
    cross-validation.  ``t_end`` is rounded to an integer number of steps.
    Leaving the open action interval raises :class:`LeftDomain`.
    """
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("t_end and dt must be positive")
    chart.require(state0.a)
    n_steps = max(1, int(round(t_end / dt)))
    a1, a2 = chart.interval

    def domain_check(y, t):
        if not a1 < y[0] < a2:
            raise LeftDomain(f"latitude a={y[0]!r} left ({a1!r}, {a2!r}) at t={t!r}")

    def f(y):
        return _rhs_full(chart, y)

    ys = _run_fixed_step(
        f, state0.as_array(), n_steps, dt, method, stage_tol, max_stage_iter, domain_check
    )
    times = dt * np.arange(n_steps + 1)
    ys[:, 1] = wrap_angle(ys[:, 1])
    energies = 0.5 * (
        np.asarray(chart.R(ys[:, 0]), dtype=float) * ys[:, 2] ** 2
        + np.asarray(chart.F(ys[:, 0]), dtype=float) * ys[:, 3] ** 2
    )
    momenta = ys[:, 3] + ys[:, 0]
    return Trajectory(
        times=times,
        states=ys,
        energies=energies,
        momenta=momenta,
        H_drift=float(np.max(np.abs(energies - energies[0]))),
        K_drift=float(np.max(np.abs(momenta - momenta[0]))),
    )


def integrate_slowfast(
    chart: ActionChart,
    g0: GuidingState,
    t_end: float,
    dt: float,
    method: str = "implicit-midpoint",
    stage_tol: float = 1e-13,
    max_stage_iter: int = 50,
) -> GuidingTrajectory:
    """Fixed-step integration of the slow-fast system (phi_hat left unwrapped)."""
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("t_end and dt must be positive")
    eps = g0.eps
    chart.require(g0.a_hat - eps * g0.p_phi_hat)
    n_steps = max(1, int(round(t_end / dt)))
    a1, a2 = chart.interval

    def domain_check(y, t):
        a = y[0] - eps * y[3]
        if not a1 < a < a2:
            raise LeftDomain(f"latitude a={a!r} left ({a1!r}, {a2!r}) at t={t!r}")

    def f(y):
        return _rhs_slowfast(chart, y, eps)

    ys = _run_fixed_step(
        f, g0.as_array(), n_steps, dt, method, stage_tol, max_stage_iter, domain_check
    )
    times = dt * np.arange(n_steps + 1)
    lat = ys[:, 0] - eps * ys[:, 3]
    energies = 0.5 * (
        np.asarray(chart.R(lat), dtype=float) * ys[:, 2] ** 2
        + np.asarray(chart.F(lat), dtype=float) * ys[:, 3] ** 2
    )
    return GuidingTrajectory(
        times=times,
        states=ys,
        energies=energies,
        eps=eps,
        H_drift=float(np.max(np.abs(energies - energies[0]))),
        ahat_drift=float(np.max(np.abs(ys[:, 0] - ys[0, 0]))),
    )


# ---------------------------------------------------------------------------
# relative equilibria and slow initial data
# ---------------------------------------------------------------------------


def relative_equilibria(chart: ActionChart, a: float) -> tuple[float, float]:
    """Momentum values K at which dH and dK are proportional at latitude a.

    Returns ``(equilibrium, circular)`` with equilibrium K = a and circular
    K = a + 2 F(a)/F'(a); raises :class:`NoCircularOrbit` when |F'(a)| is
    below 1e-12 and only the equilibrium branch exists.
    """
    chart.require(a)
    F0, F1 = chart.F.jet(a)[:2]
    if abs(F1) < 1e-12:
        raise NoCircularOrbit(f"F'({a!r}) ~ 0: no circular branch (equilibrium K = {a!r})")
    return a, a + 2.0 * float(F0) / float(F1)


def slow_initial_state(
    chart: ActionChart,
    eps: float,
    ehat: float,
    kappa: float,
    theta: float,
    phi_hat: float = 0.0,
) -> GuidingState:
    """Guiding state at direction ``theta`` on the reduced energy level.

    The momenta start on the frozen-coefficient ellipse
    R(kappa) p_a_hat^2/2 + F(kappa) p_phi_hat^2/2 = ehat and, for eps > 0,
    are rescaled radially so the reduced Hamiltonian equals ``ehat``
    exactly (the full-system speed is then eps*sqrt(2*ehat) exactly).
    """
    chart.require(kappa)
    if not 0.0 < ehat < 1.0:
        raise ValueError("ehat must lie in (0, 1)")
    pa0 = math.sqrt(2.0 * ehat / float(chart.R(kappa))) * math.cos(theta)
    pf0 = math.sqrt(2.0 * ehat / float(chart.F(kappa))) * math.sin(theta)
    if eps == 0.0:
        return GuidingState(kappa, phi_hat, pa0, pf0, eps)

    def residual(s):
        a = kappa - eps * s * pf0
        chart.require(a)
        return (
            0.5 * float(chart.R(a)) * (s * pa0) ** 2
            + 0.5 * float(chart.F(a)) * (s * pf0) ** 2
            - ehat
        )

    s = brentq(residual, 0.5, 1.5, xtol=1e-15, rtol=8.9e-16)
    return GuidingState(kappa, phi_hat, s * pa0, s * pf0, eps)


# ---------------------------------------------------------------------------
# geodesic curvature of the configuration-space curve
# ---------------------------------------------------------------------------


def geodesic_curvature(chart: ActionChart, traj: Trajectory, min_speed: float = 1e-10) -> np.ndarray:
    """Discrete geodesic curvature of (a(t), phi(t)) under da^2/R + dphi^2/F.

    Central differences give velocity and acceleration; the covariant
    acceleration uses the Christoffel symbols of the diagonal metric.  For
    any chart the exact value is sqrt(R(a) F(a)) / speed, which equals
    lambda/eps on homogeneous charts for speed-eps solutions.

    Returns an array of rows (t, curvature) at the interior samples.
    """
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    t = traj.times
    dt = t[1] - t[0]
    a = traj.states[:, 0]
    phi = np.unwrap(traj.states[:, 1])

    a_dot = (a[2:] - a[:-2]) / (2.0 * dt)
    phi_dot = (phi[2:] - phi[:-2]) / (2.0 * dt)
    a_ddot = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / dt ** 2
    phi_ddot = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / dt ** 2

    mid = a[1:-1]
    R0, R1 = chart.R.jet(mid)[:2]
    F0, F1 = chart.F.jet(mid)[:2]
    R0 = np.asarray(R0, dtype=float)
    F0 = np.asarray(F0, dtype=float)

    speed_sq = a_dot ** 2 / R0 + phi_dot ** 2 / F0
    if np.any(speed_sq < min_speed ** 2):
        raise DegenerateSpeed(f"velocity below {min_speed} at a sample")

    cov_a = a_ddot - 0.5 * (R1 / R0) * a_dot ** 2 + 0.5 * (R0 * F1 / F0 ** 2) * phi_dot ** 2
    cov_phi = phi_ddot - (F1 / F0) * a_dot * phi_dot
    norm = np.sqrt(cov_a ** 2 / R0 + cov_phi ** 2 / F0)
    return np.column_stack([t[1:-1], norm / speed_sq])


# ---------------------------------------------------------------------------
# orbit closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosureResult:
    """Outcome of the pericentre return test.

    ``radial_period`` is the mean pericentre-to-pericentre time of the
    crossings seen (None if fewer than two); ``return_distance`` the
    smallest distance to the reference pericentre state.
    """

    closed: bool
    degenerate: bool
    periods: Optional[int]
    t_star: Optional[float]
    return_distance: float
    radial_period: Optional[float]
    crossings: int
    eps: float


def _hermite_eval(theta, y0, m0, y1, m1):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1


def _state_distance(y, ref):
    dphi = angle_separation(y[1], ref[1])
    return math.sqrt((y[0] - ref[0]) ** 2 + dphi ** 2 + (y[2] - ref[2]) ** 2 + (y[3] - ref[3]) ** 2)


def closure_test(
    chart: ActionChart,
    g0: GuidingState,
    max_radial_periods: int = 10,
    tol: float = 1e-6,
    steps_per_period: int = 8192,
    stage_tol: float = 1e-13,
    max_stage_iter: int = 50,
) -> ClosureResult:
    """Detect orbit closure through pericentre returns of the slow-fast flow.

    Pericentres (minimal latitude) are the upward zero crossings of
    p_a_hat; crossings are refined by cubic Hermite interpolation between
    fixed integration steps.  The orbit is declared closed when the full
    state returns within ``tol`` of the first pericentre state after at
    most ``max_radial_periods`` radial periods.  True-orbit and slow-fast
    pericentre data coincide exactly (p_a = 0 there), so the test is
    coordinate-honest.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_radial_periods < 1:
        raise ValueError("max_radial_periods must be at least 1")
    eps = g0.eps
    chart.require(g0.a_hat - eps * g0.p_phi_hat)

    if math.hypot(g0.p_a_hat, g0.p_phi_hat) < 1e-14:
        return ClosureResult(
            closed=True, degenerate=True, periods=0, t_star=0.0,
            return_distance=0.0, radial_period=None, crossings=0, eps=eps,
        )

    chart.require(g0.a_hat)
    omega = math.sqrt(float(chart.R(g0.a_hat)) * float(chart.F(g0.a_hat)))
    T0 = TWO_PI / omega
    dt = T0 / steps_per_period
    max_steps = int(math.ceil((max_radial_periods + 2.5) * T0 / dt))
    a1, a2 = chart.interval

    def f(y):
        return _rhs_slowfast(chart, y, eps)

    y = g0.as_array()
    fy = f(y)
    t = 0.0

    crossing_times: list[float] = []
    reference: Optional[np.ndarray] = None
    ref_time = 0.0
    ref_index = 0
    best_distance = math.inf

    if y[2] == 0.0 and y[3] > 0.0:  # started exactly at a pericentre
        reference = y.copy()
        crossing_times.append(0.0)

    for _ in range(max_steps):
        y_new = _step_implicit_midpoint(f, y, dt, stage_tol, max_stage_iter)
        t_new = t + dt
        lat = y_new[0] - eps * y_new[3]
        if not a1 < lat < a2:
            raise LeftDomain(f"latitude a={lat!r} left ({a1!r}, {a2!r}) at t={t_new!r}")
        f_new = f(y_new)

        if y[2] < 0.0 <= y_new[2]:
            m0 = dt * fy
            m1 = dt * f_new
            theta = brentq(
                lambda s: _hermite_eval(s, y[2], m0[2], y_new[2], m1[2]),
                0.0, 1.0, xtol=1e-15,
            )
            cross_state = _hermite_eval(theta, y, m0, y_new, m1)
            cross_time = t + theta * dt
            crossing_times.append(cross_time)
            if reference is None:
                reference = cross_state
                ref_time = cross_time
                ref_index = len(crossing_times) - 1
            else:
                k = len(crossing_times) - 1 - ref_index
                dist = _state_distance(cross_state, reference)
                best_distance = min(best_distance, dist)
                if dist < tol:
                    periods = np.diff(crossing_times)
                    return ClosureResult(
                        closed=True, degenerate=False, periods=k,
                        t_star=cross_time - ref_time, return_distance=dist,
                        radial_period=float(np.mean(periods)),
                        crossings=len(crossing_times), eps=eps,
                    )
                if k >= max_radial_periods:
                    break
        y, fy, t = y_new, f_new, t_new

    periods = np.diff(crossing_times) if len(crossing_times) >= 2 else None
    return ClosureResult(
        closed=False, degenerate=False, periods=None, t_star=None,
        return_distance=best_distance if best_distance < math.inf else math.nan,
        radial_period=float(np.mean(periods)) if periods is not None else None,
        crossings=len(crossing_times), eps=eps,
    )
