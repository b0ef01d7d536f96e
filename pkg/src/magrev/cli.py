"""Command-line front end.

Subcommands: curvature, simulate, reduce, classify, h4, sweep-h.
A JSON config file (--config) supplies defaults; explicit flags win.
Exit codes: 0 success, 2 configuration/usage error, 3 domain or numerical
error.  Output is deterministic: identical configs produce byte-identical
files (pass --stamp to add a timestamp to JSON summaries).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bertrand, dynamics, reduction, surface
from .errors import (
    ChartFormatError,
    MagrevError,
    NonMonotoneAction,
    NonPositiveEpsilon,
    NonPositiveR,
    ZeroMagneticField,
)
from .serialize import csv_text, json_text

_CONFIG_ERRORS = (
    ChartFormatError,
    ZeroMagneticField,
    NonMonotoneAction,
    NonPositiveR,
    NonPositiveEpsilon,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3


class ConfigError(Exception):
    """Bad flags/config; maps to exit code 2."""


@dataclass
class RunConfig:
    """Resolved options for one CLI invocation (config file + flag overrides)."""

    command: str
    chart: str = ""
    out: Optional[str] = None
    format: str = "csv"
    jobs: Optional[int] = None
    tol: Optional[float] = None
    stamp: bool = False
    extra: dict = field(default_factory=dict)


def _float_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    try:
        return [float(part) for part in str(value).split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse float list from {value!r}") from exc


def _load_chart(spec: str) -> surface.ActionChart:
    if not spec:
        raise ConfigError("no chart given (use --chart <file|builtin:NAME>)")
    if spec.startswith("builtin:"):
        return surface.builtin_chart(spec[len("builtin:"):])
    return surface.chart_from_file(spec)


def _emit(config: RunConfig, header, rows, summary: dict) -> None:
    """CSV -> --out (or stdout); JSON format bundles summary + rows."""
    if config.stamp:
        summary = dict(summary)
        summary["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    if config.format == "json":
        doc = {"summary": summary, "columns": list(header), "rows": [list(r) for r in rows]}
        text = json_text(doc)
        if config.out:
            with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    text = csv_text(header, rows)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        sys.stdout.write(json_text(summary))
    else:
        sys.stdout.write(text)


def _emit_json(config: RunConfig, doc: dict) -> None:
    if config.stamp:
        doc = dict(doc)
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    text = json_text(doc)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_curvature(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    grid_size = int(config.extra.get("grid", surface.DEFAULT_GRID))
    tol = config.tol if config.tol is not None else 1e-6
    report = surface.curvature_report(chart, grid_size=grid_size, tol=tol)
    summary = {
        "chart": chart.label,
        "grid_size": grid_size,
        "mean": report.mean,
        "max_deviation": report.max_deviation,
        "is_constant": report.is_constant,
        "homogeneous": report.homogeneous,
        "tol": tol,
    }
    _emit(config, ["a", "scal"], report.samples, summary)
    return EXIT_OK


def _initial_state(config: RunConfig, chart) -> dynamics.PhaseState:
    extra = config.extra
    if extra.get("state") is not None:
        vals = _float_list(extra["state"])
        if len(vals) != 4:
            raise ConfigError("--state needs four comma-separated values a,phi,p_a,p_phi")
        return dynamics.PhaseState(*vals)
    eps = extra.get("eps")
    if eps is None:
        raise ConfigError("simulate needs --state or --eps/--ehat/--kappa/--theta")
    eps = _float_list(eps)[0]
    if eps <= 0:
        raise ConfigError("--eps must be positive for simulate")
    ehat = float(extra.get("ehat", 0.5))
    kappa = _float_list(extra.get("kappa", 0.0))[0]
    theta = float(extra.get("theta", 0.0))
    g0 = dynamics.slow_initial_state(chart, eps, ehat, kappa, theta)
    return dynamics.guiding_inverse(g0)


def cmd_simulate(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    t_end = float(config.extra.get("t_end", 10.0))
    dt = float(config.extra.get("dt", 1e-3))
    method = str(config.extra.get("method", "implicit-midpoint"))
    if dt <= 0 or t_end <= 0:
        raise ConfigError("--t-end and --dt must be positive")
    if method not in ("implicit-midpoint", "rk4"):
        raise ConfigError(f"unknown method {method!r}")
    state0 = _initial_state(config, chart)
    traj = dynamics.integrate(chart, state0, t_end=t_end, dt=dt, method=method)
    rows = np.column_stack([traj.times, traj.states, traj.energies, traj.momenta])
    summary = {
        "chart": chart.label,
        "t_end": t_end,
        "dt": dt,
        "method": method,
        "samples": len(traj),
        "H_drift": traj.H_drift,
        "K_drift": traj.K_drift,
    }
    _emit(config, ["t", "a", "phi", "p_a", "p_phi", "H", "K"], rows, summary)
    return EXIT_OK


def cmd_reduce(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    eps_list = _float_list(config.extra.get("eps", [0.0]))
    ehat_list = _float_list(config.extra.get("ehat", [0.5]))
    kappa_list = _float_list(config.extra.get("kappa", [0.0]))
    for ehat in ehat_list:
        if not 0.0 < ehat < 1.0:
            raise ConfigError(f"--ehat values must lie in (0, 1), got {ehat}")
    for eps in eps_list:
        if eps < 0.0:
            raise ConfigError(f"--eps values must be >= 0, got {eps}")
    rtol = config.tol if config.tol is not None else 1e-9

    combos = [
        (eps, ehat, kappa)
        for eps in eps_list
        for ehat in ehat_list
        for kappa in kappa_list
    ]

    def one(combo):
        eps, ehat, kappa = combo
        params = reduction.ReducedParams(eps=eps, ehat=ehat, kappa=kappa)
        report = reduction.apsidal_report(chart, params, rtol_period=rtol)
        return (
            eps, ehat, kappa,
            report.turning.A_minus, report.turning.A_plus,
            report.T, report.phi_over_eps2,
        )

    rows = bertrand._map(one, combos, config.jobs)
    summary = {"chart": chart.label, "rows": len(rows)}
    _emit(
        config,
        ["eps", "Ehat", "kappa", "A_minus", "A_plus", "T", "Phi_over_eps2"],
        rows,
        summary,
    )
    return EXIT_OK


def cmd_classify(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    kwargs = {}
    if config.tol is not None:
        kwargs["tol_c"] = config.tol
    if "grid" in config.extra:
        kwargs["grid_size"] = int(config.extra["grid"])
    verdict = bertrand.classify(chart, jobs=config.jobs, **kwargs)
    _emit_json(config, verdict.as_dict())
    return EXIT_OK


def cmd_h4(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    if config.extra.get("at") is not None:
        points = _float_list(config.extra["at"])
    else:
        points = [float(c) for c in chart.grid(int(config.extra.get("points", 65)))]
    rows = [(c, reduction.h4_coefficient(chart, c)) for c in points]
    sup = max(abs(r[1]) for r in rows)
    summary = {"chart": chart.label, "points": len(rows), "sup_abs_h4": sup}
    _emit(config, ["c", "h4"], rows, summary)
    return EXIT_OK


def cmd_sweep_h(config: RunConfig) -> int:
    chart = _load_chart(config.chart)
    center = float(config.extra.get("center", 0.0))
    h_list = _float_list(config.extra.get("h", [0.05, 0.1, 0.15, 0.2]))
    result = reduction.apsidal_h_sweep(chart, center, h_list)
    doc = {
        "chart": chart.label,
        "center": result.center,
        "coeff_h0": result.coeff_h0,
        "coeff_h2": result.coeff_h2,
        "coeff_h4": result.coeff_h4,
        "predicted_h4": result.predicted_h4,
        "columns": ["h", "E", "K", "Phi", "value"],
        "rows": [
            [float(result.h[i]), float(result.E[i]), float(result.K[i]),
             float(result.phi[i]), float(result.values[i])]
            for i in range(len(result.h))
        ],
    }
    _emit_json(config, doc)
    return EXIT_OK


_COMMANDS = {
    "curvature": cmd_curvature,
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
    "classify": cmd_classify,
    "h4": cmd_h4,
    "sweep-h": cmd_sweep_h,
}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magrev",
        description="Magnetic geodesic flows on surfaces of revolution: "
        "simulation, reduction and periodicity classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--chart", help="chart file path or builtin:NAME "
                       f"(builtins: {', '.join(surface.BUILTIN_CHART_NAMES)})")
        p.add_argument("--config", help="JSON config file; flags override its entries")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
        p.add_argument("--jobs", type=int, help="parallel workers for independent grid points")
        p.add_argument("--tol", type=float, help="command-specific tolerance")
        p.add_argument("--stamp", action="store_true", help="add a timestamp to JSON summaries")

    p = sub.add_parser("curvature", help="sample the scalar curvature on a grid")
    common(p)
    p.add_argument("--grid", type=int, help="number of grid points (default 257)")

    p = sub.add_parser("simulate", help="integrate the full system and export t,a,phi,p_a,p_phi,H,K")
    common(p)
    p.add_argument("--t-end", dest="t_end", type=float, help="final time (default 10)")
    p.add_argument("--dt", type=float, help="step size (default 1e-3)")
    p.add_argument("--method", choices=["implicit-midpoint", "rk4"])
    p.add_argument("--state", help="initial state a,phi,p_a,p_phi")
    p.add_argument("--eps", help="slow-state scale (with --ehat/--kappa/--theta)")
    p.add_argument("--ehat", help="reduced energy in (0,1), default 0.5")
    p.add_argument("--kappa", help="kinetic momentum value, default 0")
    p.add_argument("--theta", type=float, help="momentum direction angle, default 0")

    p = sub.add_parser("reduce", help="radial period and apsidal sweep over (eps, Ehat, kappa) grids")
    common(p)
    p.add_argument("--eps", help="comma-separated eps values (default 0)")
    p.add_argument("--ehat", help="comma-separated Ehat values (default 0.5)")
    p.add_argument("--kappa", help="comma-separated kappa values (default 0)")

    p = sub.add_parser("classify", help="full periodicity verdict with evidence (JSON)")
    common(p)
    p.add_argument("--grid", type=int, help="defect/curvature grid size (default 257)")

    p = sub.add_parser("h4", help="h^4 obstruction 6F'^3 - 6FF'F'' + F^2 F''' on a grid")
    common(p)
    p.add_argument("--points", type=int, help="grid size (default 65)")
    p.add_argument("--at", help="comma-separated expansion centres instead of a grid")

    p = sub.add_parser("sweep-h", help="apsidal power sweep in the turning half-width h")
    common(p)
    p.add_argument("--center", type=float, help="expansion centre c (default 0)")
    p.add_argument("--h", help="comma-separated half widths (default 0.05,0.1,0.15,0.2)")

    return parser


_COMMON_KEYS = ("chart", "out", "format", "jobs", "tol", "stamp")


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError("config file must hold a JSON object")

    merged = dict(file_values)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None and value is not False:
            merged[key] = value

    config = RunConfig(command=args.command)
    config.chart = str(merged.pop("chart", "") or "")
    config.out = merged.pop("out", None)
    config.format = str(merged.pop("format", "csv") or "csv")
    if config.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {config.format!r}")
    jobs = merged.pop("jobs", None)
    config.jobs = int(jobs) if jobs is not None else None
    tol = merged.pop("tol", None)
    config.tol = float(tol) if tol is not None else None
    config.stamp = bool(merged.pop("stamp", False))
    config.extra = merged
    return config


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        config = _resolve_config(args)
        return _COMMANDS[args.command](config)
    except (ConfigError, *_CONFIG_ERRORS) as exc:
        print(f"magrev: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"magrev: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MagrevError as exc:
        print(f"magrev: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
