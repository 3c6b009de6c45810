"""Command-line front end: sweeps, eigenvalue tables, branch traces, checks.

Five subcommands share one configuration model (JSON file plus flags, flags
win) and one output discipline: CSV tables with a header row and 17
significant digits per float, plus a summary.json per run.  Identical
configurations produce byte-identical files; floats round-trip exactly
through either format.

    spectrum   discriminant and eigenvalue table over a (lambda, b, n) grid
    eigen      eigenvalue detail: kernel vectors and transversality flags
    limits     limiting regimes: n -> inf, Euler lambda -> 0, b -> 0, Burbea
    branch     trace bifurcating branches at one (lambda, b) for given m
    verify     built-in check suite (Bessel identities, trivial residual,
               finite-difference multipliers); nonzero exit on failure

Exit codes: 0 pass, 1 validation error, 2 verification failure, 3 branch
trace returned a partial result (outputs still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from . import contour
from .bessel import bessel_derivative, bessel_i, bessel_k, beltrami_k0
from .contour import g_functional, linearization_check, make_grid
from .continuation import trace_branch
from .spectrum import (
    SearchExhausted,
    discriminant,
    eigenvalues,
    euler_eigenvalues,
    find_threshold,
    kernel_vector,
    omega_limits,
    simply_connected_limit,
    simply_connected_limit_minus,
    transversality_check,
)

_COMMANDS = ("spectrum", "eigen", "limits", "branch", "verify")

# multiplier-check bound by grid size: the quadrature is spectral, so the
# finite-difference truncation (~1e-9 at eps = 2e-5) dominates at every P;
# the coarse-grid entry only adds slack for modes near the bandwidth
_MULTIPLIER_BOUNDS = {64: 1e-5, 128: 1e-6, 256: 1e-6}


class ConfigError(ValueError):
    """Invalid configuration (bad grid, out-of-domain parameter, ...)."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one CLI run."""

    command: str
    lambdas: tuple = (1.0,)
    bs: tuple = (0.5,)
    ns: tuple = tuple(range(1, 11))
    ms: tuple = ()  # branch only; empty means "threshold + 2"
    sign: str = "both"
    window: int = 50
    trunc: int = 16
    grid_size: int = 256
    s_max: float = 5e-3
    steps: int = 8
    tol: float = 1e-11
    out: str = "runs"
    fmt: str = "csv"
    jobs: int = 1
    inject_fault: bool = False

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.lambdas:
            raise ConfigError("lambda grid must be nonempty")
        if not self.bs:
            raise ConfigError("b grid must be nonempty")
        for lam in self.lambdas:
            if not lam > 0.0 or not math.isfinite(lam):
                raise ConfigError(f"lambda values must be positive; got {lam}")
        for b in self.bs:
            if not 0.0 < b < 1.0:
                raise ConfigError(
                    f"b values must lie strictly inside (0, 1); got {b}"
                )
        if self.sign not in ("+", "-", "plus", "minus", "both"):
            raise ConfigError(f"sign must be +, -, or both; got {self.sign!r}")
        if self.grid_size < 8 or self.grid_size % 2 != 0:
            raise ConfigError(
                f"grid size must be even and >= 8; got {self.grid_size}"
            )
        if self.trunc < 2:
            raise ConfigError(f"trunc must be >= 2; got {self.trunc}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1; got {self.steps}")
        if not self.s_max > 0.0:
            raise ConfigError(f"s-max must be positive; got {self.s_max}")
        if self.window < 10:
            raise ConfigError(f"window must be >= 10; got {self.window}")
        if not self.tol > 0.0:
            raise ConfigError(f"tol must be positive; got {self.tol}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json; got {self.fmt!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1; got {self.jobs}")

    @property
    def signs(self):
        if self.sign == "both":
            return ("+", "-")
        return ("+",) if self.sign in ("+", "plus") else ("-",)


def parse_float_grid(text):
    """Grid syntax: 'v', 'v1,v2,...', or 'start:stop:count' (inclusive)."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range syntax is start:stop:count; got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError(f"range count must be >= 1; got {count}")
        if count == 1:
            return (start,)
        return tuple(np.linspace(start, stop, count).tolist())
    try:
        return tuple(float(t) for t in text.split(",") if t.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad grid value in {text!r}: {exc}") from None


def parse_int_grid(text):
    """Integer grid: 'n', 'n1,n2,...', or 'lo:hi' inclusive (may be empty)."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 2:
            raise ConfigError(f"integer range syntax is lo:hi; got {text!r}")
        lo, hi = int(parts[0]), int(parts[1])
        return tuple(range(lo, hi + 1))
    try:
        return tuple(int(t) for t in text.split(",") if t.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad integer in {text!r}: {exc}") from None


def _coerce_grid(value, parser):
    """Config-file grids may be JSON lists or the same strings as flags."""
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return parser(value)


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _json_cell(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, np.integer):
        return int(value)
    return float(value)


def _write_table(path, header, rows, fmt):
    """One table, CSV (RFC-4180 quoting) or JSON (list of row objects)."""
    if fmt == "csv":
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    else:
        objects = [
            {key: _json_cell(v) for key, v in zip(header, row)} for row in rows
        ]
        with open(path, "w") as handle:
            json.dump(objects, handle, indent=2, sort_keys=True)
            handle.write("\n")


def _write_summary(out_dir, payload):
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _ordered_map(fn, items, jobs):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _table_name(config, stem):
    return f"{stem}.{'csv' if config.fmt == 'csv' else 'json'}"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_spectrum(config):
    def cell(point):
        lam, b = point
        threshold = find_threshold(lam, b, window=config.window)
        lower, upper = omega_limits(lam, b)
        rows = []
        for n in config.ns:
            pair = eigenvalues(n, lam, b)
            rows.append(
                (
                    lam,
                    b,
                    n,
                    discriminant(n, lam, b),
                    None if pair is None else pair.omega_minus,
                    None if pair is None else pair.omega_plus,
                    lower,
                    upper,
                    threshold.n0,
                    threshold.n,
                )
            )
        return rows

    points = [(lam, b) for lam in config.lambdas for b in config.bs]
    per_cell = _ordered_map(cell, points, config.jobs)
    rows = [row for chunk in per_cell for row in chunk]
    header = (
        "lambda",
        "b",
        "n",
        "delta",
        "omega_minus",
        "omega_plus",
        "omega_inf_minus",
        "omega_inf_plus",
        "n0",
        "n_threshold",
    )
    name = _table_name(config, "spectrum")
    _write_table(os.path.join(config.out, name), header, rows, config.fmt)
    return 0, {"files": [name], "rows": len(rows), "cells": len(points)}


def _cmd_eigen(config):
    def cell(point):
        lam, b = point
        rows = []
        for n in config.ns:
            pair = eigenvalues(n, lam, b)
            if pair is None or pair.degenerate:
                rows.append(
                    (lam, b, n, discriminant(n, lam, b))
                    + (None,) * 6
                    + (False, False)
                )
                continue
            v_minus = kernel_vector(n, lam, b, "-")
            v_plus = kernel_vector(n, lam, b, "+")
            rows.append(
                (
                    lam,
                    b,
                    n,
                    pair.discriminant,
                    pair.omega_minus,
                    pair.omega_plus,
                    v_minus[0],
                    v_minus[1],
                    v_plus[0],
                    v_plus[1],
                    transversality_check(n, lam, b, "-"),
                    transversality_check(n, lam, b, "+"),
                )
            )
        return rows

    points = [(lam, b) for lam in config.lambdas for b in config.bs]
    per_cell = _ordered_map(cell, points, config.jobs)
    rows = [row for chunk in per_cell for row in chunk]
    header = (
        "lambda",
        "b",
        "n",
        "delta",
        "omega_minus",
        "omega_plus",
        "v1_minus",
        "v2_minus",
        "v1_plus",
        "v2_plus",
        "transversal_minus",
        "transversal_plus",
    )
    name = _table_name(config, "eigen")
    _write_table(os.path.join(config.out, name), header, rows, config.fmt)
    return 0, {"files": [name], "rows": len(rows), "cells": len(points)}


def _cmd_limits(config):
    def cell(point):
        lam, b = point
        lower, upper = omega_limits(lam, b)
        rows = []
        for n in config.ns:
            euler = None
            if n >= 1:
                euler = euler_eigenvalues(n, b)
            rows.append(
                (
                    lam,
                    b,
                    n,
                    lower,
                    upper,
                    None if euler is None else euler.minus,
                    None if euler is None else euler.plus,
                    simply_connected_limit_minus(n, lam),
                    simply_connected_limit(n, lam),
                    (n - 1.0) / (2.0 * n),
                )
            )
        return rows

    points = [(lam, b) for lam in config.lambdas for b in config.bs]
    per_cell = _ordered_map(cell, points, config.jobs)
    rows = [row for chunk in per_cell for row in chunk]
    header = (
        "lambda",
        "b",
        "n",
        "omega_inf_minus",
        "omega_inf_plus",
        "euler_minus",
        "euler_plus",
        "sc_minus",
        "sc_plus",
        "burbea",
    )
    name = _table_name(config, "limits")
    _write_table(os.path.join(config.out, name), header, rows, config.fmt)
    return 0, {"files": [name], "rows": len(rows), "cells": len(points)}


def _lattice_row(boundary, m, count):
    coeffs = boundary.coefficients
    out = []
    for k in range(count):
        idx = m * (k + 1) - 1
        out.append(coeffs[idx] if idx < len(coeffs) else 0.0)
    return out


def _cmd_branch(config):
    if len(config.lambdas) != 1 or len(config.bs) != 1:
        raise ConfigError(
            "branch tracing wants exactly one lambda and one b"
            f" (got {len(config.lambdas)} x {len(config.bs)})"
        )
    lam, b = config.lambdas[0], config.bs[0]
    if config.ms:
        modes = tuple(config.ms)
    else:
        modes = (find_threshold(lam, b, window=config.window).n + 2,)
    for m in modes:
        if m < 1:
            raise ConfigError(f"fold count must be >= 1; got {m}")
        delta = discriminant(m, lam, b)
        if not delta > 0.0:
            raise ConfigError(
                f"mode m={m} has discriminant {delta:.17g} <= 0 at"
                f" lambda={lam:.17g}, b={b:.17g}; no simple eigenvalue pair"
            )

    grid = make_grid(config.grid_size)

    def job(task):
        m, sign = task
        trace = trace_branch(
            lam, b, m, sign, config.s_max, config.steps,
            trunc=config.trunc, grid=grid,
        )
        pair = eigenvalues(m, lam, b)
        omega_star = pair.omega_plus if sign == "+" else pair.omega_minus
        svals = [p.s for p in trace.points]
        ovals = [p.omega for p in trace.points]
        if len(svals) >= 2:
            k = min(3, len(svals))  # fit the smallest-s prefix
            omega0 = float(np.polyfit(svals[:k], ovals[:k], 1)[1])
        elif svals:
            omega0 = ovals[0]
        else:
            omega0 = None
        count = max(
            (len(p.f1.coefficients) + 1) // m for p in trace.points
        ) if trace.points else 0
        rows = []
        for p in trace.points:
            rows.append(
                [p.s, p.omega, p.residual]
                + _lattice_row(p.f1, m, count)
                + _lattice_row(p.f2, m, count)
            )
        header = (
            ["s", "omega", "residual"]
            + [f"a{m * (k + 1) - 1}" for k in range(count)]
            + [f"b{m * (k + 1) - 1}" for k in range(count)]
        )
        tag = "plus" if sign == "+" else "minus"
        name = _table_name(config, f"branch_m{m}_{tag}")
        _write_table(os.path.join(config.out, name), header, rows, config.fmt)
        return {
            "m": m,
            "sign": sign,
            "file": name,
            "points": len(trace.points),
            "completed": trace.completed,
            "termination": trace.termination_reason,
            "omega_star": omega_star,
            "omega_extrapolated": omega0,
            "gap": None if omega0 is None else abs(omega0 - omega_star),
        }

    tasks = [(m, sign) for m in modes for sign in config.signs]
    branches = _ordered_map(job, tasks, config.jobs)
    partial = any(not entry["completed"] for entry in branches)
    code = 3 if partial else 0
    return code, {
        "files": [entry["file"] for entry in branches],
        "branches": branches,
        "partial": partial,
    }


def _verify_bessel_wronskian():
    worst = 0.0
    for n in range(0, 16):
        for x in np.geomspace(0.1, 30.0, 25):
            x = float(x)
            wronskian = (
                bessel_i(n, x) * bessel_derivative("K", n, x)
                - bessel_derivative("I", n, x) * bessel_k(n, x)
            )
            worst = max(worst, abs(wronskian + 1.0 / x) * x)
    return worst


def _verify_bessel_beltrami():
    rng = np.random.default_rng(0)
    worst = 0.0
    for theta in rng.uniform(0.0, 2.0 * math.pi, size=50):
        theta = float(theta)
        summed = beltrami_k0(1.0, 0.5, theta, 40)
        dist = math.sqrt(1.25 - math.cos(theta))
        worst = max(worst, abs(summed - bessel_k(0, dist)))
    return worst


def _verify_trivial_residual(grid):
    from .contour import annulus_boundary

    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        for b in (0.3, 0.5, 0.7):
            outer, inner = annulus_boundary(1.0), annulus_boundary(b)
            for omega in (-0.5, 0.0, 0.5):
                g1, g2 = g_functional(lam, b, omega, outer, inner, grid)
                worst = max(
                    worst, float(np.max(np.abs(g1))), float(np.max(np.abs(g2)))
                )
    return worst


def _verify_multipliers(grid):
    worst = 0.0
    for n in range(1, 13):
        _, deviation = linearization_check(n, 1.0, 0.5, 0.2, 2e-5, grid)
        worst = max(worst, float(np.max(np.abs(deviation))))
    return worst


def _cmd_verify(config):
    grid = make_grid(config.grid_size)
    multiplier_bound = _MULTIPLIER_BOUNDS.get(config.grid_size, 1e-6)
    checks = [
        ("bessel_wronskian", _verify_bessel_wronskian(), 1e-11),
        ("bessel_beltrami", _verify_bessel_beltrami(), 1e-10),
        ("trivial_residual", _verify_trivial_residual(grid), config.tol),
        ("multiplier_match", _verify_multipliers(grid), multiplier_bound),
    ]
    rows = []
    all_passed = True
    for name, measured, bound in checks:
        passed = measured <= bound
        all_passed = all_passed and passed
        rows.append((name, config.grid_size, measured, bound, passed))
    header = ("check", "grid_size", "measured", "bound", "passed")
    name = _table_name(config, "verify")
    _write_table(os.path.join(config.out, name), header, rows, config.fmt)
    summary = {
        "files": [name],
        "checks": [
            {
                "name": check,
                "measured": measured,
                "bound": bound,
                "passed": measured <= bound,
            }
            for check, measured, bound in checks
        ],
        "passed": all_passed,
    }
    return (0 if all_passed else 2), summary


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "eigen": _cmd_eigen,
    "limits": _cmd_limits,
    "branch": _cmd_branch,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    # all validation problems exit 1, including argparse's own (default 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser():
    parser = _Parser(
        prog="qgsw-vstates",
        description="Rotating doubly-connected vortex patches: spectrum "
        "tables, bifurcation branches, and verification sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--lambda", dest="lambdas", metavar="GRID",
                       help="lambda grid: v, v1,v2,..., or start:stop:count")
        p.add_argument("--b", dest="bs", metavar="GRID",
                       help="b grid, same syntax, values inside (0,1)")
        p.add_argument("--n", dest="ns", metavar="RANGE",
                       help="mode range: n, n1,n2,..., or lo:hi inclusive")
        p.add_argument("--m", dest="ms", metavar="RANGE",
                       help="fold counts for branch tracing")
        p.add_argument("--sign", choices=["+", "-", "plus", "minus", "both"])
        p.add_argument("--window", type=int)
        p.add_argument("--trunc", type=int)
        p.add_argument("--grid-size", dest="grid_size", type=int)
        p.add_argument("--s-max", dest="s_max", type=float)
        p.add_argument("--steps", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", dest="fmt", choices=["csv", "json"])
        p.add_argument("--jobs", type=int,
                       help="worker threads (default: all cores)")
        p.add_argument("--inject-fault", action="store_true",
                       default=None, help=argparse.SUPPRESS)
    return parser


def build_config(args):
    """Merge precedence: flag > QGSW_VSTATES_OUT (out only) > config file."""
    file_values = {}
    if args.config is not None:
        try:
            with open(args.config) as handle:
                file_values = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(file_values, dict):
            raise ConfigError("config file must hold a JSON object")
    # accept the flag spellings as config keys too
    aliases = {"lambda": "lambdas", "b": "bs", "n": "ns", "m": "ms",
               "format": "fmt", "grid-size": "grid_size", "s-max": "s_max"}
    for alias, field_name in aliases.items():
        if alias in file_values:
            file_values.setdefault(field_name, file_values[alias])

    def pick(key, fallback):
        flag = getattr(args, key)
        if flag is not None:
            return flag
        if key in file_values:
            return file_values[key]
        return fallback

    out = args.out
    if out is None:
        out = os.environ.get("QGSW_VSTATES_OUT")
    if out is None:
        out = file_values.get("out", "runs")

    defaults = RunConfig(command=args.command)
    kwargs = {
        "command": args.command,
        "lambdas": _coerce_grid(pick("lambdas", defaults.lambdas),
                                parse_float_grid),
        "bs": _coerce_grid(pick("bs", defaults.bs), parse_float_grid),
        "ns": _coerce_grid(pick("ns", defaults.ns), parse_int_grid),
        "ms": _coerce_grid(pick("ms", defaults.ms), parse_int_grid),
        "sign": pick("sign", defaults.sign),
        "window": int(pick("window", defaults.window)),
        "trunc": int(pick("trunc", defaults.trunc)),
        "grid_size": int(pick("grid_size", defaults.grid_size)),
        "s_max": float(pick("s_max", defaults.s_max)),
        "steps": int(pick("steps", defaults.steps)),
        "tol": float(pick("tol", defaults.tol)),
        "out": str(out),
        "fmt": pick("fmt", defaults.fmt),
        "jobs": int(pick("jobs", os.cpu_count() or 1)),
        "inject_fault": bool(pick("inject_fault", False)),
    }
    kwargs["ms"] = tuple(int(v) for v in kwargs["ms"])
    kwargs["ns"] = tuple(int(v) for v in kwargs["ns"])
    return RunConfig(**kwargs)


def run(config):
    """Execute one resolved configuration; returns the process exit code."""
    os.makedirs(config.out, exist_ok=True)
    previous_fault = contour._FAULT_FLIP_INNER
    contour._FAULT_FLIP_INNER = config.inject_fault
    try:
        code, results = _DISPATCH[config.command](config)
    finally:
        contour._FAULT_FLIP_INNER = previous_fault
    summary = {
        "command": config.command,
        "config": {
            key: list(value) if isinstance(value, tuple) else value
            for key, value in asdict(config).items()
        },
        "exit_code": code,
        "results": results,
    }
    _write_summary(config.out, summary)
    return code


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = build_config(args)
        return run(config)
    except (ConfigError, SearchExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
