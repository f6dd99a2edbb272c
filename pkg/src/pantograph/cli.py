"""Command line front end.

Every float is printed with 17 significant digits so outputs round-trip
bit for bit, and identical arguments always produce identical bytes.

Fields use a small grammar: ``linear:<lam>``, ``affine:<lam>,<c>`` or
``poly:<c0>,<c1>,...``; profiles are ``poly:<c0>,...`` or ``const:<v>``.

The environment variable ``PANTO_SEED_TOL`` replaces the default series
tolerance (1e-15) and the default reconstruction compatibility tolerance
(1e-8) when the corresponding ``--tol`` flag is not given.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import (
    AnalysisReport,
    find_roots,
    local_extrema,
    lyapunov_curve,
    oscillation_experiment,
    ratio_curve,
    regularity_count,
)
from .core import Degenerate, Field, Problem, Profile
from .errors import NumericalError, PantographError, ValidationError
from .linear import SERIES_TOL, phi_series
from .reconstruct import COMPAT_TOL, reconstruct_iterated
from .stepper import SolveConfig, solve

__all__ = ["FieldSpec", "ProfileSpec", "parse_field_spec", "parse_profile_spec", "run", "main"]

MAX_DEGREE = 16
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
TOL_ENV = "PANTO_SEED_TOL"


# -- specs -------------------------------------------------------------------

def _parse_numbers(text: str, what: str) -> Tuple[float, ...]:
    parts = text.split(",")
    out = []
    for p in parts:
        try:
            v = float(p)
        except ValueError:
            raise ValidationError(f"{what}: {p!r} is not a number") from None
        if not math.isfinite(v):
            raise ValidationError(f"{what}: {p!r} is not finite")
        out.append(v)
    return tuple(out)


def _fmt_spec(kind: str, coeffs: Sequence[float]) -> str:
    return kind + ":" + ",".join(repr(float(c)) for c in coeffs)


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    coeffs: Tuple[float, ...]

    def __str__(self) -> str:
        return _fmt_spec(self.kind, self.coeffs)

    def to_field(self, bracket: Optional[Tuple[float, float]] = None) -> Field:
        if self.kind == "linear":
            return Field.linear(self.coeffs[0])
        if self.kind == "affine":
            return Field.affine(*self.coeffs)
        return Field.polynomial(self.coeffs, monotone_bracket=bracket)


@dataclass(frozen=True)
class ProfileSpec:
    kind: str
    coeffs: Tuple[float, ...]

    def __str__(self) -> str:
        return _fmt_spec(self.kind, self.coeffs)

    def to_profile(self, smoothness: int = 0) -> Profile:
        coeffs = self.coeffs
        if self.kind == "const":
            v = coeffs[0]
            return Profile(lambda t: v, lambda t: 0.0, smoothness)
        value = Field.polynomial(coeffs).evaluate
        deriv_coeffs = [i * c for i, c in enumerate(coeffs)][1:] or [0.0]
        slope = Field.polynomial(deriv_coeffs).evaluate
        return Profile(value, slope, smoothness)


def _split_spec(text: str, kinds) -> Tuple[str, str]:
    kind, sep, rest = text.partition(":")
    if not sep or kind not in kinds:
        raise ValidationError(f"spec {text!r} must look like <kind>:<numbers> with kind in {sorted(kinds)}")
    return kind, rest


def parse_field_spec(text: str) -> FieldSpec:
    kind, rest = _split_spec(text, {"linear", "affine", "poly"})
    coeffs = _parse_numbers(rest, f"field {text!r}")
    arity = {"linear": 1, "affine": 2}.get(kind)
    if arity is not None and len(coeffs) != arity:
        raise ValidationError(f"field {text!r}: {kind} takes {arity} number(s)")
    if kind == "poly" and len(coeffs) > MAX_DEGREE + 1:
        raise ValidationError(f"field {text!r}: degree exceeds {MAX_DEGREE}")
    return FieldSpec(kind, coeffs)


def parse_profile_spec(text: str) -> ProfileSpec:
    kind, rest = _split_spec(text, {"poly", "const"})
    coeffs = _parse_numbers(rest, f"profile {text!r}")
    if kind == "const" and len(coeffs) != 1:
        raise ValidationError(f"profile {text!r}: const takes one number")
    if kind == "poly" and len(coeffs) > MAX_DEGREE + 1:
        raise ValidationError(f"profile {text!r}: degree exceeds {MAX_DEGREE}")
    return ProfileSpec(kind, coeffs)


# -- output ------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _to_json(obj) -> str:
    """JSON with every float at 17 significant digits; non-finite floats become null."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _report_json(report: AnalysisReport, meta: dict, **extra) -> str:
    doc = report.to_dict()
    doc.update(extra)
    doc["meta"] = meta
    return _to_json(doc) + "\n"


# -- argument handling -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.format_usage()}{self.prog}: error: {message}")


def _env_tol(default: float) -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return default
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not (math.isfinite(v) and v > 0):
        raise ValidationError(f"{TOL_ENV} must be a positive number")
    return v


def _bracket(text: Optional[str]):
    if text is None:
        return None
    lo_hi = _parse_numbers(text, "--bracket")
    if len(lo_hi) != 2:
        raise ValidationError("--bracket takes lo,hi")
    return lo_hi


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="write to FILE instead of stdout")


def _add_problem(p, t_end_required=True):
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--x0", type=float, help="initial value (a = 0)")
    p.add_argument("--profile", help="initial profile on [q a, a] (a > 0)")
    p.add_argument("--l", type=int, default=0, help="declared smoothness class of the profile")
    p.add_argument("--field", required=True)
    p.add_argument("--bracket", help="lo,hi interval on which a poly field is monotone")
    p.add_argument("--t-end", type=float, required=t_end_required)
    _add_config(p)


def _add_config(p):
    p.add_argument("--steps-per-segment", type=int, default=64)
    p.add_argument("--steps-per-unit", type=int, default=64)
    p.add_argument("--h0", type=float)


def _config(ns) -> SolveConfig:
    return SolveConfig(steps_per_segment=ns.steps_per_segment, steps_per_unit=ns.steps_per_unit, h0=ns.h0)


def _problem(ns) -> Tuple[Problem, dict]:
    fspec = parse_field_spec(ns.field)
    field = fspec.to_field(_bracket(ns.bracket))
    meta = {"q": ns.q, "a": ns.a, "field": str(fspec), "bracket": _bracket(ns.bracket)}
    if ns.a == 0.0:
        if ns.x0 is None or ns.profile is not None:
            raise ValidationError("a = 0 needs --x0 and no --profile")
        meta["x0"] = ns.x0
        return Problem(ns.q, ns.a, field, Degenerate(ns.x0)), meta
    if ns.profile is None or ns.x0 is not None:
        raise ValidationError("a > 0 needs --profile and no --x0")
    pspec = parse_profile_spec(ns.profile)
    meta.update(profile=str(pspec), l=ns.l)
    return Problem(ns.q, ns.a, field, pspec.to_profile(ns.l)), meta


def _meta(command: str, ns, extra: dict, config: Optional[SolveConfig] = None) -> dict:
    meta = {"command": command, "version": __version__}
    meta.update(extra)
    if getattr(ns, "t_end", None) is not None:
        meta["t_end"] = ns.t_end
    if config is not None:
        meta["config"] = dataclasses.asdict(config)
    return meta


# -- subcommands -------------------------------------------------------------

def _cmd_solve(ns) -> str:
    problem, pmeta = _problem(ns)
    config = _config(ns)
    traj = solve(problem, ns.t_end, config)
    if ns.format == "csv":
        return _csv(("t", "x", "dx"), zip(traj.knots, traj.x, traj.dx))
    meta = _meta("solve", ns, pmeta, config)
    return _to_json({"t": traj.knots, "x": traj.x, "dx": traj.dx, "meta": meta}) + "\n"


def _cmd_series(ns) -> str:
    tol = ns.tol if ns.tol is not None else _env_tol(SERIES_TOL)
    value = ns.x0 * phi_series(ns.lam, ns.q, ns.t, tol)
    if ns.format == "csv":
        return fmt(value) + "\n"
    meta = {"command": "series", "version": __version__, "q": ns.q, "lambda": ns.lam,
            "x0": ns.x0, "t": ns.t, "tol": tol}
    return _to_json({"value": value, "meta": meta}) + "\n"


def _cmd_roots(ns) -> str:
    problem, pmeta = _problem(ns)
    config = _config(ns)
    traj = solve(problem, ns.t_end, config)
    roots = find_roots(traj, ns.t_from, ns.t_to)
    if ns.format == "csv":
        return _csv(("root",), ((r,) for r in roots))
    report = AnalysisReport(roots=roots, extrema=local_extrema(traj))
    return _report_json(report, _meta("roots", ns, pmeta, config))


def _sample_times(ns) -> list:
    if ns.times is not None:
        return list(_parse_numbers(ns.times, "--times"))
    t_min = ns.t_min if ns.t_min is not None else 1.0
    if not 0 < t_min < ns.t_end:
        raise ValidationError("--t-min must lie in (0, t-end)")
    return [float(t) for t in np.geomspace(t_min, ns.t_end, ns.num)]


def _cmd_lyapunov(ns) -> str:
    problem, pmeta = _problem(ns)
    config = _config(ns)
    traj = solve(problem, ns.t_end, config)
    times = _sample_times(ns)
    lyap = lyapunov_curve(traj, times)
    ratio = ratio_curve(traj, times)
    if ns.format == "csv":
        ratio_at = dict(ratio)
        return _csv(("t", "lyapunov", "ratio"),
                    ((t, v, ratio_at.get(t, float("nan"))) for t, v in lyap))
    report = AnalysisReport(lyapunov_samples=lyap, ratio_samples=ratio)
    return _report_json(report, _meta("lyapunov", ns, pmeta, config))


def _cmd_reconstruct(ns) -> str:
    if ns.a <= 0:
        raise ValidationError("reconstruct needs --a > 0")
    ns.x0 = None
    problem, pmeta = _problem(ns)
    tol = ns.tol if ns.tol is not None else _env_tol(COMPAT_TOL)
    result = reconstruct_iterated(problem, ns.levels, tol, ns.samples)
    rows = []
    for seg in reversed(result.segments):
        pts = list(zip(seg.t, seg.x))
        if rows:
            pts = pts[1:]  # junction already emitted
        rows.extend(pts)
    if ns.format == "csv":
        return _csv(("t", "x"), rows)
    meta = _meta("reconstruct", ns, pmeta)
    meta.update(levels=ns.levels, tol=tol, samples=ns.samples)
    return _to_json({
        "t": [r[0] for r in rows],
        "x": [r[1] for r in rows],
        "levels_completed": result.levels_completed,
        "warnings": result.warnings,
        "diagnostic": result.diagnostic,
        "meta": meta,
    }) + "\n"


def _cmd_regularity(ns) -> str:
    count = regularity_count(ns.l, ns.a, ns.q, ns.t)
    if ns.format == "csv":
        return str(count) + "\n"
    report = AnalysisReport()
    meta = {"command": "regularity", "version": __version__, "q": ns.q, "a": ns.a, "l": ns.l, "t": ns.t}
    doc = report.to_dict()
    doc["regularity"] = [{"t": ns.t, "continuous_derivatives": count}]
    doc["meta"] = meta
    return _to_json(doc) + "\n"


def _oscillation_rows(rep):
    events = [(r, "root", 0.0) for r in rep.roots] + [(e.t, e.kind, e.value) for e in rep.extrema]
    return sorted(events, key=lambda ev: ev[0])


def _cmd_oscillate(ns) -> str:
    config = _config(ns)
    rep = oscillation_experiment(ns.lam, ns.q, ns.x0, ns.t_end, config)
    if ns.format == "csv":
        return _csv(("kind", "t", "x"), ((k, t, x) for t, k, x in _oscillation_rows(rep)))
    report = AnalysisReport(roots=rep.roots, extrema=rep.extrema)
    meta = {"command": "oscillate", "version": __version__, "lambda": ns.lam, "q": ns.q, "x0": ns.x0,
            "t_end": ns.t_end, "config": dataclasses.asdict(config),
            "magnitude_ratios": rep.magnitude_ratios}
    return _report_json(report, meta)


def _parse_grid(items: Sequence[str]) -> Tuple[list, list]:
    axes = {}
    for item in items:
        key, sep, values = item.partition("=")
        if not sep or key not in ("q", "lambda"):
            raise ValidationError(f"--grid entries look like q=... or lambda=..., got {item!r}")
        axes[key] = list(_parse_numbers(values, f"--grid {key}"))
    if set(axes) != {"q", "lambda"}:
        raise ValidationError("--grid needs both q=... and lambda=...")
    return axes["q"], axes["lambda"]


def sweep_point(q: float, lam: float, x0: float, t_end: float, config: SolveConfig) -> dict:
    """One grid point of the (q, lambda) study; returns a plain record."""
    traj = solve(Problem.linear(lam, q, x0), t_end, config)
    roots = find_roots(traj)
    extrema = local_extrema(traj)
    ratios = [abs(extrema[i + 1].value) / abs(extrema[i].value)
              for i in range(len(extrema) - 1) if extrema[i].value != 0.0]
    lyap = lyapunov_curve(traj, [t_end]) if traj.x[-1] != 0.0 else []
    report = AnalysisReport(roots=roots, extrema=extrema, lyapunov_samples=lyap)
    rec = {"q": q, "lambda": lam}
    rec.update(report.to_dict())
    rec["magnitude_ratios"] = ratios
    return rec


def _cmd_sweep(ns) -> str:
    qs, lams = _parse_grid(ns.grid)
    config = _config(ns)
    points = [(q, lam) for q in qs for lam in lams]
    args = ([p[0] for p in points], [p[1] for p in points], [ns.x0] * len(points),
            [ns.t_end] * len(points), [config] * len(points))
    if ns.jobs > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            records = list(pool.map(sweep_point, *args))
    else:
        records = list(map(sweep_point, *args))
    if ns.format == "csv":
        rows = []
        for r in records:
            first = r["roots"][0] if r["roots"] else float("nan")
            peak = max((abs(e["value"]) for e in r["extrema"]), default=float("nan"))
            lyap = r["lyapunov"][0][1] if r["lyapunov"] else float("nan")
            rows.append((r["q"], r["lambda"], len(r["roots"]), first, peak, lyap))
        return _csv(("q", "lambda", "n_roots", "first_root", "max_abs_extremum", "lyapunov_end"), rows)
    meta = {"command": "sweep", "version": __version__, "x0": ns.x0, "t_end": ns.t_end,
            "config": dataclasses.asdict(config)}
    lines = []
    for i, rec in enumerate(records):
        rec["meta"] = dict(meta, index=i)
        lines.append(_to_json(rec))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pantograph", description="Solve and analyse x'(t) = F(x(q t)).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="forward solve; CSV columns t,x,dx at the knots")
    _add_problem(p)
    _add_output(p)
    p.set_defaults(run=_cmd_solve)

    p = sub.add_parser("series", help="x0 * phi(t) for x' = lambda x(q t) by its Taylor series")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--tol", type=float)
    _add_output(p)
    p.set_defaults(run=_cmd_series)

    p = sub.add_parser("roots", help="sign changes of the solution")
    _add_problem(p)
    p.add_argument("--t-from", type=float)
    p.add_argument("--t-to", type=float)
    _add_output(p)
    p.set_defaults(run=_cmd_roots)

    p = sub.add_parser("lyapunov", help="(1/t) log|x(t)| and x(t)/x(q t) samples")
    _add_problem(p)
    p.add_argument("--times", help="comma-separated sample times")
    p.add_argument("--t-min", type=float)
    p.add_argument("--num", type=int, default=16)
    _add_output(p)
    p.set_defaults(run=_cmd_lyapunov)

    p = sub.add_parser("reconstruct", help="extend a profile backwards in time")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--field", required=True)
    p.add_argument("--bracket")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--tol", type=float)
    p.add_argument("--samples", type=int, default=4 * 64)
    _add_output(p)
    p.set_defaults(run=_cmd_reconstruct)

    p = sub.add_parser("regularity", help="continuous derivative count at t")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--t", type=float, required=True)
    _add_output(p)
    p.set_defaults(run=_cmd_regularity)

    p = sub.add_parser("oscillate", help="roots and extrema of x' = -lambda x(q t)")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="|lambda| > 0")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--t-end", type=float, required=True)
    _add_config(p)
    _add_output(p)
    p.set_defaults(run=_cmd_oscillate)

    p = sub.add_parser("sweep", help="one record per (q, lambda) grid point")
    p.add_argument("--grid", nargs=2, required=True, metavar="AXIS=VALUES")
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_config(p)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")
    p.set_defaults(run=_cmd_sweep)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Execute one command line; returns the exit code instead of exiting."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        text = ns.run(ns)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except NumericalError as exc:
        print(f"pantograph: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (PantographError, ValueError) as exc:
        print(f"pantograph: {exc}", file=stderr)
        return EXIT_VALIDATION
    if ns.out:
        with open(ns.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
