"""Command-line front end.

Exit codes: 0 success, 1 usage / parse / precondition error, 2 obstruction
(an infinite distance).  +inf is written as the string "inf".
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import curves, geodesics, transport
from .errors import ObstructionError, PreconditionError
from .measures import DiscreteMeasure, MeasureCurve
from .metric import ExtendedMetric, MetricError
from .parallel import thread_cap
from .young import CATALOG, YoungFunction, from_spec, linear_bounded, power, power_exp, spec_to_json

__all__ = ["main", "parse_psi", "to_jsonable"]

EXIT_OK, EXIT_ERROR, EXIT_OBSTRUCTION = 0, 1, 2


class InputError(Exception):
    """Bad input; the message names the offending file or flag."""


def to_jsonable(obj):
    """Plain-JSON version of results: numpy scalars unwrapped, +inf as "inf"."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _load_json(path: str, what: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_psi(text: str) -> YoungFunction:
    """A Young function from a catalog name, ``kind:params``, inline JSON or a JSON file."""
    text = text.strip()
    if text in CATALOG:
        return CATALOG[text]
    if text.startswith("{"):
        try:
            return from_spec(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"--psi: column {exc.colno}: {exc.msg}") from None
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"--psi: {exc}") from None
    if ":" in text and not os.path.exists(text):
        kind, _, params = text.partition(":")
        try:
            nums = [float(x) for x in params.split(",")]
            if kind == "power" and len(nums) == 1:
                return power(nums[0])
            if kind == "power_exp" and len(nums) == 1:
                return power_exp(nums[0])
            if kind == "linear_bounded" and len(nums) in (1, 2):
                return linear_bounded(*nums)
        except ValueError as exc:
            raise InputError(f"--psi {text!r}: {exc}") from None
        raise InputError(f"--psi {text!r}: unknown shorthand")
    if os.path.exists(text):
        try:
            return from_spec(_load_json(text, "psi"))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"psi file {text}: {exc}") from None
    raise InputError(f"--psi {text!r}: not a catalog name ({', '.join(CATALOG)}), JSON spec or file")


def _load_metric(path: str) -> ExtendedMetric:
    data = _load_json(path, "metric")
    try:
        return ExtendedMetric.from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"metric file {path}: {exc}") from None


def _load_measure(path: str, space: ExtendedMetric) -> DiscreteMeasure:
    data = _load_json(path, "measure")
    try:
        return DiscreteMeasure.from_json(data, space)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"measure file {path}: {exc}") from None


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"--grid: {exc}") from None
    if len(grid) < 2:
        raise InputError("--grid needs at least two times")
    return grid


def _plan_json(plan, space: ExtendedMetric) -> dict | None:
    if plan is None:
        return None
    labels = space.labels
    name = (lambda i: labels[i]) if labels is not None else int
    return {
        "rows": [name(i) for i in plan.rows],
        "cols": [name(j) for j in plan.cols],
        "matrix": plan.matrix.tolist(),
    }


def cmd_distance(args) -> tuple[dict, list[list], int]:
    psi = parse_psi(args.psi)
    space = _load_metric(args.metric)
    mu = _load_measure(args.mu, space)
    nu = _load_measure(args.nu, space)
    res = transport.wasserstein_orlicz(mu, nu, space, psi, args.tol)
    out = {"W": res.distance, "plan": _plan_json(res.plan, space), "psi": spec_to_json(psi)}
    if res.plan is None:
        out["certificate"] = None
        out["jensen"] = None
        return out, [["W"], [res.distance]], EXIT_OBSTRUCTION
    cert = transport.optimality_certificate(res.plan, mu, nu, space, psi, res.distance, args.tol)
    jen = transport.jensen_bound_check(res.plan, space, psi, res.distance, args.tol)
    out["certificate"] = cert._asdict()
    out["jensen"] = jen._asdict()
    table = [["W", "modular_at_W", "certificate_ok", "mean_cost", "jensen_bound", "jensen_ok"],
             [res.distance, cert.modular_at_W, cert.ok, jen.mean_cost, jen.bound, jen.ok]]
    return out, table, EXIT_OK


def _load_curve(args) -> MeasureCurve:
    data = _load_json(args.curve, "curve")
    space = _load_metric(args.metric) if args.metric else None
    try:
        return MeasureCurve.from_json(data, space)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"curve file {args.curve}: {exc}") from None


def cmd_curve(args) -> tuple[dict, list[list], int]:
    psi = parse_psi(args.psi)
    curve = _load_curve(args)
    steps = curves.step_distances(curve, psi, args.tol)
    for k, s in enumerate(steps):
        if math.isinf(s.distance):
            raise ObstructionError(f"step {k} ({curve.times[k]:g} -> {curve.times[k + 1]:g}) has infinite W_psi", step=k)
    dt = np.diff(curve.times)
    speeds = np.array([s.distance for s in steps]) / dt if steps else np.zeros(0)
    energy = curves._energy(dt, speeds, psi, args.tol) if steps else 0.0
    length = math.fsum(s.distance for s in steps)
    out = {"times": curve.times, "distances": [s.distance for s in steps], "speeds": speeds, "energy": energy, "L": length}
    table = [["k", "t_start", "t_end", "W", "speed"]]
    table += [[k, curve.times[k], curve.times[k + 1], s.distance, speeds[k]] for k, s in enumerate(steps)]
    if args.superpose or args.audit:
        eta = curves._superpose_from(curve, steps)
        if args.superpose:
            out["eta"] = eta.to_json()
        if args.audit:
            marg = curves.marginal_audit(eta, curve)
            energy_rows = curves.energy_audit(eta, curve, psi, solver_tol=args.tol)
            jensen_ok, jensen_vals = curves.step_jensen_check(eta, curve, psi, solver_tol=args.tol)
            out["audits"] = {
                "marginal": {"ok": marg.ok, "max_deviation": marg.max_deviation},
                "energy": [e._asdict() for e in energy_rows],
                "step_jensen": {"ok": jensen_ok, "values": jensen_vals},
            }
    if args.reparam:
        rep = curves.arc_length_reparametrize(curve, psi, args.tol)
        out["reparam"] = {
            "degenerate": rep.degenerate,
            "L": rep.length,
            "s_map": rep.s_map,
            "curve": rep.curve.to_json(include_space=False),
            "speeds": curves.discrete_speed(rep.curve, psi, args.tol),
        }
    return out, table, EXIT_OK


def cmd_geodesic(args) -> tuple[dict, list[list], int]:
    psi = parse_psi(args.psi)
    space = _load_metric(args.metric)
    if space.coords is None:
        raise InputError(f"metric file {args.metric}: geodesic synthesis needs a point cloud ('points'); "
                         "a raw distance matrix has no geodesic oracle")
    mu = _load_measure(args.mu, space)
    nu = _load_measure(args.nu, space)
    curve, eta = geodesics.synthesize(mu, nu, space, psi, _parse_grid(args.grid), args.tol)
    out = {"curve": curve.to_json(), "eta": eta.to_json()}
    table = [["k", "t"], *[[k, t] for k, t in enumerate(curve.times)]]
    if args.check:
        speed = geodesics.constant_speed_check(curve, psi, solver_tol=args.tol)
        plans = geodesics.intermediate_plan_optimality(eta, curve, psi, solver_tol=args.tol)
        t = curve.times
        out["W"] = speed.total
        out["constant_speed"] = {
            "ok": speed.ok,
            "worst_pair": speed.worst_pair,
            "worst_error": speed.worst_error,
            "pairs": [{"s": t[j], "t": t[k], "W": w, "expected": e} for j, k, w, e in speed.pairs],
        }
        out["plan_optimality"] = {
            "ok": plans.ok,
            "pairs": [{"s": t[j], "t": t[k], "modular": m, "ok": ok} for j, k, m, ok in plans.pairs],
        }
        table = [["s", "t", "W", "expected", "modular", "plan_ok"]]
        table += [[t[j], t[k], w, e, m, ok] for (j, k, w, e), (_, _, m, ok) in zip(speed.pairs, plans.pairs)]
    if args.concentration:
        rep = geodesics.concentration_check(eta, curve.space, psi, solver_tol=args.tol)
        out["concentration"] = rep._asdict()
    return out, table, EXIT_OK


def _emit(payload, table, fmt: str, out_path: str | None):
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in table:
            writer.writerow([to_jsonable(x) for x in row])
        text = buf.getvalue()
    else:
        text = json.dumps(to_jsonable(payload), indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--psi", required=True, help="catalog name, kind:params, JSON spec or JSON file")
    common.add_argument("--tol", type=float, default=transport.DEFAULT_TOL, help="relative tolerance (default 1e-9)")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="orlicz-ot", description="psi-Wasserstein-Orlicz distances, curves and geodesics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", parents=[common], help="W_psi between two measures, with plan and certificates")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--metric", required=True)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("curve", parents=[common], help="speeds, energy and length of a measure curve")
    p.add_argument("curve")
    p.add_argument("--metric", help="metric file (needed when the curve file has no 'metric')")
    p.add_argument("--superpose", action="store_true", help="emit the superposed path measure")
    p.add_argument("--reparam", action="store_true", help="arc-length reparametrization")
    p.add_argument("--audit", action="store_true", help="marginal, energy and step-Jensen audits")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("geodesic", parents=[common], help="constant-speed geodesic between two measures")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--metric", required=True, help="point-cloud metric file")
    p.add_argument("--grid", default="0,0.5,1", help="comma-separated times from 0 to 1")
    p.add_argument("--check", action="store_true", help="constant-speed and intermediate-plan checks")
    p.add_argument("--concentration", action="store_true", help="strict-convexity concentration check")
    p.set_defaults(func=cmd_geodesic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        thread_cap()
        if not args.tol > 0:
            raise InputError("--tol must be positive")
        payload, table, code = args.func(args)
    except ObstructionError as exc:
        out = {"W": math.inf, "error": str(exc)}
        if exc.step is not None:
            out["step"] = exc.step
        _emit(out, [["W", "step"], [math.inf, exc.step]], args.format, args.out)
        print(f"obstruction: {exc}", file=sys.stderr)
        return EXIT_OBSTRUCTION
    except (InputError, PreconditionError, MetricError, ValueError) as exc:
        # PreconditionError and MetricError are ValueErrors; listed for clarity
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    _emit(payload, table, args.format, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
