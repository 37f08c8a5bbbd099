"""Discrete-time measure curves: speeds, Orlicz energy, arc length, superposition."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ObstructionError
from .extended import weighted_sum
from .measures import Coupling, DiscreteMeasure, MeasureCurve, PathMeasure
from .orlicz import norm_of
from .parallel import pmap
from .transport import DEFAULT_TOL, glue, plan_norm, wasserstein_orlicz
from .young import YoungFunction

__all__ = [
    "StepResult",
    "Reparametrization",
    "MarginalReport",
    "EnergyStep",
    "step_distances",
    "discrete_speed",
    "ac_energy",
    "arc_length_reparametrize",
    "superpose",
    "marginal_audit",
    "energy_audit",
    "step_jensen_check",
    "constant_curve",
]

MARGINAL_AUDIT_TOL = 1e-12


class StepResult(NamedTuple):
    distance: float
    plan: Coupling | None


class Reparametrization(NamedTuple):
    curve: MeasureCurve
    s_map: np.ndarray  # s(t_k) for every input grid time
    length: float
    degenerate: bool  # True when the curve never moves (L = 0)


class MarginalReport(NamedTuple):
    ok: bool
    max_deviation: float
    deviations: list


class EnergyStep(NamedTuple):
    step: int
    path_norm: float
    speed: float
    equal: bool
    at_least: bool


def _solve_pair(args):
    mu, nu, space, psi, tol = args
    return wasserstein_orlicz(mu, nu, space, psi, tol)


def step_distances(curve: MeasureCurve, psi: YoungFunction, tol: float = DEFAULT_TOL) -> list[StepResult]:
    """W_psi between consecutive measures, each with an optimal plan."""
    jobs = [(curve.measures[k], curve.measures[k + 1], curve.space, psi, tol) for k in range(curve.steps)]
    return [StepResult(r.distance, r.plan) for r in pmap(_solve_pair, jobs)]


def _speeds(curve: MeasureCurve, steps: list[StepResult]) -> np.ndarray:
    dt = np.diff(curve.times)
    return np.array([s.distance for s in steps], dtype=float) / dt


def discrete_speed(curve: MeasureCurve, psi: YoungFunction, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Forward difference quotients W_k / (t_{k+1} - t_k)."""
    return _speeds(curve, step_distances(curve, psi, tol))


def _energy(dt: np.ndarray, speeds: np.ndarray, psi: YoungFunction, tol: float) -> float:
    return norm_of(speeds, dt, psi, tol)


def ac_energy(curve: MeasureCurve, psi: YoungFunction, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm of the piecewise-constant speed over [t_0, t_K] with Lebesgue measure."""
    if curve.steps == 0:
        return 0.0
    return _energy(np.diff(curve.times), discrete_speed(curve, psi, tol), psi, tol)


def arc_length_reparametrize(
    curve: MeasureCurve, psi: YoungFunction, tol: float = DEFAULT_TOL
) -> Reparametrization:
    """Re-time the curve by s(t_k) = sum_{j<k} W_j.

    Steps of zero length collapse onto their first time (the ``min`` choice
    of the inverse of s), so the new grid is strictly increasing.
    """
    steps = step_distances(curve, psi, tol)
    lengths = [s.distance for s in steps]
    if any(math.isinf(w) for w in lengths):
        k = next(i for i, w in enumerate(lengths) if math.isinf(w))
        raise ObstructionError(f"step {k} has infinite W_psi; the curve has infinite length", step=k)
    s_map = np.concatenate([[0.0], np.cumsum(lengths)])
    length = float(s_map[-1])
    if not length > 0:
        flat = MeasureCurve(np.array([0.0]), (curve.measures[0],), curve.space)
        return Reparametrization(flat, s_map, 0.0, True)
    keep = [0] + [k + 1 for k, w in enumerate(lengths) if w > 0]
    times = s_map[keep]
    # zero-length steps may still move s by rounding; enforce strict growth
    strict = np.concatenate([[True], np.diff(times) > 0])
    keep = [k for k, ok in zip(keep, strict) if ok]
    new = MeasureCurve(s_map[keep], tuple(curve.measures[k] for k in keep), curve.space)
    return Reparametrization(new, s_map, length, False)


def _superpose_from(curve: MeasureCurve, steps: list[StepResult]) -> PathMeasure:
    for k, s in enumerate(steps):
        if s.plan is None or math.isinf(s.distance):
            raise ObstructionError(f"step {k} ({curve.times[k]:g} -> {curve.times[k + 1]:g}) has infinite W_psi", step=k)
    return glue([s.plan for s in steps], list(curve.measures), curve.times)


def superpose(curve: MeasureCurve, psi: YoungFunction, tol: float = DEFAULT_TOL) -> PathMeasure:
    """Glue optimal step plans into a measure on grid paths whose node marginals are the curve."""
    return _superpose_from(curve, step_distances(curve, psi, tol))


def _check_grid(eta: PathMeasure, curve: MeasureCurve):
    if eta.grid.size != curve.times.size or not np.allclose(eta.grid, curve.times, rtol=1e-12, atol=0.0):
        raise ValueError("path measure grid does not match the curve's times")


def marginal_audit(eta: PathMeasure, curve: MeasureCurve, tol: float = MARGINAL_AUDIT_TOL) -> MarginalReport:
    """Compare the pushforward of eta at every grid node with the curve."""
    _check_grid(eta, curve)
    devs = []
    for k, mu in enumerate(curve.measures):
        masses = eta.node_masses(k)
        ref = dict(zip(mu.support.tolist(), mu.weights.tolist()))
        keys = masses.keys() | ref.keys()
        devs.append(max((abs(masses.get(x, 0.0) - ref.get(x, 0.0)) for x in keys), default=0.0))
    worst = max(devs)
    return MarginalReport(worst <= tol, worst, devs)


def energy_audit(
    eta: PathMeasure,
    curve: MeasureCurve,
    psi: YoungFunction,
    tol: float = 1e-6,
    solver_tol: float = DEFAULT_TOL,
) -> list[EnergyStep]:
    """Per step, the eta-norm of the path speeds against the curve's discrete speed.

    ``equal`` is the identity expected for superposed eta; ``at_least`` is the
    inequality any admissible eta must satisfy.
    """
    _check_grid(eta, curve)
    adm = marginal_audit(eta, curve, tol=1e-10)
    if not adm.ok:
        raise ValueError(f"path measure does not represent the curve (deviation {adm.max_deviation:.3g})")
    speeds = discrete_speed(curve, psi, solver_tol)
    dt = np.diff(curve.times)
    out = []
    for k in range(curve.steps):
        g = eta.pair_coupling(k, k + 1)
        pn = plan_norm(g, curve.space, psi) / dt[k]
        s = float(speeds[k])
        if math.isinf(s) or math.isinf(pn):
            equal = pn == s
        else:
            equal = abs(pn - s) <= tol * max(1.0, s)
        at_least = pn >= s - tol * max(1.0, s) if math.isfinite(s) else math.isinf(pn)
        out.append(EnergyStep(k, pn, s, bool(equal), bool(at_least)))
    return out


def step_jensen_check(
    eta: PathMeasure, curve: MeasureCurve, psi: YoungFunction, tol: float = 1e-8, solver_tol: float = DEFAULT_TOL
) -> tuple[bool, list[float]]:
    """Per step, sum over paths of weight * psi(increment_k / W_k); each should be <= 1 + tol.

    Steps with W_k = 0 give 0 when every path stays put there, +inf otherwise.
    """
    _check_grid(eta, curve)
    d = curve.space.dist
    charged = eta.weights > 0
    vals = []
    for k, s in enumerate(step_distances(curve, psi, solver_tol)):
        inc = d[eta.paths[:, k], eta.paths[:, k + 1]]
        if s.distance == 0.0:
            vals.append(0.0 if np.all(inc[charged] == 0.0) else math.inf)
        else:
            vals.append(weighted_sum(eta.weights, psi(inc / s.distance)))
    return all(v <= 1.0 + tol for v in vals), vals


def constant_curve(mu: DiscreteMeasure, times, space) -> MeasureCurve:
    """The curve that sits at ``mu`` for every time."""
    t = np.asarray(times, dtype=float)
    return MeasureCurve(t, (mu,) * t.size, space)
