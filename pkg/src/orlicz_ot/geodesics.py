"""Constant-speed geodesics in (P(X), W_psi) built from optimal plans and point geodesics."""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple

import numpy as np

from .errors import ObstructionError, PreconditionError
from .extended import INF, weighted_sum
from .measures import DiscreteMeasure, MeasureCurve, PathMeasure
from .metric import ExtendedMetric, _euclidean
from .parallel import pmap
from .transport import DEFAULT_TOL, _scaled_costs, wasserstein_orlicz
from .young import YoungFunction

__all__ = [
    "SpeedReport",
    "PlanOptimalityReport",
    "ConcentrationReport",
    "synthesize",
    "constant_speed_check",
    "intermediate_plan_optimality",
    "concentration_check",
]

# interpolated points closer than this (relative to the cloud's scale) are merged
MERGE_RTOL = 1e-12


class SpeedReport(NamedTuple):
    ok: bool
    total: float  # W_psi(mu_0, mu_K)
    worst_pair: tuple[int, int] | None
    worst_error: float
    pairs: list  # (j, k, W(mu_j, mu_k), |t_k - t_j| * total)


class PlanOptimalityReport(NamedTuple):
    ok: bool
    pairs: list  # (j, k, modular at |t_k - t_j| * W, ok)


class ConcentrationReport(NamedTuple):
    ok: bool
    hypothesis_met: bool
    endpoint_modular: float
    violations: list  # indices of support paths that are not grid-constant-speed


def _components(d: np.ndarray) -> np.ndarray:
    # finite distance is an equivalence relation in an extended metric
    n = d.shape[0]
    comp = np.full(n, -1)
    label = 0
    for i in range(n):
        if comp[i] < 0:
            comp[np.isfinite(d[i]) & (comp < 0)] = label
            label += 1
    return comp


def _extend_cloud(space: ExtendedMetric, new_points: list[np.ndarray], new_comp: list[int]):
    """Append points to a (possibly blocked) Euclidean cloud.

    Distances are Euclidean inside a finite-distance component and +inf across.
    Returns the new space and, for every requested point, its index there.
    """
    coords = space.coords
    comp = _components(space.dist)
    scale = float(np.max(np.abs(coords))) if coords.size else 1.0
    merge = MERGE_RTOL * max(1.0, scale)
    all_coords = [c for c in coords]
    all_comp = list(comp)
    index = []
    for p, c in zip(new_points, new_comp):
        found = None
        for i, (q, cq) in enumerate(zip(all_coords, all_comp)):
            if cq == c and np.max(np.abs(q - p)) <= merge:
                found = i
                break
        if found is None:
            all_coords.append(p)
            all_comp.append(c)
            found = len(all_coords) - 1
        index.append(found)
    if len(all_coords) == space.n:
        return space, index
    X = np.vstack(all_coords)
    cmp = np.asarray(all_comp)
    dist = _euclidean(X)
    dist[cmp[:, None] != cmp[None, :]] = INF
    dist[: space.n, : space.n] = space.dist
    labels = None
    if space.labels is not None:
        labels = tuple(space.labels) + tuple(f"p{i}" for i in range(space.n, X.shape[0]))
    return ExtendedMetric(dist, labels=labels, coords=X), index


def _require_oracle(space: ExtendedMetric):
    if space.coords is None:
        raise PreconditionError("geodesic synthesis needs a point-cloud metric (coordinates for the geodesic oracle)")
    comp = _components(space.dist)
    same = comp[:, None] == comp[None, :]
    if not np.allclose(space.dist[same], _euclidean(space.coords)[same], rtol=1e-12, atol=1e-12):
        raise PreconditionError("finite distances must be Euclidean for the straight-line oracle to be a geodesic")


def synthesize(
    mu0: DiscreteMeasure,
    mu1: DiscreteMeasure,
    space: ExtendedMetric,
    psi: YoungFunction,
    grid,
    tol: float = DEFAULT_TOL,
) -> tuple[MeasureCurve, PathMeasure]:
    """Push an optimal plan along straight-line point geodesics sampled on ``grid``.

    Interpolated points are appended to the space (coincident points merged),
    so the returned curve lives on an enlarged point cloud whose first
    ``space.n`` points are the originals.
    """
    _require_oracle(space)
    t = np.asarray(grid, dtype=float).ravel()
    if t.size < 2 or t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
        raise ValueError("grid must increase strictly from 0 to 1")
    res = wasserstein_orlicz(mu0, mu1, space, psi, tol)
    if math.isinf(res.distance):
        raise ObstructionError("W_psi(mu0, mu1) = +inf: no geodesic joins the endpoints", step=0)
    oracle = space.oracle
    comp = _components(space.dist)
    arcs = res.plan.arcs()
    pts, cmps = [], []
    for x, y, _ in arcs:
        if not oracle.defined(x, y):
            raise ObstructionError(f"no point geodesic on the charged arc ({x}, {y})", step=0)
        for s in t[1:-1]:
            pts.append(oracle.interp(x, y, float(s)))
            cmps.append(int(comp[x]))
    new_space, idx = _extend_cloud(space, pts, cmps)
    inner = t.size - 2
    paths = np.empty((len(arcs), t.size), dtype=np.int64)
    for a, (x, y, _) in enumerate(arcs):
        paths[a, 0] = x
        paths[a, -1] = y
        paths[a, 1:-1] = idx[a * inner : (a + 1) * inner]
    weights = np.array([w for _, _, w in arcs])
    eta = PathMeasure(paths, weights, t)
    measures = [mu0] + [eta.node_marginal(k) for k in range(1, t.size - 1)] + [mu1]
    return MeasureCurve(t, tuple(measures), new_space), eta


def _pair_job(args):
    mu, nu, space, psi, tol = args
    return wasserstein_orlicz(mu, nu, space, psi, tol).distance


def constant_speed_check(curve: MeasureCurve, psi: YoungFunction, tol: float = 1e-6, solver_tol: float = DEFAULT_TOL) -> SpeedReport:
    """W_psi(mu_s, mu_t) = |t - s| W_psi(mu_0, mu_1) on every grid pair, relative to the total."""
    t = curve.times
    span = t[-1] - t[0]
    if curve.steps == 0:
        return SpeedReport(True, 0.0, None, 0.0, [])
    ms = curve.measures
    pairs = list(itertools.combinations(range(t.size), 2))
    dists = pmap(_pair_job, [(ms[j], ms[k], curve.space, psi, solver_tol) for j, k in pairs])
    total = dists[pairs.index((0, t.size - 1))]
    rows, worst, worst_pair = [], 0.0, None
    for (j, k), w in zip(pairs, dists):
        expect = (t[k] - t[j]) / span * total
        if math.isinf(total) or math.isinf(w):
            err = 0.0 if w == expect else INF
        else:
            err = abs(w - expect) / max(1.0, total)
        rows.append((j, k, w, expect))
        if err > worst or worst_pair is None:
            worst, worst_pair = err, (j, k)
    return SpeedReport(worst <= tol, total, worst_pair, worst, rows)


def intermediate_plan_optimality(
    eta: PathMeasure, curve: MeasureCurve, psi: YoungFunction, tol: float = 1e-6, solver_tol: float = DEFAULT_TOL
) -> PlanOptimalityReport:
    """Check every pair pushforward of eta against the optimality certificate at |t - s| W."""
    t = curve.times
    if eta.grid.size != t.size or not np.allclose(eta.grid, t, rtol=1e-12, atol=0.0):
        raise ValueError("path measure grid does not match the curve's times")
    for k, mu in enumerate(curve.measures):
        if not eta.node_marginal(k).isclose(mu, atol=1e-10):
            raise ValueError(f"path measure marginal at node {k} does not match the curve")
    span = t[-1] - t[0]
    total = wasserstein_orlicz(curve.measures[0], curve.measures[-1], curve.space, psi, solver_tol).distance
    rows = []
    for j, k in itertools.combinations(range(t.size), 2):
        g = eta.pair_coupling(j, k)
        d = g.distances(curve.space)
        W = (t[k] - t[j]) / span * total
        if W == 0.0:
            value = 0.0 if np.all(d[g.matrix > 0] == 0.0) else INF
        elif math.isinf(W):
            value = math.nan
        else:
            value = weighted_sum(g.matrix, _scaled_costs(d, psi, W))
        rows.append((j, k, value, bool(value <= 1.0 + tol)))
    return PlanOptimalityReport(all(r[3] for r in rows), rows)


def concentration_check(
    eta: PathMeasure, space: ExtendedMetric, psi: YoungFunction, tol: float = 1e-8, solver_tol: float = DEFAULT_TOL
) -> ConcentrationReport:
    """Are eta's support paths grid-sampled constant-speed geodesics?

    Meaningful only under the hypothesis that eta's endpoint plan saturates
    the modular (value 1 at W = W_psi(mu_0, mu_K)); when it does not,
    ``hypothesis_met`` is False, violations are still listed, and ``ok``
    stays True because nothing is asserted.
    """
    if not psi.strictly_convex:
        raise PreconditionError(f"{psi!r} is not strictly convex")
    t = eta.grid
    span = t[-1] - t[0]
    charged = eta.weights > 0
    d = space.dist
    ends = d[eta.paths[:, 0], eta.paths[:, -1]]
    W = wasserstein_orlicz(eta.node_marginal(0), eta.node_marginal(eta.steps), space, psi, solver_tol).distance
    if W == 0.0:
        modular = 0.0
    elif math.isinf(W):
        modular = INF
    else:
        modular = weighted_sum(eta.weights, psi(np.where(np.isinf(ends), 0.0, ends) / W))
    met = W > 0 and math.isfinite(W) and abs(modular - 1.0) <= tol
    bad = []
    for a in np.nonzero(charged)[0]:
        p = eta.paths[a]
        L = d[p[0], p[-1]]
        scale = max(1.0, L)
        for j, k in itertools.combinations(range(t.size), 2):
            if abs(d[p[j], p[k]] - (t[k] - t[j]) / span * L) > tol * scale:
                bad.append(int(a))
                break
    if not met:
        return ConcentrationReport(True, False, modular, bad)
    return ConcentrationReport(not bad, True, modular, bad)
