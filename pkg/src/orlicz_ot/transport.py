"""The psi-Wasserstein-Orlicz distance between finitely supported measures.

For a fixed scale ``lam`` the inner problem

    F(lam) = min over couplings g of  sum g_ij psi(d_ij / lam)

is a linear transportation problem (arcs where the cost is +inf are
forbidden).  ``F`` is non-increasing and the distance is
``W = inf{lam : F(lam) <= 1}``.

The outer search keeps a feasible scale ``hi`` together with a plan whose
own Luxemburg norm equals ``hi``.  Re-solving the inner problem at ``hi``
and replacing ``hi`` by the new plan's norm can only decrease it; when that
stalls, one probe at ``hi / (1 + tol)`` either certifies ``F > 1`` there
(done) or returns a plan with a strictly smaller norm.  Plans are vertices
of the transport polytope, so the search is finite.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError
from .extended import weighted_sum
from .measures import MARGINAL_TOL, Coupling, DiscreteMeasure, PathMeasure
from .metric import ExtendedMetric
from .orlicz import norm_of
from .simplex import solve_transport
from .young import YoungFunction

__all__ = [
    "WassersteinResult",
    "AdmissibilityReport",
    "CertificateReport",
    "JensenReport",
    "admissible_check",
    "min_modular_plan",
    "plan_norm",
    "wasserstein_orlicz",
    "optimality_certificate",
    "jensen_bound_check",
    "glue",
]

DEFAULT_TOL = 1e-9
# precision of a single plan's Luxemburg norm; well below any outer tolerance
_NORM_TOL = 1e-15
_MAX_OUTER = 10_000


class WassersteinResult(NamedTuple):
    distance: float
    plan: Coupling | None


class AdmissibilityReport(NamedTuple):
    ok: bool
    max_deviation: float


class CertificateReport(NamedTuple):
    modular_at_W: float
    ok: bool


class JensenReport(NamedTuple):
    mean_cost: float
    bound: float
    ok: bool


@lru_cache(maxsize=256)
def _checked(psi: YoungFunction) -> YoungFunction:
    report = psi.validate()
    if not report.hp_psi_ok:
        raise PreconditionError(f"{psi!r} is not a Young function: {', '.join(report.notes)}")
    return psi


def _submatrix(space: ExtendedMetric, mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    if mu.support.size and mu.support.max() >= space.n or nu.support.size and nu.support.max() >= space.n:
        raise ValueError("measure charges a point outside the metric space")
    return space.dist[np.ix_(mu.support, nu.support)]


def admissible_check(g: Coupling, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = MARGINAL_TOL) -> AdmissibilityReport:
    """Is ``g`` in Γ(mu, nu)?  Reports the worst marginal deviation."""
    if g.shape != (mu.support.size, nu.support.size):
        raise ValueError(f"plan shape {g.shape} does not match marginals ({mu.support.size}, {nu.support.size})")
    if not (np.array_equal(g.rows, mu.support) and np.array_equal(g.cols, nu.support)):
        raise ValueError("plan supports do not match the marginals' supports")
    dev_rows = np.abs(g.matrix.sum(axis=1) - mu.weights)
    dev_cols = np.abs(g.matrix.sum(axis=0) - nu.weights)
    dev = float(max(dev_rows.max(initial=0.0), dev_cols.max(initial=0.0)))
    return AdmissibilityReport(dev <= tol, dev)


def _scaled_costs(d: np.ndarray, psi: YoungFunction, lam: float) -> np.ndarray:
    ratio = d / lam
    blocked = np.isinf(ratio)
    cost = psi(np.where(blocked, 0.0, ratio))
    cost[blocked] = math.inf
    return cost


def min_modular_plan(
    mu: DiscreteMeasure, nu: DiscreteMeasure, space: ExtendedMetric, psi: YoungFunction, lam: float
) -> tuple[Coupling | None, float]:
    """Minimise sum g_ij psi(d_ij / lam) over couplings; ``(None, inf)`` if every coupling charges a +inf arc."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d = _submatrix(space, mu, nu)
    sol = solve_transport(mu.weights, nu.weights, _scaled_costs(d, psi, lam))
    if sol.flow is None:
        return None, math.inf
    return Coupling(sol.flow, mu.support, nu.support), sol.value


def plan_norm(plan: Coupling, space: ExtendedMetric, psi: YoungFunction, tol: float = _NORM_TOL) -> float:
    """Luxemburg norm of the distance function under the plan."""
    return norm_of(plan.distances(space).ravel(), plan.matrix.ravel(), psi, tol)


def wasserstein_orlicz(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    space: ExtendedMetric,
    psi: YoungFunction,
    tol: float = DEFAULT_TOL,
) -> WassersteinResult:
    """W_psi(mu, nu) to relative tolerance ``tol``, with an optimal plan.

    The reported distance is the feasible end of the final bracket, so the
    returned plan has modular <= 1 at exactly that value.  ``distance`` is
    +inf (and ``plan`` None) when every coupling charges a +inf arc.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    _checked(psi)
    if mu == nu:
        return WassersteinResult(0.0, Coupling.identity(mu))
    d = _submatrix(space, mu, nu)

    # W_1 plan: mean-cost optimum over arcs of finite length
    base = solve_transport(mu.weights, nu.weights, d)
    if base.flow is None:
        return WassersteinResult(math.inf, None)
    plan = Coupling(base.flow, mu.support, nu.support)
    if base.value == 0.0:
        # all mass on zero-length arcs, so the measures coincide
        return WassersteinResult(0.0, plan)

    # Jensen: any optimal plan has mean cost <= psi^-1(1) W
    lo = base.value / psi.inverse(1.0)
    hi = plan_norm(plan, space, psi)

    for _ in range(_MAX_OUTER):
        if hi <= lo * (1.0 + tol):
            break
        cand, _ = min_modular_plan(mu, nu, space, psi, hi)
        cand_norm = plan_norm(cand, space, psi)
        if cand_norm < hi * (1.0 - 0.25 * tol):
            plan, hi = cand, cand_norm
            continue
        if cand_norm < hi:
            plan, hi = cand, cand_norm
        probe = hi / (1.0 + tol)
        below, value = min_modular_plan(mu, nu, space, psi, probe)
        if value > 1.0:
            lo = probe
            break
        below_norm = plan_norm(below, space, psi)
        if not below_norm < hi:
            raise RuntimeError("outer search failed to make progress")
        plan, hi = below, below_norm
    else:
        raise RuntimeError("outer search did not converge")
    return WassersteinResult(hi, plan)


def optimality_certificate(
    plan: Coupling,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    space: ExtendedMetric,
    psi: YoungFunction,
    W: float,
    tol: float = DEFAULT_TOL,
) -> CertificateReport:
    """A plan is optimal iff its modular at scale W is <= 1."""
    adm = admissible_check(plan, mu, nu)
    if not adm.ok:
        raise ValueError(f"plan is not admissible (marginal deviation {adm.max_deviation:.3g})")
    d = plan.distances(space)
    if not W > 0:
        if mu != nu and W <= 0:
            raise ValueError("W must be positive for distinct measures")
        charged = plan.matrix > 0
        zero = bool(np.all(d[charged] == 0.0))
        return CertificateReport(0.0 if zero else math.inf, zero)
    if math.isinf(W):
        raise ValueError("no certificate at W = +inf")
    value = weighted_sum(plan.matrix, _scaled_costs(d, psi, W))
    return CertificateReport(value, value <= 1.0 + tol)


def jensen_bound_check(
    plan: Coupling, space: ExtendedMetric, psi: YoungFunction, W: float, tol: float = DEFAULT_TOL
) -> JensenReport:
    """mean transport cost <= psi^-1(1) * W for an optimal plan."""
    mean = plan.mean_cost(space)
    bound = psi.inverse(1.0) * W
    return JensenReport(mean, bound, mean <= bound + tol * max(1.0, bound))


def glue(
    plans: Sequence[Coupling], marginals: Sequence[DiscreteMeasure], grid: Sequence[float] | None = None
) -> PathMeasure:
    """Markov gluing of consecutive plans into a measure on discrete paths.

    Path weight of (x_0, ..., x_K) is g0(x_0, x_1) * prod_{k>=1} gk(x_k, x_{k+1}) / mu_k(x_k),
    with 0/0 = 0.
    """
    K = len(plans)
    if len(marginals) != K + 1:
        raise ValueError(f"{K} plans need {K + 1} marginals, got {len(marginals)}")
    times = np.arange(K + 1, dtype=float) if grid is None else np.asarray(grid, dtype=float)
    if times.size != K + 1:
        raise ValueError("grid length must match the number of marginals")
    for k, g in enumerate(plans):
        try:
            rep = admissible_check(g, marginals[k], marginals[k + 1])
        except ValueError as exc:
            raise ValueError(f"plan {k} does not couple marginals {k} and {k + 1}: {exc}") from None
        if not rep.ok:
            raise ValueError(f"plan {k} does not couple marginals {k} and {k + 1} (deviation {rep.max_deviation:.3g})")

    if K == 0:
        mu = marginals[0]
        return PathMeasure(mu.support[:, None], mu.weights, times)

    first = plans[0]
    paths: dict[tuple[int, ...], float] = {}
    for x, y, w in first.arcs():
        paths[(x, y)] = w
    for k in range(1, K):
        g = plans[k]
        rows = {int(r): a for a, r in enumerate(g.rows)}
        mk = marginals[k]
        nxt: dict[tuple[int, ...], float] = {}
        for path, w in paths.items():
            x = path[-1]
            mass = mk.mass(x)
            if w == 0.0 or mass == 0.0:
                continue
            row = g.matrix[rows[x]]
            for b in np.nonzero(row > 0)[0]:
                nxt[path + (int(g.cols[b]),)] = w * float(row[b]) / mass
        paths = nxt
    ordered = sorted(paths)
    return PathMeasure(
        np.asarray(ordered, dtype=np.int64).reshape(len(ordered), K + 1),
        np.asarray([paths[p] for p in ordered]),
        times,
    )
