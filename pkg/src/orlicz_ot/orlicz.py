"""Luxemburg norms of finitely supported functions, plus Hölder/duality checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .extended import INF, weighted_sum
from .young import YoungFunction

__all__ = [
    "WeightedSamples",
    "modular",
    "luxemburg_norm",
    "holder_check",
    "dual_bracket",
    "dual_trials",
    "HolderReport",
]

DEFAULT_TOL = 1e-9
_RTOL = 4 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class WeightedSamples:
    """A function on a finite measure space: ``values[i]`` carries mass ``weights[i]``."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if v.shape != w.shape:
            raise ValueError(f"{v.size} values but {w.size} weights")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not w.sum() > 0:
            raise ValueError("total weight must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedSamples):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.weights, other.weights)

    def scaled(self, c: float) -> WeightedSamples:
        return WeightedSamples(c * self.values, self.weights)

    def to_json(self) -> dict:
        return {"values": self.values.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> WeightedSamples:
        return cls(np.asarray(data["values"], dtype=float), np.asarray(data["weights"], dtype=float))


def modular(u: WeightedSamples, psi: YoungFunction, lam: float) -> float:
    """sum_i w_i psi(|u_i| / lam), with 0 * inf = 0."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return _modular(np.abs(u.values), u.weights, psi, lam)


def _modular(absvals, weights, psi, lam):
    return weighted_sum(weights, psi(absvals / lam))


def _fast_modular(v, w, psi, lam):
    # v > 0 and w > 0 already filtered; skips argument validation
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals = psi._eval(v / lam)
    if np.isinf(vals).any():
        return INF
    return float(np.dot(vals, w))


def luxemburg_norm(u: WeightedSamples, psi: YoungFunction, tol: float = DEFAULT_TOL) -> float:
    """inf{lam > 0 : modular(u, psi, lam) <= 1}, reported from the feasible side."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return norm_of(np.abs(u.values), u.weights, psi, tol)


def norm_of(absvals, weights, psi: YoungFunction, tol: float = DEFAULT_TOL) -> float:
    """Array-level Luxemburg norm; ``absvals`` must be nonnegative."""
    absvals = np.asarray(absvals, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = (weights > 0) & (absvals > 0)
    if not keep.any():
        return 0.0
    v, w = absvals[keep], weights[keep]
    if np.isinf(v).any():
        return INF
    top = float(v.max())

    def feasible(lam):
        return _fast_modular(v, w, psi, lam) <= 1.0

    total = float(w.sum())
    hi = top / psi.inverse(1.0 / total)
    lo = top / psi.inverse(1.0 / float(w[np.argmax(v)]))
    if not (hi > 0 and math.isfinite(hi)):
        hi = top
    if not (0 < lo < hi):
        lo = 0.5 * hi
    for _ in range(4000):
        if feasible(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise AssertionError("modular never drops below 1 for a finite function")
    for _ in range(4000):
        if not feasible(lo):
            break
        hi, lo = lo, 0.5 * lo
    else:
        raise AssertionError("Luxemburg norm bracket collapsed to 0 for a nonzero function")

    at_lo = _fast_modular(v, w, psi, lo)
    if math.isfinite(at_lo):
        # continuous and strictly decreasing on [lo, hi]: the root is unique
        root = brentq(lambda lam: _fast_modular(v, w, psi, lam) - 1.0, lo, hi, xtol=tol * lo * 1e-3, rtol=_RTOL)
        step = tol * lo * 1e-3 + _RTOL * root
        for _ in range(200):
            if root >= hi:
                return float(hi)
            if feasible(root):
                return float(root)
            root += step
            step *= 2.0
        return float(hi)

    # a jump to +inf sits inside the bracket: bisect the feasibility predicate
    for _ in range(400):
        if hi - lo <= tol * lo:
            break
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if feasible(mid):
            hi = mid
        else:
            lo = mid

    # the infimum is then usually one of |u_i| / r1; snap to it
    if math.isfinite(psi.r1):
        cands = v / psi.r1
        cands = np.sort(cands[(cands > lo) & (cands <= hi)])
        for c in cands:
            if feasible(c):
                return float(c)
    return float(hi)


class HolderReport(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def _same_space(u: WeightedSamples, v: WeightedSamples):
    if u.weights.shape != v.weights.shape or not np.array_equal(u.weights, v.weights):
        raise ValueError("u and v must live on the same weighted space")


def holder_check(
    u: WeightedSamples, v: WeightedSamples, psi: YoungFunction, tol: float = DEFAULT_TOL
) -> HolderReport:
    """Check sum w|u v| <= 2 ||u||_psi ||v||_psi*."""
    _same_space(u, v)
    lhs = float(np.dot(u.weights, np.abs(u.values * v.values)))
    nu = luxemburg_norm(u, psi, tol)
    nv = luxemburg_norm(v, psi.conjugate_function(), tol)
    if nu == 0.0 or nv == 0.0:
        rhs = 0.0
    else:
        rhs = 2.0 * nu * nv
    ok = lhs <= rhs * (1.0 + tol) + tol
    return HolderReport(lhs, rhs, bool(ok))


def dual_trials(u: WeightedSamples, psi: YoungFunction, tol: float = DEFAULT_TOL) -> list[WeightedSamples]:
    """Candidate dual functions for :func:`dual_bracket`.

    The main one is a difference-quotient slope of psi at |u| / ||u||_psi,
    which nearly attains the dual supremum when psi is smooth.  Indicators of
    the largest entries cover psi that jump to +inf.
    """
    lam = luxemburg_norm(u, psi, tol)
    absu = np.abs(u.values)
    out = []
    if lam > 0:
        x = absu / lam
        h = 1e-7
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            base = psi(x)
            right = (psi(x * (1.0 + h)) - base) / (x * h)
            left = (base - psi(x * (1.0 - h))) / (x * h)
        slope = np.where(np.isfinite(right), right, left)
        slope = np.where((x > 0) & np.isfinite(slope), slope, 0.0)
        if slope.any():
            out.append(WeightedSamples(slope, u.weights))
    for i in np.argsort(-absu, kind="stable")[:3]:
        e = np.zeros_like(absu)
        e[i] = 1.0
        if u.weights[i] > 0:
            out.append(WeightedSamples(e, u.weights))
    return out


def dual_bracket(
    u: WeightedSamples,
    psi: YoungFunction,
    trials: Sequence[WeightedSamples] | None = None,
    tol: float = DEFAULT_TOL,
) -> tuple[float, float]:
    """Interval estimate of ||u||_psi from dual pairings.

    Each trial is rescaled to unit psi*-norm and paired with u; with ``P``
    the best pairing the result is ``(P / 2, 2 P)``.  The lower end is a
    certified bound for any trials; the upper end presumes the trials come
    close to the dual supremum, which :func:`dual_trials` (the default)
    arranges.
    """
    if trials is None:
        trials = dual_trials(u, psi, tol)
        if not trials:
            return (0.0, 0.0)
    if not trials:
        raise ValueError("dual_bracket needs at least one trial function")
    dual = psi.conjugate_function()
    best = 0.0
    for v in trials:
        _same_space(u, v)
        nv = luxemburg_norm(v, dual, tol)
        if nv == 0.0:
            continue
        pairing = float(np.dot(u.weights, np.abs(u.values * v.values))) / nv
        best = max(best, pairing)
    return (0.5 * best, 2.0 * best)
