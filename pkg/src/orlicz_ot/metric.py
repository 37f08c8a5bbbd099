"""Finite extended metric spaces (distances may be +inf)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .extended import INF, format_ext, parse_ext

__all__ = [
    "ExtendedMetric",
    "MetricError",
    "MetricReport",
    "GeodesicOracle",
    "validate_metric",
    "from_point_cloud",
    "with_blocked_pairs",
]

DEFAULT_CAP = 512
# relative slack for triangle checks; Euclidean distances are rounded
_TRI_RTOL = 1e-12


class MetricError(ValueError):
    """An extended distance matrix breaks one of the metric axioms."""

    def __init__(self, message: str, triple: tuple[int, int, int] | None = None):
        super().__init__(message)
        self.triple = triple


class MetricReport(NamedTuple):
    symmetric: bool
    zero_diag: bool
    identity: bool
    triangle: bool
    violations: list

    @property
    def ok(self) -> bool:
        return self.symmetric and self.zero_diag and self.identity and self.triangle


@dataclass(frozen=True, eq=False)
class ExtendedMetric:
    """``n`` points with an n x n matrix of distances in [0, +inf].

    ``coords`` is set when the space was built from a point cloud; it is what
    makes :attr:`oracle` available.
    """

    dist: np.ndarray
    labels: tuple | None = None
    coords: np.ndarray | None = None

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        if np.isnan(d).any() or (d < 0).any():
            raise ValueError("distances must be nonnegative (or +inf)")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != d.shape[0]:
                raise ValueError("one label per point required")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be unique")
            object.__setattr__(self, "labels", labels)
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != d.shape[0]:
                raise ValueError("one coordinate vector per point required")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtendedMetric):
            return NotImplemented
        same_coords = (self.coords is None and other.coords is None) or (
            self.coords is not None and other.coords is not None and np.array_equal(self.coords, other.coords)
        )
        return np.array_equal(self.dist, other.dist) and self.labels == other.labels and same_coords

    def index_of(self, key) -> int:
        """Point index for an int index or a label."""
        if self.labels is not None and key in self.labels:
            return self.labels.index(key)
        if isinstance(key, (int, np.integer)) and not isinstance(key, bool) and 0 <= key < self.n:
            return int(key)
        raise KeyError(f"no point {key!r} in this space")

    @property
    def oracle(self) -> GeodesicOracle | None:
        return None if self.coords is None else GeodesicOracle(self)

    def to_json(self) -> dict:
        if self.coords is not None and np.array_equal(self.dist, _euclidean(self.coords)):
            out = {"points": self.coords.tolist()}
        else:
            out = {"dist": [[format_ext(x) for x in row] for row in self.dist]}
            if self.coords is not None:
                out["points"] = self.coords.tolist()
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_json(cls, data: dict) -> ExtendedMetric:
        labels = data.get("labels")
        if "dist" in data:
            dist = np.array([[parse_ext(x) for x in row] for row in data["dist"]], dtype=float)
            coords = data.get("points")
            return cls(dist, labels=labels, coords=None if coords is None else np.asarray(coords, dtype=float))
        if "points" in data:
            return from_point_cloud(data["points"], labels=labels)
        raise ValueError("metric JSON needs a 'dist' matrix or a 'points' list")


class GeodesicOracle:
    """Straight-line interpolation between points of a Euclidean point cloud."""

    def __init__(self, space: ExtendedMetric):
        if space.coords is None:
            raise ValueError("a geodesic oracle needs point coordinates")
        self.space = space

    def defined(self, i: int, j: int) -> bool:
        return math.isfinite(self.space.dist[i, j])

    def interp(self, i: int, j: int, t: float) -> np.ndarray:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {t}")
        if not self.defined(i, j):
            raise ValueError(f"no geodesic between points {i} and {j}: distance is +inf")
        c = self.space.coords
        if t == 0.0:
            return c[i].copy()
        if t == 1.0:
            return c[j].copy()
        return (1.0 - t) * c[i] + t * c[j]


def _euclidean(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def validate_metric(space: ExtendedMetric | np.ndarray, cap: int = DEFAULT_CAP, max_report: int = 100) -> MetricReport:
    """Exhaustive axiom check; ``violations`` lists offending triangle triples (i, j, k)
    meaning ``d(i, k) > d(i, j) + d(j, k)``."""
    d = space.dist if isinstance(space, ExtendedMetric) else np.asarray(space, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if n > cap:
        raise ValueError(f"{n} points exceeds the exhaustive-check cap of {cap}")
    symmetric = bool(np.array_equal(d, d.T))
    zero_diag = bool(np.all(np.diag(d) == 0.0))
    off = ~np.eye(n, dtype=bool)
    identity = bool(np.all(d[off] > 0.0))
    violations = []
    for j in range(n):
        detour = d[:, j][:, None] + d[j, :][None, :]
        # inf <= inf holds; only a finite detour under an inf or larger direct hop fails
        with np.errstate(invalid="ignore"):
            bad = d > detour * (1.0 + _TRI_RTOL)
        bad[j, :] = False
        bad[:, j] = False
        for i, k in zip(*np.nonzero(bad)):
            if len(violations) < max_report:
                violations.append((int(i), j, int(k)))
            else:
                break
    triangle = not violations
    return MetricReport(symmetric, zero_diag, identity, triangle, violations)


def from_point_cloud(points, labels: Iterable | None = None) -> ExtendedMetric:
    """Euclidean metric on a point cloud, with the straight-line oracle attached."""
    if len(points) == 0:
        raise ValueError("point cloud must be nonempty")
    rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    dims = {r.shape for r in rows}
    if len(dims) != 1:
        raise ValueError(f"points must share one dimension, got shapes {sorted(dims)}")
    coords = np.vstack(rows)
    if not np.all(np.isfinite(coords)):
        raise ValueError("point coordinates must be finite")
    return ExtendedMetric(_euclidean(coords), labels=None if labels is None else tuple(labels), coords=coords)


def with_blocked_pairs(space: ExtendedMetric, blocked) -> ExtendedMetric:
    """Set the listed pairs to +inf (symmetrically) and re-validate.

    Raises :class:`MetricError` carrying the offending triple when a finite
    detour contradicts a blocked pair.
    """
    d = np.array(space.dist, dtype=float)
    for i, j in blocked:
        i, j = space.index_of(i), space.index_of(j)
        if i == j:
            raise MetricError(f"cannot block the diagonal entry ({i}, {i})")
        d[i, j] = d[j, i] = INF
    out = ExtendedMetric(d, labels=space.labels, coords=space.coords)
    report = validate_metric(out)
    if not report.triangle:
        i, j, k = report.violations[0]
        raise MetricError(
            f"blocking breaks the triangle inequality: d({i},{k}) = inf but d({i},{j}) + d({j},{k}) = {d[i, j] + d[j, k]:g}",
            triple=(i, j, k),
        )
    return out
