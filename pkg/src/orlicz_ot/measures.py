"""Finitely supported measures, couplings, path measures and measure curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .extended import weighted_sum
from .metric import ExtendedMetric

__all__ = ["DiscreteMeasure", "Coupling", "PathMeasure", "MeasureCurve", "dirac", "uniform"]

# marginal tolerance for Γ(mu, nu) membership
MARGINAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability weights on point indices of an :class:`ExtendedMetric`.

    Construction normalises: zero atoms are dropped, duplicate indices are
    rejected, the support is sorted and weights are divided by their sum.
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.int64).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if s.shape != w.shape:
            raise ValueError(f"{s.size} support points but {w.size} weights")
        if (s < 0).any():
            raise ValueError("support indices must be nonnegative")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if len(np.unique(s)) != s.size:
            raise ValueError("duplicate support indices")
        total = w.sum()
        if not total > 0:
            raise ValueError("a probability measure needs positive total mass")
        keep = w > 0
        s, w = s[keep], w[keep]
        order = np.argsort(s, kind="stable")
        s, w = s[order], w[order]
        if abs(total - 1.0) > 1e-15:
            w = w / total
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.support.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.support, other.support) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.support.tobytes(), self.weights.tobytes()))

    def isclose(self, other: DiscreteMeasure, atol: float = 1e-12) -> bool:
        return self.deviation(other) <= atol

    def deviation(self, other: DiscreteMeasure) -> float:
        """max |self(x) - other(x)| over the union of supports."""
        a = dict(zip(self.support.tolist(), self.weights.tolist()))
        b = dict(zip(other.support.tolist(), other.weights.tolist()))
        return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in a.keys() | b.keys()), default=0.0)

    def mass(self, index: int) -> float:
        pos = np.searchsorted(self.support, index)
        if pos < self.support.size and self.support[pos] == index:
            return float(self.weights[pos])
        return 0.0

    def to_json(self, space: ExtendedMetric | None = None) -> dict:
        support = self.support.tolist()
        if space is not None and space.labels is not None:
            support = [space.labels[i] for i in support]
        return {"support": support, "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, data: dict, space: ExtendedMetric | None = None) -> DiscreteMeasure:
        support = data["support"]
        if space is not None:
            support = [space.index_of(k) for k in support]
            if any(i >= space.n for i in support):
                raise ValueError("support index outside the metric space")
        return cls(np.asarray(support, dtype=np.int64), np.asarray(data["weights"], dtype=float))


def dirac(index: int) -> DiscreteMeasure:
    return DiscreteMeasure(np.array([index]), np.array([1.0]))


def uniform(indices: Sequence[int]) -> DiscreteMeasure:
    idx = np.asarray(indices, dtype=np.int64)
    return DiscreteMeasure(idx, np.full(idx.size, 1.0 / idx.size))


@dataclass(frozen=True, eq=False)
class Coupling:
    """A transport plan: ``matrix[a, b]`` is the mass sent from ``rows[a]`` to ``cols[b]``."""

    matrix: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        r = np.asarray(self.rows, dtype=np.int64).ravel()
        c = np.asarray(self.cols, dtype=np.int64).ravel()
        if m.shape != (r.size, c.size):
            raise ValueError(f"plan shape {m.shape} does not match supports ({r.size}, {c.size})")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("plan entries must be finite and nonnegative")
        for arr in (m, r, c):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rows", r)
        object.__setattr__(self, "cols", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coupling):
            return NotImplemented
        return (
            np.array_equal(self.matrix, other.matrix)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    def arcs(self):
        """Charged arcs as (source index, target index, mass) triples."""
        a, b = np.nonzero(self.matrix > 0)
        return [(int(self.rows[i]), int(self.cols[j]), float(self.matrix[i, j])) for i, j in zip(a, b)]

    def distances(self, space: ExtendedMetric) -> np.ndarray:
        return space.dist[np.ix_(self.rows, self.cols)]

    def mean_cost(self, space: ExtendedMetric) -> float:
        return weighted_sum(self.matrix, self.distances(space))

    def source(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.rows, self.matrix.sum(axis=1))

    def target(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.cols, self.matrix.sum(axis=0))

    def to_json(self) -> dict:
        return {"rows": self.rows.tolist(), "cols": self.cols.tolist(), "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> Coupling:
        return cls(np.asarray(data["matrix"], dtype=float).reshape(len(data["rows"]), len(data["cols"])),
                   np.asarray(data["rows"]), np.asarray(data["cols"]))

    @classmethod
    def product(cls, mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
        return cls(np.outer(mu.weights, nu.weights), mu.support, nu.support)

    @classmethod
    def identity(cls, mu: DiscreteMeasure) -> Coupling:
        return cls(np.diag(mu.weights), mu.support, mu.support)


@dataclass(frozen=True, eq=False)
class PathMeasure:
    """Weights on discrete paths ``x_0 ... x_K`` sampled on ``grid``."""

    paths: np.ndarray
    weights: np.ndarray
    grid: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float).ravel()
        p = np.asarray(self.paths, dtype=np.int64)
        if p.ndim == 1 and p.size == 0:
            p = p.reshape(0, g.size)
        w = np.asarray(self.weights, dtype=float).ravel()
        if p.ndim != 2 or p.shape[1] != g.size:
            raise ValueError(f"every path needs {g.size} nodes, got array of shape {p.shape}")
        if p.shape[0] != w.size:
            raise ValueError("one weight per path required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("path weights must be finite and nonnegative")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid times must be strictly increasing")
        for arr in (p, w, g):
            arr.setflags(write=False)
        object.__setattr__(self, "paths", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "grid", g)

    def __len__(self) -> int:
        return self.weights.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathMeasure):
            return NotImplemented
        return (
            np.array_equal(self.paths, other.paths)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.grid, other.grid)
        )

    @property
    def steps(self) -> int:
        return self.grid.size - 1

    def node_marginal(self, k: int) -> DiscreteMeasure:
        """(e_{t_k})_# eta."""
        idx, inv = np.unique(self.paths[:, k], return_inverse=True)
        return DiscreteMeasure(idx, np.bincount(inv.ravel(), weights=self.weights, minlength=idx.size))

    def node_masses(self, k: int) -> dict[int, float]:
        """Unnormalised pushforward under evaluation at node k."""
        out: dict[int, float] = {}
        for x, w in zip(self.paths[:, k].tolist(), self.weights.tolist()):
            out[x] = out.get(x, 0.0) + w
        return out

    def pair_coupling(self, j: int, k: int) -> Coupling:
        """(e_{t_j}, e_{t_k})_# eta."""
        rows, ri = np.unique(self.paths[:, j], return_inverse=True)
        cols, ci = np.unique(self.paths[:, k], return_inverse=True)
        m = np.zeros((rows.size, cols.size))
        np.add.at(m, (ri.ravel(), ci.ravel()), self.weights)
        return Coupling(m, rows, cols)

    def to_json(self) -> dict:
        return {
            "grid": self.grid.tolist(),
            "paths": [{"nodes": p, "weight": w} for p, w in zip(self.paths.tolist(), self.weights.tolist())],
        }

    @classmethod
    def from_json(cls, data: dict) -> PathMeasure:
        grid = np.asarray(data["grid"], dtype=float)
        nodes = [p["nodes"] for p in data["paths"]]
        paths = np.asarray(nodes, dtype=np.int64).reshape(len(nodes), grid.size)
        return cls(paths, np.asarray([p["weight"] for p in data["paths"]], dtype=float), grid)


@dataclass(frozen=True, eq=False)
class MeasureCurve:
    """One probability measure per grid time, all on the same metric space."""

    times: np.ndarray
    measures: tuple[DiscreteMeasure, ...]
    space: ExtendedMetric

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        ms = tuple(self.measures)
        if t.size == 0:
            raise ValueError("a curve needs at least one time")
        if t.size != len(ms):
            raise ValueError(f"{t.size} times but {len(ms)} measures")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        for k, m in enumerate(ms):
            if not isinstance(m, DiscreteMeasure):
                raise TypeError(f"measure {k} is not a DiscreteMeasure")
            if m.support.size and m.support.max() >= self.space.n:
                raise ValueError(f"measure {k} charges a point outside the metric space")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "measures", ms)

    @property
    def steps(self) -> int:
        return self.times.size - 1

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeasureCurve):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and self.measures == other.measures
            and self.space == other.space
        )

    def to_json(self, include_space: bool = True) -> dict:
        out = {
            "times": self.times.tolist(),
            "measures": [m.to_json(self.space) for m in self.measures],
        }
        if include_space:
            out["metric"] = self.space.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict, space: ExtendedMetric | None = None) -> MeasureCurve:
        if space is None:
            if "metric" not in data:
                raise ValueError("curve JSON has no 'metric' and none was supplied")
            space = ExtendedMetric.from_json(data["metric"])
        measures = tuple(DiscreteMeasure.from_json(m, space) for m in data["measures"])
        return cls(np.asarray(data["times"], dtype=float), measures, space)
