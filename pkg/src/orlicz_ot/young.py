"""Young functions: convex cost profiles with values in [0, +inf].

A :class:`YoungFunction` is immutable and vectorised: calling it on a numpy
array evaluates elementwise, calling it on a scalar returns a ``float``.
+inf is ``math.inf``.

Catalog kinds::

    power(p)              x**p                    p > 1
    linf()                0 on [0, 1], +inf after
    exp_growth()          e**x - x - 1
    power_exp(p)          e**(x**p) - 1           p > 1
    llogl()               (1 + x) log(1 + x) - x
    linear_bounded(a, b)  max(a x, b x - (b - a)) a x <= psi <= b x
    tabulated(points)     piecewise linear through convex samples

plus the internal ``conjugate`` kind produced by
:meth:`YoungFunction.conjugate_function`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, NamedTuple

import numpy as np
from scipy.special import lambertw

from .extended import INF, format_ext, parse_ext

__all__ = [
    "YoungFunction",
    "ValidationReport",
    "power",
    "linf",
    "exp_growth",
    "power_exp",
    "llogl",
    "linear_bounded",
    "tabulated",
    "CATALOG",
    "from_spec",
]

KINDS = (
    "power",
    "linf",
    "exp",
    "power_exp",
    "llogl",
    "linear_bounded",
    "tabulated",
    "conjugate",
)

# log-spaced probe points used by validate()
_PROBE = np.logspace(-6, 6, 64)
# conjugate probes stop at 1e2: e^y overflows long before 1e6
_CONJ_PROBE = np.logspace(-6, 2, 64)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ValidationReport(NamedTuple):
    hp_psi_ok: bool
    superlinear_ok: bool
    zero_derivative_ok: bool
    conjugate_ok: bool
    notes: tuple = ()

    @property
    def ok(self) -> bool:
        return self.hp_psi_ok and self.superlinear_ok and self.zero_derivative_ok


def _exp_growth(x):
    # e^x - x - 1 with a series branch to keep relative accuracy near 0
    small = x < 1e-3
    xs = np.where(small, x, 0.0)
    series = xs * xs * (0.5 + xs * (1.0 / 6.0 + xs * (1.0 / 24.0 + xs / 120.0)))
    return np.where(small, series, np.expm1(x) - x)


def _llogl(x):
    small = x < 1e-3
    xs = np.where(small, x, 0.0)
    series = xs * xs * (0.5 - xs * (1.0 / 6.0 - xs * (1.0 / 12.0 - xs / 20.0)))
    return np.where(small, series, (1.0 + x) * np.log1p(x) - x)


@dataclass(frozen=True, eq=True)
class YoungFunction:
    """A convex, lsc, non-decreasing profile with ``psi(0) = 0`` diverging at infinity.

    Use the module factories (:func:`power`, :func:`linf`, ...) or
    :func:`from_spec` rather than the constructor.
    """

    kind: str
    p: float | None = None
    a: float | None = None
    b: float | None = None
    points: tuple[tuple[float, float], ...] | None = None
    cap: float = INF  # declared r1 for the tabulated kind
    base: YoungFunction | None = field(default=None, compare=True)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Young function kind {self.kind!r}")
        if self.kind in ("power", "power_exp"):
            if self.p is None or not self.p > 1:
                raise ValueError(f"{self.kind} requires p > 1, got {self.p!r}")
        elif self.kind == "linear_bounded":
            if self.a is None or self.b is None or not (0 < self.a <= self.b < INF):
                raise ValueError(f"linear_bounded requires 0 < a <= b < inf, got a={self.a!r}, b={self.b!r}")
        elif self.kind == "tabulated":
            _check_table(self.points, self.cap)
        elif self.kind == "conjugate":
            if self.base is None:
                raise ValueError("conjugate kind needs a base function")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        if type(x) is float or type(x) is int:
            return self._eval_scalar(float(x))
        scalar = np.ndim(x) == 0
        xa = np.asarray(x, dtype=float)
        if np.any(xa < 0) or np.any(np.isnan(xa)):
            raise ValueError("Young functions are defined on [0, +inf)")
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._eval(xa)
        out = np.asarray(out, dtype=float)
        return float(out) if scalar else out

    def _eval_scalar(self, x: float) -> float:
        if not x >= 0:
            raise ValueError("Young functions are defined on [0, +inf)")
        k = self.kind
        try:
            if k == "power":
                return x**self.p
            if k == "linf":
                return 0.0 if x <= 1.0 else INF
            if k == "exp":
                if x < 1e-3:
                    return x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
                return math.expm1(x) - x
            if k == "power_exp":
                return math.expm1(x**self.p)
            if k == "llogl":
                if x < 1e-3:
                    return x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 12.0 - x / 20.0)))
                return (1.0 + x) * math.log1p(x) - x
            if k == "linear_bounded":
                return max(self.a * x, self.b * x - (self.b - self.a))
        except OverflowError:
            return INF
        with np.errstate(over="ignore", invalid="ignore"):
            return float(self._eval(np.asarray(x)))

    def _eval(self, x):
        k = self.kind
        if k == "power":
            return np.power(x, self.p)
        if k == "linf":
            return np.where(x <= 1.0, 0.0, INF)
        if k == "exp":
            return _exp_growth(x)
        if k == "power_exp":
            return np.expm1(np.power(x, self.p))
        if k == "llogl":
            return _llogl(x)
        if k == "linear_bounded":
            return np.maximum(self.a * x, self.b * x - (self.b - self.a))
        if k == "tabulated":
            xs, ys = self._table
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            inner = np.interp(x, xs, ys)
            out = np.where(x > xs[-1], ys[-1] + slope * (x - xs[-1]), inner)
            return np.where(x > self.cap, INF, out)
        # conjugate
        return self.base.conjugate(x)

    @cached_property
    def _table(self):
        pts = np.asarray(self.points, dtype=float)
        return pts[:, 0].copy(), pts[:, 1].copy()

    # -- structural constants --------------------------------------------------

    @cached_property
    def r0(self) -> float:
        """sup{x : psi(x) = 0}."""
        k = self.kind
        if k == "linf":
            return 1.0
        if k == "tabulated":
            xs, ys = self._table
            zero = np.nonzero(ys == 0.0)[0]
            last = int(zero[-1])
            if last == len(xs) - 1:
                # flat to the end of the table: extrapolated slope is 0
                return self.cap
            return float(xs[last])
        if k == "conjugate":
            return self.base._slope_at_zero
        return 0.0

    @cached_property
    def r1(self) -> float:
        """sup{x : psi(x) < +inf}."""
        k = self.kind
        if k == "linf":
            return 1.0
        if k == "tabulated":
            return float(self.cap)
        if k == "conjugate":
            return self.base._asymptotic_slope
        return INF

    @cached_property
    def _slope_at_zero(self) -> float:
        # right derivative at 0; psi* vanishes exactly on [0, this]
        k = self.kind
        if k == "linear_bounded":
            return float(self.a)
        if k == "tabulated":
            xs, ys = self._table
            return float((ys[1] - ys[0]) / (xs[1] - xs[0]))
        if k == "conjugate":
            return float(self.base.r0)
        return 0.0

    @cached_property
    def _asymptotic_slope(self) -> float:
        # lim psi(x)/x; psi* is finite exactly below this
        k = self.kind
        if k == "linear_bounded":
            return float(self.b)
        if k == "tabulated":
            if math.isfinite(self.cap):
                return INF
            xs, ys = self._table
            return float((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))
        if k == "conjugate":
            return float(self.base.r1)
        return INF

    @property
    def strictly_convex(self) -> bool:
        """Strict convexity on the finite increasing branch."""
        if self.kind in ("power", "exp", "power_exp", "llogl"):
            return True
        if self.kind == "conjugate":
            return self.base.kind in ("power", "exp", "power_exp", "llogl")
        return False

    # -- conjugate and inverse ---------------------------------------------------

    def conjugate(self, y):
        """psi*(y) = sup_{x >= 0} (x y - psi(x)), vectorised."""
        scalar = np.ndim(y) == 0
        ya = np.asarray(y, dtype=float)
        if np.any(ya < 0) or np.any(np.isnan(ya)):
            raise ValueError("the conjugate is evaluated on [0, +inf)")
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(self._conjugate(ya), dtype=float)
        return float(out) if scalar else out

    def _conjugate(self, y):
        k = self.kind
        if k == "power":
            q = self.p / (self.p - 1.0)
            return (self.p - 1.0) * np.power(y / self.p, q)
        if k == "linf":
            return y.copy()
        if k == "exp":
            return _llogl(y)
        if k == "llogl":
            return _exp_growth(y)
        if k == "power_exp":
            return _power_exp_conjugate(y, self.p)
        if k == "linear_bounded":
            return np.where(y <= self.a, 0.0, np.where(y <= self.b, y - self.a, INF))
        if k == "tabulated":
            xs, ys = self._table
            knots_x, knots_y = xs, ys
            if math.isfinite(self.cap):
                keep = xs <= self.cap
                knots_x = np.append(xs[keep], self.cap)
                knots_y = np.append(ys[keep], float(self._eval(np.asarray(self.cap))))
            vals = np.max(np.multiply.outer(y, knots_x) - knots_y, axis=-1)
            vals = np.maximum(vals, 0.0)
            if math.isinf(self.cap):
                vals = np.where(y > self._asymptotic_slope, INF, vals)
            return vals
        return _legendre(self._eval, y, self.r1)

    def biconjugate(self, x):
        """psi**(x), computed numerically from the conjugate."""
        return self.conjugate_function().conjugate(x) if self.kind != "conjugate" else self.base(x)

    def conjugate_function(self) -> YoungFunction:
        """psi* as a Young function in its own right (for dual Orlicz norms)."""
        return YoungFunction("conjugate", base=self)

    def inverse(self, s: float) -> float:
        """Pseudo-inverse: smallest x with psi(x) >= s, or r1 when s > psi(r1)."""
        s = float(s)
        if not s > 0:
            raise ValueError(f"pseudo-inverse needs s > 0, got {s}")
        k = self.kind
        if k == "power":
            return s ** (1.0 / self.p)
        if k == "linf":
            return 1.0
        if k == "power_exp":
            return math.log1p(s) ** (1.0 / self.p)
        if k == "linear_bounded":
            return s / self.a if s <= self.a else 1.0 + (s - self.a) / self.b
        return _cached_inverse(self, s)

    def _numeric_inverse(self, s: float) -> float:
        r0, r1 = self.r0, self.r1
        if math.isinf(s):
            return r1
        if math.isfinite(r1):
            top = self(r1)
            if top < s:
                return r1
            hi = r1
        else:
            hi = max(1.0, 2.0 * r0)
            while self(hi) < s:
                hi *= 2.0
        lo = r0
        # bisection on the predicate psi(x) >= s, down to adjacent floats
        for _ in range(2000):
            mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            if self(mid) >= s:
                hi = mid
            else:
                lo = mid
        return hi

    # -- validation -------------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Sampled checks of the Young-function hypotheses (best effort for tabulated)."""
        notes = []
        extra = [v for v in (self.r0, self.r1) if 0 < v < INF]
        xs = np.unique(np.concatenate([[0.0], _PROBE, extra]))
        vals = self(xs)

        hp = vals[0] == 0.0
        if not hp:
            notes.append("psi(0) != 0")
        finite = np.isfinite(vals)
        # once infinite, infinite for good
        first_inf = np.argmin(finite) if not finite.all() else len(vals)
        if not finite[first_inf:].sum() == 0:
            hp = False
            notes.append("psi returns to finite values after +inf")
        fv, fx = vals[:first_inf], xs[:first_inf]
        if np.any(np.diff(fv) < -1e-12 * np.abs(fv[:-1])):
            hp = False
            notes.append("psi decreasing somewhere")
        if len(fv) > 2:
            slopes = np.diff(fv) / np.diff(fx)
            scale = np.maximum(np.abs(slopes[:-1]), 1.0)
            if np.any(np.diff(slopes) < -1e-9 * scale):
                hp = False
                notes.append("psi not convex on samples")
        if not (np.any(vals > 0) or math.isfinite(self.r1)):
            hp = False
            notes.append("psi does not diverge")
        if math.isfinite(self.r1):
            at = self(self.r1)
            left = self(self.r1 * (1 - 1e-12))
            if math.isfinite(at) and abs(at - left) > 1e-6 * max(1.0, abs(at)):
                hp = False
                notes.append("psi not lower semicontinuous at r1")

        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = vals / np.where(xs > 0, xs, 1.0)
        ratio_at = lambda t: float(ratio[np.argmin(np.abs(xs - t))])  # noqa: E731

        big, mid = ratio_at(1e6), ratio_at(1e3)
        superlinear = math.isfinite(self.r1) or math.isinf(big) or big >= 1.01 * mid > 0
        tiny, small = ratio_at(1e-6), ratio_at(1e-3)
        zero_deriv = self.r0 > 0 or tiny == 0.0 or tiny <= 0.99 * small

        conj = self.conjugate(_CONJ_PROBE)
        conj_ok = bool(np.all(conj > 0) and np.all(np.isfinite(conj)))
        if conj_ok != (superlinear and zero_deriv):
            notes.append("conjugate criterion disagrees with the sampled growth checks")
        return ValidationReport(bool(hp), bool(superlinear), bool(zero_deriv), conj_ok, tuple(notes))

    # -- serialisation ------------------------------------------------------------

    def to_spec(self) -> dict[str, Any]:
        k = self.kind
        if k in ("power", "power_exp"):
            return {"kind": k, "p": self.p}
        if k == "linear_bounded":
            return {"kind": k, "a": self.a, "b": self.b}
        if k == "tabulated":
            spec = {"kind": k, "points": [list(p) for p in self.points]}
            if math.isfinite(self.cap):
                spec["r1"] = self.cap
            return spec
        if k == "conjugate":
            return {"kind": k, "base": self.base.to_spec()}
        return {"kind": k}

    def __repr__(self) -> str:
        args = {k: v for k, v in self.to_spec().items() if k != "kind"}
        inner = ", ".join(f"{k}={v!r}" for k, v in args.items())
        return f"YoungFunction({self.kind}{', ' if inner else ''}{inner})"


@lru_cache(maxsize=4096)
def _cached_inverse(psi: YoungFunction, s: float) -> float:
    return psi._numeric_inverse(s)


def _check_table(points, cap):
    if points is None or len(points) < 2:
        raise ValueError("tabulated Young function needs at least two points")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("tabulated points must be [x, y] pairs")
    if not np.all(np.isfinite(pts)):
        raise ValueError("tabulated points must be finite")
    if pts[0, 0] != 0.0 or pts[0, 1] != 0.0:
        raise ValueError("tabulated Young function must start at (0, 0)")
    dx = np.diff(pts[:, 0])
    if np.any(dx <= 0):
        raise ValueError("tabulated x values must be strictly increasing")
    slopes = np.diff(pts[:, 1]) / dx
    if np.any(slopes < 0):
        raise ValueError("tabulated Young function must be non-decreasing")
    if np.any(np.diff(slopes) < -1e-12 * np.maximum(1.0, np.abs(slopes[:-1]))):
        bad = int(np.argmax(np.diff(slopes) < 0)) + 1
        raise ValueError(f"tabulated Young function is not convex at point {bad}")
    if not cap > 0:
        raise ValueError("declared r1 must be positive")
    if math.isinf(cap) and slopes[-1] <= 0:
        raise ValueError("tabulated Young function must diverge (positive last slope or finite r1)")


def _power_exp_conjugate(y, p):
    # stationarity p x^(p-1) e^(x^p) = y; with z = x^p and q = p/(p-1),
    # q z e^(q z) = q (y/p)^q, so z = W0(q (y/p)^q) / q
    q = p / (p - 1.0)
    arg = q * np.power(y / p, q)
    z = np.real(lambertw(arg)) / q
    return y * np.power(z, 1.0 / p) - np.expm1(z)


def _legendre(profile, y, upper):
    """sup_{0 <= x <= upper} (x y - profile(x)), lockstep over the array ``y``.

    Geometric bracketing followed by golden-section search; the objective
    is concave so the bracket [x/2, 2x] around the last doubling/halving
    contains the maximiser.
    """
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    out = np.zeros_like(flat)
    todo = np.nonzero(flat > 0)[0]
    if todo.size == 0:
        return out.reshape(y.shape)
    yy = flat[todo]

    def g(x):
        return x * yy - profile(x)

    x = np.full_like(yy, min(1.0, upper))
    gx = g(x)
    grew = np.zeros(yy.shape, dtype=bool)
    unbounded = np.zeros(yy.shape, dtype=bool)
    active = np.ones(yy.shape, dtype=bool)
    for _ in range(1100):
        nxt = np.minimum(2.0 * x, upper)
        gn = g(nxt)
        step = active & (nxt > x) & (gn > gx)
        if not step.any():
            break
        x = np.where(step, nxt, x)
        gx = np.where(step, gn, gx)
        grew |= step
        active = step
        unbounded |= step & ~np.isfinite(x)
    unbounded |= (~np.isfinite(gx) & (gx > 0)) | (grew & (x > 1e300))
    # park unbounded entries on a harmless finite bracket
    x = np.where(unbounded, min(1.0, upper), x)
    gx = np.where(unbounded, 0.0, gx)

    shrink = ~grew
    for _ in range(1100):
        half = 0.5 * x
        gh = g(half)
        step = shrink & (gh >= gx) & (half > 0)
        if not step.any():
            break
        x = np.where(step, half, x)
        gx = np.where(step, gh, gx)
        shrink = step

    lo = 0.5 * x
    hi = np.minimum(2.0 * x, upper)
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    gc, gd = g(c), g(d)
    for _ in range(90):
        left = gc >= gd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - _GOLDEN * (hi - lo)
        new_d = lo + _GOLDEN * (hi - lo)
        c, d, gc, gd = (
            np.where(left, new_c, d),
            np.where(left, c, new_d),
            np.where(left, g(new_c), gd),
            np.where(left, gc, g(new_d)),
        )
    best = np.maximum.reduce([gc, gd, g(lo), g(hi), gx, np.zeros_like(gx)])
    best = np.where(unbounded, INF, best)
    out[todo] = best
    return out.reshape(y.shape)


# -- factories ------------------------------------------------------------------


def power(p: float) -> YoungFunction:
    return YoungFunction("power", p=float(p))


def linf() -> YoungFunction:
    return YoungFunction("linf")


def exp_growth() -> YoungFunction:
    return YoungFunction("exp")


def power_exp(p: float) -> YoungFunction:
    return YoungFunction("power_exp", p=float(p))


def llogl() -> YoungFunction:
    return YoungFunction("llogl")


def linear_bounded(a: float, b: float | None = None) -> YoungFunction:
    return YoungFunction("linear_bounded", a=float(a), b=float(a if b is None else b))


def tabulated(points, r1: float = INF) -> YoungFunction:
    pts = tuple((float(x), float(y)) for x, y in points)
    return YoungFunction("tabulated", points=pts, cap=float(r1))


CATALOG = {
    "power1.5": power(1.5),
    "power2": power(2.0),
    "power3": power(3.0),
    "linf": linf(),
    "exp": exp_growth(),
    "power_exp2": power_exp(2.0),
    "llogl": llogl(),
}


def from_spec(spec) -> YoungFunction:
    """Build a Young function from ``{"kind": ..., params}`` (dict or JSON text)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("Young function spec must be an object with a 'kind' key")
    kind = spec["kind"]
    if kind == "power":
        return power(parse_ext(spec["p"]))
    if kind == "linf":
        return linf()
    if kind in ("exp", "exp_growth"):
        return exp_growth()
    if kind == "power_exp":
        return power_exp(parse_ext(spec["p"]))
    if kind == "llogl":
        return llogl()
    if kind == "linear_bounded":
        return linear_bounded(parse_ext(spec["a"]), parse_ext(spec.get("b", spec["a"])))
    if kind == "tabulated":
        return tabulated(spec["points"], parse_ext(spec.get("r1", "inf")))
    if kind == "conjugate":
        return from_spec(spec["base"]).conjugate_function()
    raise ValueError(f"unknown Young function kind {kind!r}")


def spec_to_json(psi: YoungFunction) -> dict:
    spec = psi.to_spec()
    if "r1" in spec:
        spec["r1"] = format_ext(spec["r1"])
    return spec
