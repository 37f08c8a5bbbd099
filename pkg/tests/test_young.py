import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_ot.young import (
    CATALOG,
    exp_growth,
    from_spec,
    linear_bounded,
    linf,
    llogl,
    power,
    power_exp,
    spec_to_json,
    tabulated,
)

from oracles import bisect, grid_sup_conjugate

FINITE_KINDS = ["power1.5", "power2", "power3", "exp", "power_exp2", "llogl"]


def test_eval_examples():
    assert power(2)(3.0) == 9.0
    assert linf()(0.7) == 0.0
    assert linf()(1.5) == math.inf
    assert linf()(1.0) == 0.0  # lower semicontinuous at r1
    np.testing.assert_allclose(exp_growth()(1.0), math.e - 2.0, rtol=1e-15)


def test_eval_small_arguments_match_series():
    x = np.array([1e-12, 1e-9, 1e-6, 1e-4])
    np.testing.assert_allclose(exp_growth()(x), x**2 / 2 + x**3 / 6 + x**4 / 24, rtol=1e-12)
    np.testing.assert_allclose(llogl()(x), x**2 / 2 - x**3 / 6 + x**4 / 12, rtol=1e-10)


def test_eval_vectorised_and_scalar_agree():
    xs = np.linspace(0, 3, 31)
    for psi in CATALOG.values():
        vec = psi(xs)
        scal = np.array([psi(float(x)) for x in xs])
        fin = np.isfinite(vec)
        np.testing.assert_array_equal(np.isfinite(scal), fin)
        # the scalar path uses math, the array path numpy: equal to a few ulps
        np.testing.assert_allclose(scal[fin], vec[fin], rtol=4e-15)


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        power(2)(-1.0)
    with pytest.raises(ValueError):
        power(2).conjugate(-0.5)
    with pytest.raises(ValueError):
        power(2).inverse(0.0)


def test_r0_r1():
    assert (power(2).r0, power(2).r1) == (0.0, math.inf)
    assert (linf().r0, linf().r1) == (1.0, 1.0)
    lb = linear_bounded(1.0, 3.0)
    assert lb.r0 == 0.0 and lb.r1 == math.inf


@pytest.mark.parametrize("name", list(CATALOG))
def test_validate_catalog(name):
    rep = CATALOG[name].validate()
    assert rep.hp_psi_ok and rep.superlinear_ok and rep.zero_derivative_ok and rep.conjugate_ok, rep.notes
    assert rep.ok


def test_validate_linear_fails_growth_flags():
    rep = linear_bounded(1.0, 1.0).validate()
    assert rep.hp_psi_ok
    assert not rep.superlinear_ok
    assert not rep.zero_derivative_ok
    assert not rep.conjugate_ok


def test_conjugate_examples():
    for psi in CATALOG.values():
        assert psi.conjugate(0.0) == 0.0
    np.testing.assert_allclose(power(2).conjugate(2.0), 1.0, rtol=1e-15)
    np.testing.assert_allclose(exp_growth().conjugate(1.0), 2 * math.log(2) - 1, rtol=1e-14)


@pytest.mark.parametrize("name", FINITE_KINDS)
def test_conjugate_against_grid_sup(name):
    psi = CATALOG[name]
    for y in [0.1, 0.5, 1.0, 2.0, 5.0]:
        ref = grid_sup_conjugate(psi, y)
        np.testing.assert_allclose(psi.conjugate(y), ref, rtol=1e-8, atol=1e-10)


def test_conjugate_of_linf_and_linear():
    ys = np.array([0.0, 0.3, 2.0])
    np.testing.assert_array_equal(linf().conjugate(ys), ys)
    lb = linear_bounded(1.0, 2.0)
    np.testing.assert_array_equal(lb.conjugate(np.array([0.5, 1.0, 1.5, 2.0, 2.5])), [0.0, 0.0, 0.5, 1.0, math.inf])


@pytest.mark.parametrize("name", list(CATALOG))
def test_biconjugate_recovers_psi(name):
    psi = CATALOG[name]
    xs = np.logspace(-3, 0.5, 25)
    if name == "linf":
        xs = xs[xs <= 1.0]
    vals = psi(xs)
    np.testing.assert_allclose(psi.biconjugate(xs), vals, rtol=1e-8, atol=1e-8 * np.maximum(1.0, vals).max())


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(list(CATALOG)), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_fenchel_young(name, x, y):
    psi = CATALOG[name]
    lhs = x * y
    rhs = psi(x) + psi.conjugate(y)
    assert lhs <= rhs + 1e-9 * max(1.0, abs(lhs))


def test_inverse_examples():
    for p in (1.5, 2.0, 3.0):
        assert power(p).inverse(1.0) == 1.0
    assert linf().inverse(1.0) == 1.0
    assert linf().inverse(5.0) == 1.0  # beyond psi(r1): r1
    ref = bisect(lambda x: math.exp(x) - x - 2.0, 0.0, 2.0)
    np.testing.assert_allclose(exp_growth().inverse(1.0), ref, rtol=1e-14)
    np.testing.assert_allclose(exp_growth().inverse(1.0), 1.1461932206, rtol=1e-10)


@pytest.mark.parametrize("name", FINITE_KINDS + ["linf"])
def test_inverse_of_eval_on_increasing_branch(name):
    psi = CATALOG[name]
    xs = np.linspace(0.05, 3.0, 40) if name != "linf" else np.array([1.0])
    for x in xs:
        s = psi(float(x))
        if s > 0 and math.isfinite(s):
            np.testing.assert_allclose(psi.inverse(s), x, rtol=1e-8)


def test_inverse_flat_part_convention():
    # on linear_bounded(1, 2) the increasing branch starts at 0
    lb = linear_bounded(1.0, 2.0)
    np.testing.assert_allclose(lb.inverse(0.5), 0.5)
    np.testing.assert_allclose(lb.inverse(3.0), 2.0)  # 2x - 1 = 3


def test_strict_convexity_flags():
    assert power(2).strictly_convex and exp_growth().strictly_convex and llogl().strictly_convex
    assert power_exp(2).strictly_convex
    assert not linf().strictly_convex
    assert not linear_bounded(1, 2).strictly_convex


def test_tabulated_semantics():
    psi = tabulated([(0, 0), (1, 0.5), (2, 2)])
    assert psi(0.5) == 0.25
    assert psi(3.0) == 3.5  # last slope extrapolated
    assert psi.r1 == math.inf
    capped = tabulated([(0, 0), (1, 0.5), (2, 2)], r1=2.0)
    assert capped(2.0) == 2.0 and capped(2.5) == math.inf
    assert capped.validate().hp_psi_ok


@pytest.mark.parametrize("points", [[(0, 1), (1, 2)], [(0, 0), (1, 2), (2, 3)], [(0, 0), (1, 1), (1, 2)]])
def test_tabulated_rejects_bad_tables(points):
    with pytest.raises(ValueError):
        tabulated(points)


@pytest.mark.parametrize("psi", list(CATALOG.values()) + [linear_bounded(1, 2), tabulated([(0, 0), (1, 1), (2, 3)], r1=5.0)])
def test_spec_round_trip(psi):
    import json

    again = from_spec(json.loads(json.dumps(spec_to_json(psi))))
    assert again == psi


def test_spec_errors():
    with pytest.raises(ValueError):
        from_spec({"p": 2})
    with pytest.raises(ValueError):
        from_spec({"kind": "cosh"})
    with pytest.raises(ValueError):
        power(1.0)
