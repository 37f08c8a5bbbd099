import itertools
import math

import numpy as np
import pytest

from orlicz_ot.errors import PreconditionError
from orlicz_ot.measures import Coupling, DiscreteMeasure, dirac, uniform
from orlicz_ot.metric import from_point_cloud, with_blocked_pairs
from orlicz_ot.transport import (
    admissible_check,
    glue,
    jensen_bound_check,
    min_modular_plan,
    optimality_certificate,
    plan_norm,
    wasserstein_orlicz,
)
from orlicz_ot.young import CATALOG, exp_growth, linear_bounded, linf, llogl, power, tabulated

from oracles import bottleneck_uniform, lp_transport, orlicz_distance, p_wasserstein, random_instance

LINE = from_point_cloud([[0.0], [1.0], [2.0], [3.0]])
MU, NU = uniform([0, 1]), uniform([2, 3])
CLUSTERS = with_blocked_pairs(LINE, [(i, j) for i in (0, 1) for j in (2, 3)])


def _measures(rng, pts, s1, s2):
    sp = from_point_cloud(pts)
    return sp, DiscreteMeasure(*s1), DiscreteMeasure(*s2)


def test_admissibility():
    assert admissible_check(Coupling.product(MU, NU), MU, NU).ok
    assert admissible_check(Coupling.identity(MU), MU, MU).ok
    bad = Coupling(np.diag([0.7, 0.3]), [0, 1], [0, 1])
    rep = admissible_check(bad, MU, MU)
    assert not rep.ok
    np.testing.assert_allclose(rep.max_deviation, 0.2)
    with pytest.raises(ValueError):
        admissible_check(Coupling.identity(MU), MU, uniform([0, 1, 2]))


def test_min_modular_plan_examples():
    g, v = min_modular_plan(MU, MU, LINE, power(2), 0.3)
    assert v == 0.0 and admissible_check(g, MU, MU).ok
    g, v = min_modular_plan(MU, NU, LINE, power(2), 1.0)
    # brute force over the two permutation couplings
    perms = [np.mean([LINE.dist[i, 2 + s[i]] ** 2 for i in range(2)]) for s in itertools.permutations(range(2))]
    assert v == min(perms) == 4.0
    np.testing.assert_array_equal(g.matrix, [[0.5, 0.0], [0.0, 0.5]])
    g, v = min_modular_plan(MU, NU, CLUSTERS, power(2), 1.0)
    assert g is None and v == math.inf
    with pytest.raises(ValueError):
        min_modular_plan(MU, NU, LINE, power(2), 0.0)


@pytest.mark.parametrize("name", list(CATALOG))
def test_F_is_non_increasing(name):
    psi = CATALOG[name]
    rng = np.random.default_rng(4)
    for _ in range(10):
        sp, mu, nu = _measures(rng, *random_instance(rng))
        lams = np.logspace(-2, 2, 40)
        vals = [min_modular_plan(mu, nu, sp, psi, lam)[1] for lam in lams]
        assert all(b <= a + 1e-12 * max(1.0, a) for a, b in zip(vals, vals[1:]) if math.isfinite(a))


def test_min_modular_matches_linprog():
    rng = np.random.default_rng(5)
    for _ in range(50):
        sp, mu, nu = _measures(rng, *random_instance(rng))
        d = sp.dist[np.ix_(mu.support, nu.support)]
        lam = float(rng.uniform(0.3, 3.0))
        ref, _ = lp_transport(mu.weights, nu.weights, exp_growth()(d / lam))
        np.testing.assert_allclose(min_modular_plan(mu, nu, sp, exp_growth(), lam)[1], ref, rtol=1e-9)


def test_distance_examples():
    two = from_point_cloud([[0.0], [5.0]])
    assert wasserstein_orlicz(dirac(0), dirac(1), two, power(2)).distance == 5.0
    assert wasserstein_orlicz(MU, MU, LINE, exp_growth()).distance == 0.0
    res = wasserstein_orlicz(MU, NU, LINE, power(2))
    assert res.distance == 2.0
    np.testing.assert_array_equal(res.plan.matrix, [[0.5, 0.0], [0.0, 0.5]])
    assert wasserstein_orlicz(MU, NU, LINE, linf()).distance == 2.0


def test_blocked_clusters_give_infinity():
    res = wasserstein_orlicz(MU, NU, CLUSTERS, power(2))
    assert res.distance == math.inf and res.plan is None
    # partial overlap inside a cluster is still finite
    assert wasserstein_orlicz(dirac(0), dirac(1), CLUSTERS, power(2)).distance == 1.0


def test_rejects_non_young_function():
    bad = tabulated([(0, 0), (1, 1), (2, 3)])
    object.__setattr__(bad, "points", ((0.0, 0.0), (1.0, 1.0), (2.0, 1.5)))  # breaks convexity after load
    bad.__dict__.pop("_table", None)
    with pytest.raises(PreconditionError):
        wasserstein_orlicz(MU, NU, LINE, bad)


@pytest.mark.parametrize("name", list(CATALOG))
def test_dirac_formula(name):
    psi = CATALOG[name]
    rng = np.random.default_rng(7)
    for _ in range(20):
        sp = from_point_cloud(rng.normal(size=(2, 3)))
        w = wasserstein_orlicz(dirac(0), dirac(1), sp, psi).distance
        np.testing.assert_allclose(w * psi.inverse(1.0), sp.dist[0, 1], rtol=1e-9)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_power_matches_p_wasserstein(p):
    rng = np.random.default_rng(int(p * 10))
    for _ in range(40):
        sp, mu, nu = _measures(rng, *random_instance(rng))
        d = sp.dist[np.ix_(mu.support, nu.support)]
        ref = p_wasserstein(mu.weights, nu.weights, d, p)
        np.testing.assert_allclose(wasserstein_orlicz(mu, nu, sp, power(p)).distance, ref, rtol=1e-7)


def test_linf_matches_bottleneck():
    rng = np.random.default_rng(9)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        sp = from_point_cloud(rng.normal(size=(2 * n, 2)))
        mu, nu = uniform(range(n)), uniform(range(n, 2 * n))
        ref = bottleneck_uniform(sp.dist[:n, n:])
        np.testing.assert_allclose(wasserstein_orlicz(mu, nu, sp, linf()).distance, ref, rtol=1e-9)


@pytest.mark.parametrize("name", ["exp", "llogl", "power_exp2"])
def test_against_bisection_linprog_oracle(name):
    psi = CATALOG[name]
    rng = np.random.default_rng(12)
    for _ in range(8):
        sp, mu, nu = _measures(rng, *random_instance(rng, max_atoms=4))
        d = sp.dist[np.ix_(mu.support, nu.support)]
        ref = orlicz_distance(mu.weights, nu.weights, d, psi)
        np.testing.assert_allclose(wasserstein_orlicz(mu, nu, sp, psi).distance, ref, rtol=1e-8)


def test_plan_norm_equals_distance():
    rng = np.random.default_rng(13)
    for psi in CATALOG.values():
        sp, mu, nu = _measures(rng, *random_instance(rng))
        res = wasserstein_orlicz(mu, nu, sp, psi)
        np.testing.assert_allclose(plan_norm(res.plan, sp, psi), res.distance, rtol=1e-9)


def test_certificate_examples():
    res = wasserstein_orlicz(MU, NU, LINE, power(2))
    rep = optimality_certificate(res.plan, MU, NU, LINE, power(2), res.distance)
    assert rep.ok
    anti = Coupling(np.array([[0.0, 0.5], [0.5, 0.0]]), [0, 1], [2, 3])
    rep = optimality_certificate(anti, MU, NU, LINE, power(2), 2.0)
    assert rep.modular_at_W == 1.25 and not rep.ok
    two = from_point_cloud([[0.0], [4.0]])
    psi = exp_growth()
    W = 4.0 / psi.inverse(1.0)
    rep = optimality_certificate(Coupling(np.ones((1, 1)), [0], [1]), dirac(0), dirac(1), two, psi, W)
    assert rep.ok and rep.modular_at_W <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        optimality_certificate(anti, MU, NU, LINE, power(2), 0.0)


def test_jensen_examples():
    two = from_point_cloud([[0.0], [4.0]])
    for psi in CATALOG.values():
        res = wasserstein_orlicz(dirac(0), dirac(1), two, psi)
        rep = jensen_bound_check(res.plan, two, psi, res.distance)
        np.testing.assert_allclose(rep.mean_cost, rep.bound, rtol=1e-9)
        assert rep.ok
    res = wasserstein_orlicz(MU, NU, LINE, power(2))
    rep = jensen_bound_check(res.plan, LINE, power(2), res.distance)
    assert (rep.mean_cost, rep.bound, rep.ok) == (2.0, 2.0, True)


def test_jensen_sweep_exp():
    rng = np.random.default_rng(14)
    for _ in range(100):
        sp, mu, nu = _measures(rng, *random_instance(rng, n_points=5))
        res = wasserstein_orlicz(mu, nu, sp, exp_growth())
        assert jensen_bound_check(res.plan, sp, exp_growth(), res.distance).ok


@pytest.mark.parametrize("name", list(CATALOG))
def test_metric_axioms_small(name):
    psi = CATALOG[name]
    rng = np.random.default_rng(15)
    for _ in range(30):
        pts = rng.normal(size=(6, 2))
        sp = from_point_cloud(pts)
        ms = [DiscreteMeasure(rng.choice(6, 3, replace=False), rng.random(3) + 0.05) for _ in range(3)]
        w = lambda a, b: wasserstein_orlicz(a, b, sp, psi).distance  # noqa: E731
        assert w(ms[0], ms[0]) == 0.0
        np.testing.assert_allclose(w(ms[0], ms[1]), w(ms[1], ms[0]), rtol=1e-8)
        assert w(ms[0], ms[2]) <= w(ms[0], ms[1]) + w(ms[1], ms[2]) + 1e-6


def test_linear_sandwich():
    rng = np.random.default_rng(16)
    for a, b in [(1.0, 1.0), (0.5, 2.0), (1.0, 3.0)]:
        psi = linear_bounded(a, b)
        for _ in range(20):
            sp, mu, nu = _measures(rng, *random_instance(rng))
            d = sp.dist[np.ix_(mu.support, nu.support)]
            w1, plan = lp_transport(mu.weights, nu.weights, d)
            W = wasserstein_orlicz(mu, nu, sp, psi).distance
            assert a * w1 <= W * (1 + 1e-9)
            assert W <= b * w1 * (1 + 1e-9)
            if w1 > 0:
                assert float(np.sum(plan * psi(d / (b * w1)))) <= 1.0 + 1e-9


def test_glue_examples():
    g = Coupling(np.array([[0.2, 0.3], [0.5, 0.0]]), [0, 1], [2, 3])
    eta = glue([g], [g.source(), g.target()])
    np.testing.assert_array_equal(eta.paths, [[0, 2], [0, 3], [1, 2]])
    np.testing.assert_array_equal(eta.weights, [0.2, 0.3, 0.5])

    mu = uniform([0, 1])
    swap = Coupling(np.array([[0.0, 0.5], [0.5, 0.0]]), [0, 1], [0, 1])
    eta = glue([Coupling.identity(mu), swap], [mu, mu, mu])
    np.testing.assert_array_equal(eta.paths, [[0, 0, 1], [1, 1, 0]])
    np.testing.assert_array_equal(eta.weights, [0.5, 0.5])

    nu = DiscreteMeasure([0, 2, 3], [0.2, 0.3, 0.5])
    eta = glue([Coupling.identity(nu)] * 3, [nu] * 4)
    np.testing.assert_array_equal(eta.paths, [[0] * 4, [2] * 4, [3] * 4])
    np.testing.assert_allclose(eta.weights, nu.weights, atol=1e-15)


def test_glue_marginals_exact():
    rng = np.random.default_rng(17)
    for _ in range(50):
        sp = from_point_cloud(rng.normal(size=(6, 2)))
        ms = [DiscreteMeasure(rng.choice(6, 3, replace=False), rng.random(3) + 0.05) for _ in range(4)]
        plans = [wasserstein_orlicz(ms[k], ms[k + 1], sp, power(2)).plan for k in range(3)]
        eta = glue(plans, ms)
        for k in range(4):
            assert eta.node_marginal(k).deviation(ms[k]) <= 1e-12
        for k in range(3):
            pc = eta.pair_coupling(k, k + 1)
            full = np.zeros((6, 6))
            full[np.ix_(pc.rows, pc.cols)] = pc.matrix
            ref = np.zeros((6, 6))
            ref[np.ix_(plans[k].rows, plans[k].cols)] = plans[k].matrix
            np.testing.assert_allclose(full, ref, atol=1e-12)


def test_glue_rejects_inconsistent_marginals():
    mu = uniform([0, 1])
    with pytest.raises(ValueError):
        glue([Coupling.identity(mu)], [mu, uniform([0, 2])])
    with pytest.raises(ValueError):
        glue([Coupling.identity(mu)], [mu])
