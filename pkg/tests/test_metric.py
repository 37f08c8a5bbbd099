import math

import numpy as np
import pytest

from orlicz_ot.metric import (
    ExtendedMetric,
    MetricError,
    from_point_cloud,
    validate_metric,
    with_blocked_pairs,
)

INF = math.inf


def test_two_point_space():
    rep = validate_metric(ExtendedMetric([[0, 5], [5, 0]]))
    assert rep.ok and rep.violations == []


def test_triangle_violation_reported():
    d = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], float)
    rep = validate_metric(d)
    assert not rep.triangle
    assert (0, 1, 2) in rep.violations


def test_clusters_with_infinite_cross_distance():
    d = np.array([[0, 1, INF, INF], [1, 0, INF, INF], [INF, INF, 0, 2], [INF, INF, 2, 0]])
    assert validate_metric(d).ok


def test_axiom_flags():
    assert not validate_metric(np.array([[0, 1], [2, 0]], float)).symmetric
    assert not validate_metric(np.array([[1, 1], [1, 0]], float)).zero_diag
    assert not validate_metric(np.array([[0, 0], [0, 0]], float)).identity
    with pytest.raises(ValueError):
        validate_metric(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        validate_metric(np.zeros((4, 4)), cap=3)


def test_point_cloud_distances_and_oracle():
    line = from_point_cloud([[0.0], [3.0]])
    assert line.dist[0, 1] == 3.0
    np.testing.assert_array_equal(line.oracle.interp(0, 1, 0.5), [1.5])
    np.testing.assert_array_equal(line.oracle.interp(0, 1, 0.0), [0.0])
    np.testing.assert_array_equal(line.oracle.interp(0, 1, 1.0), [3.0])
    assert from_point_cloud([[0, 0], [3, 4]]).dist[0, 1] == 5.0
    with pytest.raises(ValueError):
        from_point_cloud([[0, 0], [1]])
    with pytest.raises(ValueError):
        line.oracle.interp(0, 1, 1.5)


def test_oracle_constant_speed():
    rng = np.random.default_rng(2)
    sp = from_point_cloud(rng.normal(size=(10, 3)))
    assert validate_metric(sp).ok
    o = sp.oracle
    for i, j in [(0, 1), (2, 7), (4, 9)]:
        for s, t in [(0.0, 0.3), (0.25, 0.75), (0.1, 1.0)]:
            gap = np.linalg.norm(o.interp(i, j, s) - o.interp(i, j, t))
            np.testing.assert_allclose(gap, abs(t - s) * sp.dist[i, j], rtol=1e-12)


def test_raw_matrix_has_no_oracle():
    assert ExtendedMetric([[0, 1], [1, 0]]).oracle is None


def test_block_pairs():
    two = with_blocked_pairs(from_point_cloud([[0.0], [1.0]]), [(0, 1)])
    assert two.dist[0, 1] == INF and two.dist[1, 0] == INF
    assert validate_metric(two).ok


def test_block_equilateral_edge_rejected():
    tri = ExtendedMetric([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    with pytest.raises(MetricError) as err:
        with_blocked_pairs(tri, [(0, 1)])
    assert err.value.triple == (0, 2, 1)


def test_block_all_cross_pairs_accepted():
    sp = from_point_cloud([[0.0], [1.0], [10.0], [11.0]])
    out = with_blocked_pairs(sp, [(i, j) for i in (0, 1) for j in (2, 3)])
    rep = validate_metric(out)
    assert rep.ok
    assert validate_metric(with_blocked_pairs(out, [])).ok  # re-validation is stable


def test_labels_and_json_round_trip():
    d = [[0, 2, "inf"], [2, 0, "inf"], ["inf", "inf", 0]]
    sp = ExtendedMetric.from_json({"dist": d, "labels": ["a", "b", "c"]})
    assert sp.index_of("b") == 1
    assert sp.dist[0, 2] == INF
    assert ExtendedMetric.from_json(sp.to_json()) == sp
    cloud = from_point_cloud([[0.5, 1.0], [2.0, -1.0]], labels=["x", "y"])
    assert ExtendedMetric.from_json(cloud.to_json()) == cloud
    with pytest.raises(KeyError):
        sp.index_of("z")
