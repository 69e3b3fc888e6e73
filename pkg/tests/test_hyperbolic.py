from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import shortest_path

from augtree import fixtures
from augtree.classification import classify
from augtree.hyperbolic import (
    adjacency_matrix,
    build_near_isometry,
    canonical_geodesic,
    check_gromov_identity,
    delta_observed,
    distance_matrix,
    graph_distance,
    gromov_product,
    horizontal_geodesic_bound,
    level_prefix,
    tree_distance_matrix,
    verify_near_isometry,
    visual_metric,
)
from augtree.rearrange import is_rearrangeable
from augtree.tree import build_snapshot


def _near_isometry(table):
    verdict = is_rearrangeable(table.A, table.B, table.u, k_max=1)
    return build_near_isometry(table, verdict.certificates)


def test_gromov_identity(quarter_q6, touching6):
    for snap in (quarter_q6, touching6):
        check = check_gromov_identity(snap, 5)
        assert check.ok and check.mismatches == 0 and check.witness is None
        assert check.pairs == level_prefix(snap, 5) ** 2


_snap = build_snapshot(fixtures.touching_triple(), 4)
_N = _snap.n_vertices


@settings(max_examples=80, deadline=None)
@given(st.integers(0, _N - 1), st.integers(0, _N - 1))
def test_canonical_geodesic_is_a_shortest_path(x, y):
    g = canonical_geodesic(_snap, x, y)
    path = g.path()
    assert path[0] == x and path[-1] == y
    assert len(path) - 1 == g.d == graph_distance(_snap, x, y)
    for a, b in zip(path, path[1:]):
        assert b in _snap.adj[a] or _snap.tree_parent[a] == b or _snap.tree_parent[b] == a
    assert g.gromov == gromov_product(_snap, x, y)
    # horizontal segment sits on level l
    assert all(_snap.vertices[v].level == g.l for v in g.horizontal)


def test_degenerate_geodesics(touching6):
    g = canonical_geodesic(touching6, 7, 7)
    assert g.d == 0 and g.h == 0
    root = canonical_geodesic(touching6, 0, 30)
    assert root.l == 0 and root.d == touching6.vertices[30].level


def test_horizontal_constants(quarter_q6, touching6):
    assert horizontal_geodesic_bound(quarter_q6, 5).c_obs == 3
    assert horizontal_geodesic_bound(touching6, 5).c_obs == 2
    assert "empirical" in horizontal_geodesic_bound(touching6, 3).to_json()["label"]


def test_delta_observed(quarter_q6):
    assert delta_observed(quarter_q6, 4) == F(1, 2)


def test_visual_metric(touching6):
    assert visual_metric(touching6, 5, 5, 1.0) == 0.0
    a, b = visual_metric(touching6, 5, 9, 0.7), visual_metric(touching6, 9, 5, 0.7)
    assert a == b and 0 < a <= 1
    with pytest.raises(ValueError):
        visual_metric(touching6, 1, 2, 0)


def test_tree_distances_match_graph_without_horizontal_edges(quarter_q6):
    N = level_prefix(quarter_q6, 4)
    oracle = shortest_path(adjacency_matrix(quarter_q6, 4, horizontal=False), unweighted=True, directed=False)
    got = tree_distance_matrix(quarter_q6, np.arange(N), 4)
    assert np.array_equal(got, oracle.astype(np.int64))


def test_near_isometry_quarter(quarter_table):
    nim = _near_isometry(quarter_table)
    rep = verify_near_isometry(nim, 5)
    assert rep.exhaustive and rep.ok
    assert rep.c_obs == 3 and rep.max_deviation == 2 and rep.bound == 5
    assert nim.sigma[0] == 0


def test_near_isometry_touching(touching_table):
    rep = verify_near_isometry(_near_isometry(touching_table), 5)
    assert rep.ok and rep.c_obs == 2 and rep.max_deviation == 2


def test_near_isometry_is_level_preserving_bijection(quarter_table):
    nim = _near_isometry(quarter_table)
    snap = nim.snapshot
    for ids in snap.levels:
        assert sorted(nim.sigma[v] for v in ids) == ids


def test_near_isometry_on_subsample(quarter_q6):
    sub = classify(quarter_q6.subsample(2), window=1)
    assert sub.simple
    rep = verify_near_isometry(_near_isometry(sub), 3)
    assert rep.ok


def test_near_isometry_argument_checks(quarter_table):
    v = is_rearrangeable(quarter_table.A, quarter_table.B, quarter_table.u)
    with pytest.raises(ValueError):
        build_near_isometry(quarter_table, v.certificates[:1])
    bad = classify(build_snapshot(fixtures.unit_interval(), 8))
    with pytest.raises(ValueError):
        build_near_isometry(bad, ())


def test_distance_matrix_is_symmetric(touching6):
    d = distance_matrix(touching6, 3)
    assert np.array_equal(d, d.T) and (np.diag(d) == 0).all()
