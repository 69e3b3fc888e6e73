import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import fixtures
from augtree.errors import CapExceeded, InvariantViolation
from augtree.geometry import EdgeDecision, decide_edge, invariant_hull
from augtree.tree import (
    Snapshot,
    build_snapshot,
    components_at,
    offspring_components,
    to_dot,
)


def test_quarter_raw_counts(quarter_raw6):
    s = quarter_raw6.summary()
    assert s["level_sizes"] == [1, 4, 16, 64, 256, 1024, 4096]
    assert s["horizontal_edges"][:4] == [0, 2, 11, 55]
    assert s["components"][:4] == [1, 2, 6, 21]


def test_touching_counts():
    s = build_snapshot(fixtures.touching_triple(), 4).summary()
    assert s["level_sizes"] == [1, 5, 21, 85, 341]
    assert s["components"] == [1, 3, 11, 43, 171]


def test_level_one_components(quarter_raw6):
    words = [quarter_raw6.component_words(c) for c in components_at(quarter_raw6, 1)]
    assert words == [["1", "2", "3"], ["4"]]
    with pytest.raises(ValueError):
        components_at(quarter_raw6, 7)


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_edges_match_pairwise_oracle(name):
    """The sweep must find exactly the pairs an all-pairs decide_edge finds."""
    spec = fixtures.FIXTURES[name]()
    snap = build_snapshot(spec, 3)
    hull = invariant_hull(spec)
    for n, ids in enumerate(snap.levels):
        found = set(snap.horizontal_edges(n))
        expected = set()
        for a, b in itertools.combinations(ids, 2):
            wa, wb = snap.vertices[a].canonical, snap.vertices[b].canonical
            if decide_edge(wa, wb, n, spec, hull=hull) is EdgeDecision.EDGE:
                expected.add((a, b))
        assert found == expected


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_invariants_hold(name):
    snap = build_snapshot(fixtures.FIXTURES[name](), 4)
    snap.check_invariants()
    for n in range(snap.depth):
        children = [c for comp in snap.components(n) for c in offspring_components(snap, comp)]
        # offspring of the components partition the next level
        assert sorted(v for c in children for v in c.vertices) == snap.levels[n + 1]


@pytest.mark.parametrize("name", ["touching", "dust", "cantor", "quarter"])
def test_certified_mode_agrees_with_hull_mode(name):
    spec = fixtures.FIXTURES[name]()
    assert build_snapshot(spec, 4, mode="certified").adj == build_snapshot(spec, 4).adj


def test_check_invariants_catches_asymmetry(cantor):
    snap = build_snapshot(cantor, 2)
    adj = list(snap.adj)
    adj[1] = (2,)
    broken = Snapshot(cantor, snap.vertices, snap.levels, snap.parents, adj)
    with pytest.raises(InvariantViolation):
        broken.check_invariants()


def test_cap_and_argument_errors(quarter):
    with pytest.raises(CapExceeded):
        build_snapshot(quarter, 6, cap=1000)
    with pytest.raises(ValueError):
        build_snapshot(quarter, -1)
    with pytest.raises(ValueError):
        build_snapshot(quarter, 2, mode="bogus")


def test_cap_from_environment(quarter, monkeypatch):
    monkeypatch.setenv("AUGTREE_MAX_VERTICES", "50")
    with pytest.raises(CapExceeded):
        build_snapshot(quarter, 3)


def test_vertex_lookup_and_ancestors(quarter_raw6):
    v = quarter_raw6.vertex_of((2, 3, 1))
    assert quarter_raw6.label(v) == "231"
    assert quarter_raw6.label(quarter_raw6.ancestor(v, 1)) == "2"
    assert quarter_raw6.label(0) == "ϑ"
    with pytest.raises(KeyError):
        quarter_raw6.vertex_of((5,))


_snap = build_snapshot(fixtures.touching_triple(), 5)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, _snap.n_vertices - 1))
def test_tree_parent_is_a_prefix(v):
    p = _snap.tree_parent[v]
    if p is None:
        assert v == 0
        return
    w, pw = _snap.vertices[v].canonical, _snap.vertices[p].canonical
    assert w[: len(pw)] == pw and _snap.vertices[p].level == _snap.vertices[v].level - 1


def test_subsample_levels(touching6):
    sub = touching6.subsample(2)
    assert sub.depth == 3 and sub.step == 2
    assert sub.level_ratio == F(1, 81)
    assert [len(ids) for ids in sub.levels] == [len(touching6.levels[n]) for n in (0, 2, 4, 6)]
    for v in range(1, sub.n_vertices):
        p = sub.tree_parent[v]
        w, pw = sub.vertices[v].canonical, sub.vertices[p].canonical
        assert w[: len(pw)] == pw
    assert touching6.subsample(1) is touching6
    with pytest.raises(ValueError):
        touching6.subsample(0)


def test_dot_output(cantor):
    dot = to_dot(build_snapshot(cantor, 1))
    assert dot.startswith("graph augtree {")
    assert 'v0 [label="ϑ"];' in dot and "v0 -- v1;" in dot and "v0 -- v2;" in dot
    assert to_dot(build_snapshot(cantor, 1)) == dot
