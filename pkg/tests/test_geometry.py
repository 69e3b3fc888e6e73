from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import fixtures
from augtree.geometry import (
    EdgeDecision,
    Hull,
    cylinder_hull,
    decide_edge,
    dist_bound,
    fixed_point,
    invariant_hull,
)
from augtree.similitude import IFS, Similitude, affine_1d


def test_invariant_hulls(quarter, touching, cantor):
    for spec in (quarter, touching, cantor):
        h = invariant_hull(spec)
        assert (h.lo, h.hi) == ((F(0),), (F(1),))
    # with reflections the hull must still contain its own images
    spec = IFS([affine_1d(F(1, 2), 0, reflect=True), affine_1d(F(1, 2), 1, reflect=True)])
    h = invariant_hull(spec)
    for f in spec.maps:
        assert h.contains(h.image(f))


def test_cylinder_hull_examples(quarter, touching):
    h = cylinder_hull((3,), quarter)
    assert (h.lo[0], h.hi[0]) == (F(7, 16), F(11, 16))
    h = cylinder_hull((2, 2), touching)
    assert (h.lo[0], h.hi[0]) == (F(70, 81), F(71, 81))
    assert cylinder_hull((), quarter) == invariant_hull(quarter)


def test_fixed_point():
    assert fixed_point(affine_1d(F(1, 4), F(3, 4))) == F(1)
    assert fixed_point(affine_1d(F(1, 3), F(2, 3))) == F(1)


def test_dist_bound_examples(quarter, touching):
    b = dist_bound((3,), (4,), 0, quarter)
    assert (b.lo, b.hi, b.witness) == (F(1, 16), F(9, 16), F(1, 16))
    b = dist_bound((1, 1), (1, 2), 3, touching)
    assert b.lo == F(4, 27) and b.witness == F(4, 27) and b.conclusive
    assert dist_bound((1,), (1,), 4, touching).hi == 0


def test_decide_edge_examples(touching, quarter):
    assert decide_edge((1, 1), (1, 2), 1, touching) is EdgeDecision.NO_EDGE
    assert decide_edge((1, 1), (1, 2), 1, touching, mode="certified") is EdgeDecision.NO_EDGE
    # touching pieces 2 and 3 share the point 8/9
    assert decide_edge((2,), (3,), 1, touching) is EdgeDecision.EDGE
    assert decide_edge((2,), (3,), 1, touching, mode="certified") is EdgeDecision.EDGE
    assert decide_edge((1,), (2,), 1, quarter, mode="certified") is EdgeDecision.EDGE
    with pytest.raises(ValueError):
        decide_edge((1,), (2,), 1, quarter, mode="bogus")


def test_kappa_widens_edges(cantor):
    # Cantor pieces are 1/3 apart; kappa = 1 at level 1 allows gaps of 1/3
    assert decide_edge((1,), (2,), 1, cantor) is EdgeDecision.NO_EDGE
    assert decide_edge((1,), (2,), 1, cantor, kappa=1) is EdgeDecision.EDGE


def test_refinement_is_monotone(touching):
    prev = None
    for m in range(5):
        b = dist_bound((1, 3), (2,), m, touching)
        if prev is not None:
            assert b.lo >= prev.lo and b.hi <= prev.hi and b.witness <= prev.witness
        assert b.lo <= b.witness <= b.hi
        prev = b


_touching = fixtures.touching_triple()
_level3 = _touching.levels(3)[0]
_words = [w for lw in _level3 for w in lw]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(_words), st.sampled_from(_words))
def test_dist_bound_symmetric_and_consistent(x, y):
    a = dist_bound(x, y, 2, _touching)
    b = dist_bound(y, x, 2, _touching)
    assert (a.lo, a.hi, a.witness) == (b.lo, b.hi, b.witness)
    assert a.lo <= a.hi
    deep = dist_bound(x, y, 6, _touching)
    # the true distance lies in every bracket, so brackets must overlap
    assert deep.lo <= a.hi and a.lo <= deep.hi


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(_words), st.sampled_from(_words))
def test_disjoint_hulls_give_exact_distance(x, y):
    """In 1D, hull endpoints belong to the attractor, so disjoint hulls are at the true distance."""
    hx, hy = cylinder_hull(x, _touching), cylinder_hull(y, _touching)
    d = hx.distance(hy)
    if d > 0:
        deep = dist_bound(x, y, 8, _touching)
        assert deep.lo == d
        assert deep.witness == d


def test_two_dimensional_hull_is_a_ball():
    spec = IFS(
        [
            Similitude(F(1, 2), None, (0.0, 0.0)),
            Similitude(F(1, 2), None, (0.5, 0.0)),
            Similitude(F(1, 2), None, (0.0, 0.5)),
        ]
    )
    h = invariant_hull(spec)
    assert isinstance(h, Hull) and h.radius is not None
    for f in spec.maps:
        assert h.contains(h.image(f))
    b = dist_bound((2,), (3,), 2, spec)
    assert 0 <= b.lo <= b.hi
