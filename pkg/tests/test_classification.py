from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import fixtures
from augtree.classification import (
    classify,
    class_profile,
    conjugacy_equivalent,
    necessary_identity,
    tree_isomorphism_by_B,
    verify_certificate,
)
from augtree.quotient import build_quotient
from augtree.report import dumps
from augtree.tree import build_snapshot, offspring_components


def test_quarter_table(quarter_table, quarter_q6):
    t = quarter_table
    assert t.simple and (t.m, t.n) == (3, 2)
    assert t.A == ((1, 1, 0), (1, 2, 1), (1, 2, 2))
    assert t.B == ((3, 1), (2, 1))
    assert t.u == ((1, 0), (2, 1), (3, 1))
    reps = [quarter_q6.component_words(c) for c in t.component_reps]
    assert reps == [["ϑ"], ["1", "2", "3"], ["24", "31", "32", "33"]]
    assert t.representative_sizes() == [1, 3, 4]


def test_touching_table(touching_table):
    t = touching_table
    assert t.simple
    assert t.A == (
        (1, 1, 1, 0, 0),
        (1, 1, 2, 1, 0),
        (1, 0, 1, 0, 1),
        (1, 1, 3, 2, 0),
        (1, 1, 1, 0, 2),
    )
    assert t.B == ((3, 2), (1, 2))
    assert t.u == ((1, 0), (2, 0), (0, 2), (3, 0), (1, 2))


def test_k15_8_and_k2_tables(k2_q6):
    t = classify(build_quotient(build_snapshot(fixtures.k_lambda(F(15, 8)), 6)))
    assert t.simple and t.A == ((2, 1), (3, 2)) and t.B == ((3, 1), (2, 1)) and t.u == ((1, 0), (1, 1))
    t2 = classify(k2_q6)
    assert t2.simple and t2.B == ((3, 1), (2, 1)) and t2.m == 5
    assert t2.A == ((0, 1, 1, 0, 0), (0, 1, 1, 1, 0), (0, 1, 1, 0, 1), (0, 1, 1, 1, 1), (0, 1, 1, 1, 2))
    assert necessary_identity(t2.A, t2.B, t2.u)


def test_small_systems():
    c = classify(build_snapshot(fixtures.cantor(), 6))
    assert (c.A, c.B, c.u) == (((2,),), ((2,),), ((1,),))
    d = classify(build_snapshot(fixtures.dust_triple(), 6))
    assert d.A == ((3, 2), (1, 2)) and d.B == ((3, 2), (1, 2))


def test_interval_never_stabilises():
    t = classify(build_snapshot(fixtures.unit_interval(), 8))
    assert t.status == "NotStabilized" and t.notes


def test_depth_must_exceed_window(cantor):
    with pytest.raises(ValueError):
        classify(build_snapshot(cantor, 4))


def test_certificate_quarter_to_root_scaling(quarter_q6):
    src = quarter_q6.components(1)[0]
    dst = quarter_q6.components(2)[0]
    cert = conjugacy_equivalent(quarter_q6, src, dst)
    assert cert is not None
    assert cert.conjugator.ratio == F(1, 4) and cert.conjugator.translation == (F(0),)
    assert cert.to_json(quarter_q6)["pairs"] == [["1", "11"], ["2", "12"], ["3", "13"]]
    # sizes differ, so {24,31,32,33} cannot match {11,12,13}
    assert conjugacy_equivalent(quarter_q6, dst, quarter_q6.components(2)[2]) is None


def test_all_stored_certificates_verify(quarter_table, touching_table):
    for t in (quarter_table, touching_table):
        snap = t.snapshot
        assert t.certificates
        for cid, cert in t.certificates.items():
            assert cert.source.id == cid
            assert verify_certificate(snap, cert, t.vertex_class)
            assert t.component_class[cid] == t.component_class[cert.target.id]


def test_tampered_certificate_is_rejected(quarter_table):
    snap = quarter_table.snapshot
    cert = next(c for c in quarter_table.certificates.values() if len(c.pairs) >= 3)
    (a, x), (b, y) = cert.pairs[0], cert.pairs[1]
    swapped = type(cert)(cert.source, cert.target, ((a, y), (b, x)) + cert.pairs[2:], cert.conjugator)
    assert not verify_certificate(snap, swapped)


def test_identity_on_simple_tables(quarter_table, touching_table):
    for t in (quarter_table, touching_table):
        assert necessary_identity(t.A, t.B, t.u)


def test_classification_is_deterministic(quarter):
    a = classify(build_quotient(build_snapshot(quarter, 6)))
    b = classify(build_quotient(build_snapshot(quarter, 6)))
    assert dumps(a.to_json()) == dumps(b.to_json())


def test_tree_isomorphism_from_shared_B(quarter_table, k2_q6, touching_table):
    plan = tree_isomorphism_by_B(quarter_table, classify(k2_q6), 4)
    assert plan is not None and plan.pairs[0] == ("ϑ", "ϑ")
    assert len(plan.pairs) == sum(len(quarter_table.snapshot.levels[n]) for n in range(5))
    assert tree_isomorphism_by_B(quarter_table, touching_table) is None


def test_class_profile_counts_every_component(quarter_table):
    prof = class_profile(quarter_table)["components_per_class"]
    snap = quarter_table.snapshot
    assert [sum(row) for row in prof] == [len(snap.components(n)) for n in range(snap.depth + 1)]


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_offspring_counts_follow_A(quarter_table, data):
    """Each non-final component has the offspring row of its class."""
    t = quarter_table
    snap = t.snapshot
    n = data.draw(st.integers(0, snap.depth - 1))
    comp = data.draw(st.sampled_from(snap.components(n)))
    row = [0] * t.m
    for child in offspring_components(snap, comp):
        row[t.component_class[child.id]] += 1
    assert tuple(row) == t.A[t.component_class[comp.id]]
