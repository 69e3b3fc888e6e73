import pytest

from augtree import fixtures
from augtree.errors import InvariantViolation
from augtree.quotient import build_quotient, degree_profile, has_coincidences, reduce_to_tree
from augtree.tree import Snapshot, build_snapshot


def test_quarter_quotient_merges_14_and_21(quarter_raw6, quarter_q6):
    assert has_coincidences(quarter_raw6)
    labels = [quarter_q6.label(v) for v in quarter_q6.levels[2]]
    assert labels[3] == "{14,21}"
    assert len(labels) == 15
    assert quarter_q6.summary()["level_sizes"] == [1, 4, 15, 56, 209, 780, 2911]


def test_quotient_components(quarter_q6):
    comps = [quarter_q6.component_words(c) for c in quarter_q6.components(2)]
    assert comps == [
        ["11", "12", "13"],
        ["{14,21}", "22", "23"],
        ["24", "31", "32", "33"],
        ["34"],
        ["41", "42", "43"],
        ["44"],
    ]


def test_quotient_is_idempotent_and_rejects_subsamples(quarter_q6, quarter_raw6):
    assert build_quotient(quarter_q6) is quarter_q6
    with pytest.raises(ValueError):
        build_quotient(quarter_raw6.subsample(2))


def test_every_word_is_kept(quarter_raw6, quarter_q6):
    for n in range(quarter_raw6.depth + 1):
        raw = sorted(w for v in quarter_raw6.levels[n] for w in quarter_raw6.vertices[v].words)
        merged = sorted(w for v in quarter_q6.levels[n] for w in quarter_q6.vertices[v].words)
        assert raw == merged
    # merged words really do share one similitude
    for v in quarter_q6.vertices:
        maps = [quarter_q6.spec.word_map(w) for w in v.words]
        assert all(m.equals(maps[0]) for m in maps)


def test_quotient_has_no_residual_coincidence(quarter_q6):
    for ids in quarter_q6.levels:
        keys = [quarter_q6.vertices[v].map.key for v in ids]
        assert len(set(keys)) == len(keys)


def test_reduced_tree(quarter_q6):
    t = reduce_to_tree(quarter_q6)
    assert all(len(p) == 1 for p in t.parents[1:])
    assert sum(len(p) for p in t.parents) == t.n_vertices - 1
    v = t.vertex_of((2, 1, 1))
    # {141,211} keeps its edge to {14,21}
    assert t.label(t.tree_parent[v]) == "{14,21}"
    t.check_invariants()


def test_reduced_tree_detects_bad_parent(quarter_q6):
    parents = list(quarter_q6.parents)
    parents[5] = ()
    broken = Snapshot(quarter_q6.spec, quarter_q6.vertices, quarter_q6.levels, parents, quarter_q6.adj, quotient=True)
    with pytest.raises(InvariantViolation):
        reduce_to_tree(broken)


def test_degree_profiles(quarter_raw6, quarter_q6):
    raw = degree_profile(quarter_raw6)
    q = degree_profile(quarter_q6)
    assert raw.max_degree == (4, 7, 8, 10, 13, 16) and raw.growing
    assert q.max_degree == (4, 7, 7, 7, 7, 7) and not q.growing


def test_no_coincidences_without_overlaps():
    for name in ("touching", "cantor", "dust", "interval"):
        assert not has_coincidences(build_snapshot(fixtures.FIXTURES[name](), 4))
