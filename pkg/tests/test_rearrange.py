import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augtree import fixtures
from augtree.errors import DimensionMismatch, SpecError
from augtree.rearrange import (
    is_rearrangeable,
    lift_certificate,
    load_matrices,
    matmul,
    matpow,
    necessary_check,
    solve_row,
    validate_certificate,
    wlog_power,
    wlog_power_for,
)

Q = fixtures.REARRANGE_QUARTER
T = fixtures.REARRANGE_TOUCHING


def _oracle_valid(C, i, A, B, u):
    """Plain restatement of the certificate conditions, written independently of the library."""
    m, n = len(A), len(B)
    if len(C) != sum(u[i]):
        return False
    if any(len(r) != m or min(r) < 0 for r in C):
        return False
    if [sum(r[j] for r in C) for j in range(m)] != list(A[i]):
        return False
    produced = [tuple(sum(r[k] * u[k][t] for k in range(m)) for t in range(n)) for r in C]
    needed = [tuple(B[j]) for j in range(n) for _ in range(u[i][j])]
    for b in needed:
        if b not in produced:
            return False
        produced.remove(b)
    return not produced


def _brute_force_row(a_i, i, B, u):
    m = len(a_i)
    p = sum(u[i])
    if p == 0:
        return sum(a_i) == 0
    # every way to split each column total among the p rows
    splits = []
    for total in a_i:
        splits.append([c for c in itertools.product(range(total + 1), repeat=p) if sum(c) == total])
    for choice in itertools.product(*splits):
        C = [[choice[j][s] for j in range(m)] for s in range(p)]
        if _oracle_valid(C, i, [a_i] * m, B, u):
            return True
    return False


@pytest.mark.parametrize("data", [Q, T])
def test_printed_certificates_validate(data):
    A, B, u = data["A"], data["B"], data["u"]
    for i, C in enumerate(data["C"]):
        assert validate_certificate(C, i, A, B, u)
        assert _oracle_valid(C, i, A, B, u)


def test_squared_certificates_validate():
    A2, B2 = matpow(Q["A"], 2), matpow(Q["B"], 2)
    assert A2 == ((2, 3, 1), (4, 7, 4), (5, 9, 6))
    for i, C in enumerate(Q["C_squared"]):
        assert validate_certificate(C, i, A2, B2, Q["u"])


@pytest.mark.parametrize("data", [Q, T])
def test_solver_says_yes_at_power_one(data):
    v = is_rearrangeable(data["A"], data["B"], data["u"])
    assert v.answer == "Yes" and v.power == 1
    for cert in v.certificates:
        assert _oracle_valid(cert.C, cert.row, data["A"], data["B"], data["u"])
    assert v.to_json()["certificates"][0]["row"] == 1


def test_lift_by_A():
    A, B, u = Q["A"], Q["B"], Q["u"]
    A2, B2 = matpow(A, 2), matpow(B, 2)
    for cert in is_rearrangeable(A, B, u).certificates:
        lifted = lift_certificate(cert, A)
        assert lifted.power == 2
        assert validate_certificate(lifted.C, lifted.row, A2, B2, u)


def test_one_by_one_cases():
    assert is_rearrangeable([[2]], [[2]], [[1]]).certificates[0].C == ((2,),)
    no = is_rearrangeable([[3]], [[2]], [[1]], k_max=3)
    assert no.answer == "No" and not no.ok
    assert "not a proof" in no.to_json()["meaning"]


def test_identity_checks():
    assert necessary_check(Q["A"], Q["B"], Q["u"])
    assert necessary_check(T["A"], T["B"], T["u"])
    bad = [list(r) for r in Q["A"]]
    bad[0][0] += 1
    assert not necessary_check(bad, Q["B"], Q["u"])


def test_input_validation():
    with pytest.raises(DimensionMismatch):
        is_rearrangeable([[1, 0]], [[1]], [[1]])
    with pytest.raises(DimensionMismatch):
        is_rearrangeable([[1]], [[1]], [[1, 0]])
    with pytest.raises(SpecError):
        is_rearrangeable([[-1]], [[1]], [[1]])
    with pytest.raises(SpecError):
        load_matrices({"A": [[1]]})
    assert load_matrices({"A": [[2]], "B": [[2]], "u": [[1]]}) == (((2,),), ((2,),), ((1,),))


def test_wlog_power(quarter_table, touching_table):
    assert wlog_power(quarter_table) == 2
    assert wlog_power(touching_table) == 1
    with pytest.raises(ValueError):
        wlog_power_for([10], [[1]], 3)


def test_matmul():
    assert matmul(((1, 2),), ((3,), (4,))) == ((11,),)


def _valid_certificates():
    out = []
    for data in (Q, T):
        for i, C in enumerate(data["C"]):
            out.append((C, i, data["A"], data["B"], data["u"]))
    A2, B2 = matpow(Q["A"], 2), matpow(Q["B"], 2)
    for i, C in enumerate(Q["C_squared"]):
        out.append((C, i, A2, B2, Q["u"]))
    return out


VALID = _valid_certificates()


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_single_entry_mutations_are_rejected(data):
    C, i, A, B, u = data.draw(st.sampled_from(VALID))
    s = data.draw(st.integers(0, len(C) - 1))
    j = data.draw(st.integers(0, len(C[0]) - 1))
    delta = data.draw(st.sampled_from([-1, 1]))
    mutated = [list(r) for r in C]
    mutated[s][j] += delta
    assert not validate_certificate(mutated, i, A, B, u)


small = st.integers(0, 3)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(small, min_size=2, max_size=2),
    st.lists(st.lists(small, min_size=2, max_size=2), min_size=2, max_size=2),
    st.lists(st.lists(st.integers(0, 2), min_size=2, max_size=2), min_size=2, max_size=2),
)
def test_row_solver_matches_brute_force(a_i, B, u):
    found = solve_row(a_i, 0, B, u)
    if found is not None:
        assert _oracle_valid(found.C, 0, [a_i, a_i], B, u)
    assert (found is not None) == _brute_force_row(a_i, 0, B, u)
