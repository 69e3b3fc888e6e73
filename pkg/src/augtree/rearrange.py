"""(B, u)-rearrangeability of an incidence matrix A, with checkable certificates."""

from __future__ import annotations

from dataclasses import dataclass, field

from .classification import necessary_identity
from .errors import DimensionMismatch, InvariantViolation, SpecError

DEFAULT_K_MAX = 6


def _check_dims(A, B, u) -> None:
    m, n = len(A), len(B)
    if any(len(r) != m for r in A):
        raise DimensionMismatch("A must be square")
    if any(len(r) != n for r in B):
        raise DimensionMismatch("B must be square")
    if len(u) != m or any(len(r) != n for r in u):
        raise DimensionMismatch(f"u must have {m} blocks of length {n}")
    for M in (A, B, u):
        for row in M:
            for v in row:
                if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                    raise SpecError(f"matrix entries must be nonnegative integers, got {v!r}")


def matmul(X, Y):
    return tuple(
        tuple(sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0])))
        for i in range(len(X))
    )


def matpow(M, k: int):
    n = len(M)
    out = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    for _ in range(k):
        out = matmul(out, M)
    return out


def necessary_check(A, B, u) -> bool:
    """A u^t = u^t B exactly."""
    _check_dims(A, B, u)
    return necessary_identity(A, B, u)


@dataclass(frozen=True)
class RearrangingMatrix:
    row: int  # 0-based row of A (or A^k)
    C: tuple
    power: int = 1

    def to_json(self) -> dict:
        return {"row": self.row + 1, "power": self.power, "C": [list(r) for r in self.C]}


def validate_certificate(C, i: int, A, B, u) -> bool:
    """Column sums of C equal a_i and {c_s u^t} equals {b_j with multiplicity u_ij}."""
    m, n = len(A), len(B)
    p = sum(u[i])
    if len(C) != p:
        return False
    for row in C:
        if len(row) != m or any((not isinstance(v, int)) or v < 0 for v in row):
            return False
    if [sum(C[s][j] for s in range(p)) for j in range(m)] != list(A[i]):
        return False
    got = sorted(tuple(sum(row[j] * u[j][t] for j in range(m)) for t in range(n)) for row in C)
    want = sorted(tuple(B[j]) for j in range(n) for _ in range(u[i][j]))
    return got == want


class _RowSearch:
    def __init__(self, a, targets, u):
        self.a = tuple(a)
        self.targets = targets
        self.u = u
        self.m = len(a)
        self.n = len(u[0]) if u else 0
        self.failed: set = set()
        # suffix sums of targets, for the budget balance prune
        self.rest = [tuple(0 for _ in range(self.n))] * (len(targets) + 1)
        for s in range(len(targets) - 1, -1, -1):
            self.rest[s] = tuple(x + y for x, y in zip(targets[s], self.rest[s + 1]))

    def slot_solutions(self, target, budget):
        """Nonnegative c <= budget with sum_j c_j u_j == target, ascending lexicographic."""
        m, u = self.m, self.u
        c = [0] * m

        def rec(j, remaining):
            if j == m:
                if not any(remaining):
                    yield tuple(c)
                return
            uj = u[j]
            cap = budget[j]
            for t, w in enumerate(uj):
                if w:
                    cap = min(cap, remaining[t] // w)
            if not any(uj):
                cap = 0
            for v in range(cap + 1):
                c[j] = v
                yield from rec(j + 1, tuple(r - v * w for r, w in zip(remaining, uj)))
            c[j] = 0

        yield from rec(0, tuple(target))

    def balanced(self, s, budget) -> bool:
        load = tuple(sum(budget[j] * self.u[j][t] for j in range(self.m)) for t in range(self.n))
        return load == self.rest[s]

    def solve(self):
        out = []

        def rec(s, budget, prev):
            if s == len(self.targets):
                return not any(budget)
            same = s > 0 and self.targets[s] == self.targets[s - 1]
            memo = (s, budget, prev if same else None)
            if memo in self.failed or not self.balanced(s, budget):
                return False
            for c in self.slot_solutions(self.targets[s], budget):
                if same and c < prev:
                    continue
                out.append(c)
                if rec(s + 1, tuple(b - x for b, x in zip(budget, c)), c):
                    return True
                out.pop()
            self.failed.add(memo)
            return False

        return tuple(out) if rec(0, self.a, None) else None


def solve_row(a_i, i: int, B, u):
    """Exact backtracking for one row; None after an exhaustive search finds nothing."""
    n = len(B)
    targets = sorted((tuple(B[j]) for j in range(n) for _ in range(u[i][j])), reverse=True)
    C = _RowSearch(a_i, targets, u).solve()
    if C is None:
        return None
    return RearrangingMatrix(i, C)


@dataclass(frozen=True)
class RearrangeabilityVerdict:
    answer: str  # "Yes" | "YesAtPower" | "No"
    power: int | None
    certificates: tuple = ()
    failed_row: int | None = None
    k_max: int = DEFAULT_K_MAX
    notes: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.answer != "No"

    def to_json(self) -> dict:
        d = {"answer": self.answer, "power": self.power, "k_max": self.k_max}
        if self.ok:
            d["certificates"] = [c.to_json() for c in self.certificates]
        else:
            d["failed_row"] = None if self.failed_row is None else self.failed_row + 1
            d["meaning"] = f"no certificate found for any power up to {self.k_max}; not a proof of impossibility"
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def is_rearrangeable(A, B, u, k_max: int = DEFAULT_K_MAX) -> RearrangeabilityVerdict:
    """Try A, then A^k against B^k for k up to k_max; first success wins."""
    _check_dims(A, B, u)
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    A = tuple(map(tuple, A))
    B = tuple(map(tuple, B))
    u = tuple(map(tuple, u))
    first_fail = None
    for k in range(1, k_max + 1):
        Ak, Bk = matpow(A, k), matpow(B, k)
        certs = []
        failed = None
        if not necessary_identity(Ak, Bk, u):
            failed = _first_identity_row(Ak, Bk, u)
        else:
            for i in range(len(A)):
                cert = solve_row(Ak[i], i, Bk, u)
                if cert is None:
                    failed = i
                    break
                if not validate_certificate(cert.C, i, Ak, Bk, u):
                    raise InvariantViolation("solver produced an invalid certificate")
                certs.append(RearrangingMatrix(i, cert.C, k))
        if failed is None:
            if not necessary_identity(Ak, Bk, u):
                raise InvariantViolation("certificates found although A u^t != u^t B")
            return RearrangeabilityVerdict("Yes" if k == 1 else "YesAtPower", k, tuple(certs), k_max=k_max)
        if first_fail is None:
            first_fail = failed
    return RearrangeabilityVerdict("No", None, (), first_fail, k_max)


def _first_identity_row(A, B, u) -> int:
    m, n = len(A), len(B)
    for i in range(m):
        lhs = [sum(A[i][k] * u[k][j] for k in range(m)) for j in range(n)]
        rhs = [sum(u[i][k] * B[k][j] for k in range(n)) for j in range(n)]
        if lhs != rhs:
            return i
    return 0


def lift_certificate(cert: RearrangingMatrix, A) -> RearrangingMatrix:
    """C -> C A: a certificate for the same row of A^(k+1) against B^(k+1)."""
    return RearrangingMatrix(cert.row, matmul(cert.C, A), cert.power + 1)


def wlog_power(table, k_max: int = DEFAULT_K_MAX) -> int:
    """Least k with max #T_i <= min row sum of B^k for a simple class table."""
    if not table.simple:
        raise ValueError("wlog_power needs a simple class table")
    return wlog_power_for(table.representative_sizes(), table.B, k_max)


def wlog_power_for(sizes, B, k_max: int = DEFAULT_K_MAX) -> int:
    """Least k <= k_max with max component size <= min row sum of B^k."""
    need = max(sizes)
    for k in range(1, k_max + 1):
        if min(sum(r) for r in matpow(B, k)) >= need:
            return k
    raise ValueError(f"no power up to {k_max} satisfies max size {need} <= min row sum of B^k")


def load_matrices(data: dict):
    """Read ``{"A": ..., "B": ..., "u": ...}`` as integer tuples."""
    try:
        A, B, u = data["A"], data["B"], data["u"]
    except (KeyError, TypeError):
        raise SpecError("matrix file needs keys 'A', 'B' and 'u'") from None
    A, B, u = (tuple(tuple(r) for r in M) for M in (A, B, u))
    _check_dims(A, B, u)
    return A, B, u
