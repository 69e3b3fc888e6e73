"""Dimension from a spectral radius, total-disconnectedness profiles, and Lipschitz-equivalence reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .classification import ClassTable, classify, tree_isomorphism_by_B
from .errors import DimensionMismatch, SpecError
from .quotient import build_quotient, has_coincidences
from .rearrange import DEFAULT_K_MAX, is_rearrangeable
from .similitude import IFS, format_rational, ratio_multiset
from .tree import Snapshot, build_snapshot

BRACKET_WIDTH = 1e-12
MAX_ITER = 100_000


def _check_matrix(M):
    M = tuple(tuple(r) for r in M)
    n = len(M)
    if n == 0 or any(len(r) != n for r in M):
        raise DimensionMismatch("matrix must be square and nonempty")
    for r in M:
        for v in r:
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise SpecError(f"matrix entries must be nonnegative integers, got {v!r}")
    return M


@dataclass(frozen=True)
class SpectralRadius:
    value: float
    lo: Fraction
    hi: Fraction
    iterations: int

    @property
    def error(self) -> float:
        return float(self.hi - self.lo) / 2

    def __iter__(self):
        yield self.value
        yield self.error

    def to_json(self) -> dict:
        return {"value": self.value, "lo": float(self.lo), "hi": float(self.hi), "error": self.error}


def _collatz_wielandt(M, x) -> tuple:
    """Exact min/max of (Mx)_i / x_i over a positive rational vector x."""
    lo = hi = None
    for i, row in enumerate(M):
        mx = sum(a * xj for a, xj in zip(row, x))
        q = mx / x[i]
        lo = q if lo is None or q < lo else lo
        hi = q if hi is None or q > hi else hi
    return lo, hi


def _irreducible_radius(M, tol: float, max_iter: int) -> tuple:
    """Bracket for an irreducible block, where M + I is primitive and the Perron vector positive."""
    n = len(M)
    row_sums = [sum(r) for r in M]
    P = np.array(M, dtype=np.float64) + np.eye(n)
    x = np.ones(n)
    lo, hi = Fraction(min(row_sums)), Fraction(max(row_sums))
    it = 0
    for it in range(1, max_iter + 1):
        y = P @ x
        y /= y.max()
        done = np.allclose(y, x, rtol=0, atol=1e-16)
        x = y
        if done or it % 50 == 0:
            if (x > 0).all():
                q = [Fraction(float(v)) for v in x]
                a, b = _collatz_wielandt(M, q)
                lo, hi = max(lo, a), min(hi, b)
            if float(hi - lo) < tol or done:
                break
    return lo, hi, it


def spectral_radius(M, tol: float = BRACKET_WIDTH, max_iter: int = MAX_ITER) -> SpectralRadius:
    """Perron root, certified by rational Collatz-Wielandt brackets.

    The matrix is split into strongly connected blocks; each irreducible block
    gets power iteration on M + I, and the radius is the largest block radius.
    """
    M = _check_matrix(M)
    n = len(M)
    _, labels = connected_components(csr_matrix(np.array(M) > 0), directed=True, connection="strong")
    lo = hi = Fraction(0)
    iterations = 0
    for block in sorted(set(labels.tolist())):
        idx = [i for i in range(n) if labels[i] == block]
        sub = tuple(tuple(M[i][j] for j in idx) for i in idx)
        if len(idx) == 1 and sub[0][0] == 0:
            continue
        a, b, it = _irreducible_radius(sub, tol, max_iter)
        lo, hi = max(lo, a), max(hi, b)
        iterations += it
    return SpectralRadius(float((lo + hi) / 2), lo, hi, iterations)


@dataclass(frozen=True)
class DimensionResult:
    matrix: tuple
    rho: SpectralRadius
    r: Fraction
    dimension: float
    lo: float
    hi: float
    degenerate: bool

    @property
    def error(self) -> float:
        return (self.hi - self.lo) / 2

    def to_json(self) -> dict:
        return {
            "matrix": [list(row) for row in self.matrix],
            "spectral_radius": self.rho.to_json(),
            "r": format_rational(self.r),
            "dimension": self.dimension,
            "bracket": [self.lo, self.hi],
            "degenerate": self.degenerate,
        }


def hausdorff_dimension(M, r) -> DimensionResult:
    """ln ρ / (−ln r) with the spectral bracket pushed through."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise SpecError("r must lie in (0, 1)")
    M = _check_matrix(M)
    rho = spectral_radius(M)
    scale = -math.log(r)
    degenerate = rho.hi < 1
    if rho.value <= 0:
        return DimensionResult(M, rho, r, float("-inf"), float("-inf"), float("-inf"), True)
    lo = math.log(float(rho.lo)) / scale if rho.lo > 0 else float("-inf")
    hi = math.log(float(rho.hi)) / scale
    return DimensionResult(M, rho, r, math.log(rho.value) / scale, lo, hi, degenerate)


# -- total disconnectedness ------------------------------------------------------

@dataclass(frozen=True)
class DisconnectednessReport:
    sizes: tuple  # max component size per level
    verdict: str  # "BoundedObserved" | "GrowthObserved"
    bound: int | None
    note: str

    def to_json(self) -> dict:
        return {
            "max_component_size": list(self.sizes),
            "verdict": self.verdict,
            "bound": self.bound,
            "note": self.note,
            "label": "finite-depth heuristic",
        }


def disconnectedness_profile(snapshot: Snapshot, depths=None) -> DisconnectednessReport:
    levels = range(snapshot.depth + 1) if depths is None else list(depths)
    sizes = tuple(max(len(c) for c in snapshot.components(n)) for n in levels)
    tail = sizes[-3:]
    if len(tail) == 3 and len(set(tail)) == 1:
        return DisconnectednessReport(
            sizes, "BoundedObserved", tail[0], f"max component size constant at {tail[0]} over the last 3 levels"
        )
    ratio = sizes[-1] / sizes[-2] if len(sizes) > 1 else float("nan")
    return DisconnectednessReport(sizes, "GrowthObserved", None, f"last-level growth ratio {ratio:.4g}")


# -- equivalence reports ---------------------------------------------------------

@dataclass
class LipschitzReport:
    verdict: str  # "Equivalent" | "Inconclusive" | "NotComparable"
    reasons: list
    non_equivalent: bool = False
    tables: list = field(default_factory=list)
    plan: object = None
    rearrangements: list = field(default_factory=list)
    dimensions: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    modes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "non_equivalent": self.non_equivalent,
            "modes": list(self.modes),
            "class_tables": [t.to_json() for t in self.tables],
            "isomorphism_plan": self.plan.to_json() if self.plan is not None else None,
            "rearrangeability": [v.to_json() for v in self.rearrangements],
            "dimensions": [d.to_json() if d is not None else None for d in self.dimensions],
            "disconnectedness": [p.to_json() for p in self.profiles],
        }


def prepare(spec: IFS, depth: int, *, quotient="auto", mode="hull", kappa=None) -> Snapshot:
    """Build a snapshot, switching to the quotient when coincident maps occur (``quotient='auto'``)."""
    snap = build_snapshot(spec, depth, mode=mode, kappa=kappa)
    if quotient is True or (quotient == "auto" and has_coincidences(snap)):
        snap = build_quotient(snap)
    return snap


def lipschitz_report(
    spec1: IFS,
    spec2: IFS,
    *,
    depth: int = 6,
    window: int = 3,
    k_max: int = DEFAULT_K_MAX,
    matrices=None,
    mode: str = "hull",
    kappa=None,
) -> LipschitzReport:
    """Compose classification, the shared-B tree isomorphism and rearrangeability into one verdict.

    ``matrices`` optionally gives a finite-type matrix per spec for the
    dimension comparison.  Only a ratio mismatch or disjoint dimension
    brackets produce ``NotComparable``.
    """
    if ratio_multiset(spec1) != ratio_multiset(spec2):
        return LipschitzReport(
            "NotComparable",
            [
                "contraction ratio multisets differ: "
                f"{[format_rational(r) for r in ratio_multiset(spec1)]} vs "
                f"{[format_rational(r) for r in ratio_multiset(spec2)]}"
            ],
        )
    report = LipschitzReport("Inconclusive", [])
    if matrices is not None:
        r = spec1.r_min
        dims = [hausdorff_dimension(M, r) if M is not None else None for M in matrices]
        report.dimensions = dims
        if all(d is not None for d in dims):
            a, b = dims
            if a.hi < b.lo or b.hi < a.lo:
                report.verdict = "NotComparable"
                report.non_equivalent = True
                report.reasons.append(
                    f"Hausdorff dimensions differ: [{a.lo:.12g}, {a.hi:.12g}] vs [{b.lo:.12g}, {b.hi:.12g}]"
                )
                return report
    if spec1 == spec2:
        report.verdict = "Equivalent"
        report.reasons.append("identical systems; the identity map is the equivalence")
        return report

    snaps = [prepare(s, depth, mode=mode, kappa=kappa) for s in (spec1, spec2)]
    report.modes = ["quotient" if s.quotient else "raw" for s in snaps]
    report.profiles = [disconnectedness_profile(s) for s in snaps]
    tables = [classify(s, window) for s in snaps]
    report.tables = tables
    for k, t in enumerate(tables, 1):
        if not t.simple:
            report.reasons.append(f"system {k} did not stabilize at depth {depth}: {'; '.join(t.notes)}")
    if report.reasons:
        return report
    plan = tree_isomorphism_by_B(tables[0], tables[1])
    if plan is None:
        report.reasons.append(f"reduced trees have different B: {tables[0].B} vs {tables[1].B}")
        return report
    report.plan = plan
    verdicts = [is_rearrangeable(t.A, t.B, t.u, k_max) for t in tables]
    report.rearrangements = verdicts
    for k, v in enumerate(verdicts, 1):
        if not v.ok:
            report.reasons.append(
                f"A of system {k} is not (B, u)-rearrangeable up to power {k_max} (row {v.failed_row + 1})"
            )
    if report.reasons:
        return report
    report.verdict = "Equivalent"
    report.reasons.append("both simple, shared B, both A rearrangeable: each is Lipschitz equivalent to the dust-like model")
    return report


def dimension_from_table(table: ClassTable) -> DimensionResult:
    """Dimension using the component incidence matrix A of a simple table, on request."""
    if not table.simple:
        raise ValueError("dimension from A needs a simple class table")
    return hausdorff_dimension(table.A, table.snapshot.level_ratio)
