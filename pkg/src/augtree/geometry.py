"""Certified enclosures of attractor pieces and the horizontal-edge test."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .similitude import IFS, Similitude, Word


@dataclass(frozen=True)
class Hull:
    """Axis-aligned enclosure.  Exact intervals in 1D.

    In d >= 2 the box is the bounding box of a ball ``B(center, radius)``;
    the ball is what gets mapped, since similitudes send balls to balls.
    """

    lo: tuple
    hi: tuple
    center: tuple | None = None
    radius: float | None = None

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def diameter(self):
        if self.dimension == 1:
            return self.hi[0] - self.lo[0]
        return math.sqrt(sum((h - l) ** 2 for l, h in zip(self.lo, self.hi)))

    def gaps(self, other: "Hull"):
        return [max(0, o_lo - s_hi, s_lo - o_hi) for s_lo, s_hi, o_lo, o_hi in zip(self.lo, self.hi, other.lo, other.hi)]

    def distance(self, other: "Hull"):
        g = self.gaps(other)
        if self.dimension == 1:
            return g[0]
        return math.sqrt(sum(v * v for v in g))

    def contains(self, other: "Hull") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def image(self, f: Similitude) -> "Hull":
        if self.dimension == 1:
            a, b = f(self.lo[0]), f(self.hi[0])
            return Hull((min(a, b),), (max(a, b),))
        c = f(self.center)
        r = float(f.ratio) * self.radius
        return Hull(tuple(v - r for v in c), tuple(v + r for v in c), c, r)

    def to_json(self):
        from .similitude import format_rational

        if self.dimension == 1:
            return [format_rational(self.lo[0]), format_rational(self.hi[0])]
        return {"lo": list(self.lo), "hi": list(self.hi)}


def fixed_point(f: Similitude):
    if f.dimension == 1:
        return f.translation[0] / (1 - f.sign * f.ratio)
    import numpy as np

    m = np.eye(f.dimension) - float(f.ratio) * np.array(f.orth)
    return tuple(float(v) for v in np.linalg.solve(m, np.array(f.translation)))


def _interval_candidates(spec: IFS):
    # Endpoints satisfy a = S_i(e) and b = S_j(e') for e, e' in {a, b}: a 2x2 linear system each.
    for (i, ea), (j, eb) in itertools.product(
        itertools.product(range(spec.n_maps), "ab"), repeat=2
    ):
        fi, fj = spec.maps[i], spec.maps[j]
        si, ti = fi.sign * fi.ratio, fi.translation[0]
        sj, tj = fj.sign * fj.ratio, fj.translation[0]
        # a = si*e_a + ti ;  b = sj*e_b + tj
        m = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
        if ea == "a":
            m[0][0] -= si
        else:
            m[0][1] -= si
        if eb == "a":
            m[1][0] -= sj
        else:
            m[1][1] -= sj
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        if det == 0:
            continue
        a = (ti * m[1][1] - m[0][1] * tj) / det
        b = (m[0][0] * tj - m[1][0] * ti) / det
        yield a, b


def invariant_hull(spec: IFS) -> Hull:
    """Smallest enclosing interval of K in 1D (exact); a ball-based box in d >= 2.

    The returned hull H always satisfies S_i(H) ⊆ H for every map.
    """
    if spec.dimension == 1:
        best = None
        for a, b in _interval_candidates(spec):
            if a > b:
                continue
            images = [Hull((a,), (b,)).image(f) for f in spec.maps]
            if min(h.lo[0] for h in images) == a and max(h.hi[0] for h in images) == b:
                if best is None or b - a < best[1] - best[0]:
                    best = (a, b)
        if best is None:
            # Degenerate configuration: fall back to an invariant interval around fix(S_1).
            c = fixed_point(spec.maps[0])
            radius = max(abs(f(c) - c) / (1 - f.ratio) for f in spec.maps)
            best = (c - radius, c + radius)
        return Hull((best[0],), (best[1],))
    c = fixed_point(spec.maps[0])
    radius = 0.0
    for f in spec.maps:
        fc = f(c)
        radius = max(radius, math.dist(fc, c) / (1 - float(f.ratio)))
    radius *= 1 + 1e-12
    return Hull(tuple(v - radius for v in c), tuple(v + radius for v in c), c, radius)


def cylinder_hull(x: Word, spec: IFS, hull: Hull | None = None) -> Hull:
    """S_x(H): an enclosure of K_x of diameter r_x * diam(H)."""
    hull = hull or invariant_hull(spec)
    if not x:
        return hull
    return hull.image(spec.word_map(tuple(x)))


@dataclass(frozen=True)
class DistBound:
    lo: object
    hi: object
    depth: int
    witness: object = None
    conclusive: bool = True

    @property
    def width(self):
        return self.hi - self.lo


def _sample_points(spec: IFS):
    return [fixed_point(f) for f in spec.maps]


def _point_dist(p, q):
    if isinstance(p, tuple):
        return math.dist(p, q)
    return abs(p - q)


def dist_bound(
    x: Word, y: Word, m: int, spec: IFS, hull: Hull | None = None, max_pairs: int = 1 << 14
) -> DistBound:
    """Bracket dist(K_x, K_y) using the plain-length-m sub-cylinders of each piece.

    ``lo`` is the least hull-to-hull distance over sub-cylinder pairs and ``hi``
    is ``lo + 2*(largest sub-cylinder diameter)``; both are intersected with every
    coarser depth so brackets only shrink.  ``witness`` is the least distance
    between images of generator fixed points (points of K), another upper bound.
    Pairs whose hull distance already exceeds an upper bound are dropped, which
    leaves ``lo`` unchanged because the minimising pair always survives.
    """
    x, y = tuple(x), tuple(y)
    hull = hull or invariant_hull(spec)
    if x == y:
        return DistBound(0, 0, 0, 0)
    samples = _sample_points(spec)
    symbols = range(1, spec.n_maps + 1)
    r_max = max(spec.ratios)
    diam = hull.diameter
    kx, ky = spec.word_ratio(x), spec.word_ratio(y)
    if spec.dimension != 1:
        kx, ky, r_max = float(kx), float(ky), float(r_max)
    lo = hi = witness = None
    pairs = [((), ())]
    for k in range(m + 1):
        if k:
            pairs = [(a + (i,), b + (j,)) for a, b in pairs for i in symbols for j in symbols]
            if len(pairs) > max_pairs:
                return DistBound(lo, hi, k - 1, witness, conclusive=False)
        scored = []
        for a, b in pairs:
            ha, hb = cylinder_hull(x + a, spec, hull), cylinder_hull(y + b, spec, hull)
            scored.append((ha.distance(hb), a, b))
        lo_k = min(s[0] for s in scored)
        hi_k = lo_k + 2 * max(kx, ky) * r_max ** k * diam
        w_k = min(
            _point_dist(spec.word_map(x + a)(p), spec.word_map(y + b)(q))
            for d, a, b in scored
            if d == lo_k
            for p in samples
            for q in samples
        )
        lo = lo_k if lo is None else max(lo, lo_k)
        hi = hi_k if hi is None else min(hi, hi_k)
        witness = w_k if witness is None else min(witness, w_k)
        cut = min(hi, witness)
        pairs = [(a, b) for d, a, b in scored if d <= cut]
    return DistBound(lo, hi, m, witness)


class EdgeDecision(enum.Enum):
    EDGE = "edge"
    NO_EDGE = "no-edge"
    UNDECIDED = "undecided"


def edge_threshold(spec: IFS, n: int, kappa=None):
    kappa = spec.kappa if kappa is None else Fraction(kappa)
    t = kappa * spec.r_min ** n
    return t if spec.dimension == 1 else float(t)


def decide_edge(
    x: Word,
    y: Word,
    n: int,
    spec: IFS,
    kappa=None,
    mode: str = "hull",
    hull: Hull | None = None,
    max_refine: int = 5,
) -> EdgeDecision:
    """Horizontal-edge test for two distinct words of level n.

    ``hull`` mode compares hull distance with ``kappa * r**n`` exactly and never
    returns UNDECIDED.  ``certified`` mode refines sub-cylinder brackets.
    """
    hull = hull or invariant_hull(spec)
    t = edge_threshold(spec, n, kappa)
    if mode == "hull":
        d = cylinder_hull(x, spec, hull).distance(cylinder_hull(y, spec, hull))
        return EdgeDecision.EDGE if d <= t else EdgeDecision.NO_EDGE
    if mode != "certified":
        raise ValueError(f"unknown edge mode {mode!r}")
    for m in range(max_refine + 1):
        b = dist_bound(x, y, m, spec, hull)
        if b.lo is not None and b.lo > t:
            return EdgeDecision.NO_EDGE
        upper = [v for v in (b.hi, b.witness) if v is not None]
        if upper and min(upper) <= t:
            return EdgeDecision.EDGE
        if not b.conclusive:
            break
    return EdgeDecision.UNDECIDED
