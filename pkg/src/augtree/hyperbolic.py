"""Graph distances, canonical geodesics, Gromov products and the near-isometry onto the tree.

Distances are taken in the graph whose vertical edges are the (reduced) tree
edges and whose horizontal edges are E_h.  For a raw snapshot this is the
augmented tree itself.  Geodesics between vertices of level <= n never go
below level n, so restricting the graph to levels <= n is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, shortest_path

from .classification import ClassTable
from .errors import InvariantViolation
from .tree import Snapshot

EXHAUSTIVE_VERTEX_LIMIT = 6000


def level_prefix(snapshot: Snapshot, max_level: int | None) -> int:
    """Number of vertices on levels <= max_level (ids are assigned level by level)."""
    if max_level is None or max_level >= snapshot.depth:
        return snapshot.n_vertices
    return snapshot.levels[max_level][-1] + 1


def adjacency_matrix(snapshot: Snapshot, max_level: int | None = None, horizontal: bool = True, vertical: bool = True):
    N = level_prefix(snapshot, max_level)
    rows, cols = [], []
    if vertical:
        for v in range(1, N):
            rows.append(v)
            cols.append(snapshot.tree_parent[v])
    if horizontal:
        for v in range(N):
            for u in snapshot.adj[v]:
                if u > v:
                    rows.append(v)
                    cols.append(u)
    data = np.ones(len(rows), dtype=np.float64)
    m = csr_matrix((data, (rows, cols)), shape=(N, N))
    return m + m.T


def distance_matrix(snapshot: Snapshot, max_level: int | None = None) -> np.ndarray:
    """All-pairs graph distances among vertices of level <= max_level."""
    d = shortest_path(adjacency_matrix(snapshot, max_level), unweighted=True, directed=False)
    return d.astype(np.int64)


def graph_distance(snapshot: Snapshot, x: int, y: int) -> int:
    top = max(snapshot.vertices[x].level, snapshot.vertices[y].level)
    d = dijkstra(adjacency_matrix(snapshot, top), indices=x, unweighted=True, directed=False)
    return int(d[y])


def gromov_product(snapshot: Snapshot, x: int, y: int) -> Fraction:
    lx, ly = snapshot.vertices[x].level, snapshot.vertices[y].level
    return Fraction(lx + ly - graph_distance(snapshot, x, y), 2)


def visual_metric(snapshot: Snapshot, x: int, y: int, a: float) -> float:
    if a <= 0:
        raise ValueError("visual metric parameter must be positive")
    if x == y:
        return 0.0
    return math.exp(-a * float(gromov_product(snapshot, x, y)))


# -- canonical geodesics --------------------------------------------------------

class _Horizontal:
    """Per-level horizontal distances and predecessors (inf across components)."""

    def __init__(self, snapshot: Snapshot):
        self.snap = snapshot
        self._cache: dict = {}

    def level(self, n: int):
        hit = self._cache.get(n)
        if hit is None:
            ids = self.snap.levels[n]
            base = ids[0]
            rows, cols = [], []
            for a, b in self.snap.horizontal_edges(n):
                rows.append(a - base)
                cols.append(b - base)
            size = len(ids)
            m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
            d, pred = shortest_path(m, unweighted=True, directed=False, return_predecessors=True)
            hit = (base, d, pred)
            self._cache[n] = hit
        return hit

    def distance(self, a: int, b: int) -> float:
        base, d, _ = self.level(self.snap.vertices[a].level)
        return d[a - base, b - base]

    def path(self, a: int, b: int) -> list:
        base, _, pred = self.level(self.snap.vertices[a].level)
        out = [b]
        cur = b - base
        while cur != a - base:
            cur = pred[a - base, cur]
            out.append(cur + base)
        return out[::-1]


@dataclass(frozen=True)
class GeodesicDecomposition:
    descent: tuple  # x up to its level-l ancestor
    horizontal: tuple
    ascent: tuple  # level-l ancestor of y down to y
    l: int
    h: int
    d: int

    @property
    def gromov(self) -> Fraction:
        return Fraction(2 * self.l - self.h, 2)

    def path(self) -> list:
        return list(self.descent) + list(self.horizontal[1:]) + list(self.ascent[1:])


def canonical_geodesic(snapshot: Snapshot, x: int, y: int, _hz: _Horizontal | None = None) -> GeodesicDecomposition:
    """Shortest vertical-horizontal-vertical path, horizontal part on the highest level."""
    hz = _hz or _Horizontal(snapshot)
    lx, ly = snapshot.vertices[x].level, snapshot.vertices[y].level
    best = None
    for l in range(min(lx, ly), -1, -1):
        ax, ay = snapshot.ancestor(x, l), snapshot.ancestor(y, l)
        h = hz.distance(ax, ay)
        if not np.isfinite(h):
            continue
        total = lx + ly - 2 * l + int(h)
        if best is None or total < best[0]:
            best = (total, l, ax, ay, int(h))
    total, l, ax, ay = best[0], best[1], best[2], best[3]
    up = [x]
    while up[-1] != ax:
        up.append(snapshot.tree_parent[up[-1]])
    down = [y]
    while down[-1] != ay:
        down.append(snapshot.tree_parent[down[-1]])
    return GeodesicDecomposition(tuple(up), tuple(hz.path(ax, ay)), tuple(down[::-1]), l, best[4], total)


def _ancestor_table(snapshot: Snapshot, N: int, top: int) -> np.ndarray:
    """anc[l, v] = id of the level-l ancestor of v, or -1 when level(v) < l."""
    anc = np.full((top + 1, N), -1, dtype=np.int64)
    level = snapshot.level_of[:N]
    if N and int(level.max()) > top:
        raise ValueError("ancestor table needs every vertex at level <= top")
    cur = np.arange(N)
    cur_level = level.copy()
    parent = np.array([p if p is not None else -1 for p in snapshot.tree_parent[:N]], dtype=np.int64)
    for l in range(top, -1, -1):
        # lift every vertex still below level l by one step
        move = cur_level > l
        cur[move] = parent[cur[move]]
        cur_level[move] -= 1
        mask = level >= l
        anc[l, mask] = cur[mask]
    return anc


def canonical_distance_matrix(snapshot: Snapshot, max_level: int):
    """min over l of |x|+|y|-2l+h_l(x_l, y_l), and the highest minimising l."""
    N = level_prefix(snapshot, max_level)
    top = min(max_level, snapshot.depth)
    level = snapshot.level_of[:N]
    anc = _ancestor_table(snapshot, N, top)
    hz = _Horizontal(snapshot)
    best = np.full((N, N), np.inf)
    best_l = np.full((N, N), -1, dtype=np.int64)
    base_sum = level[:, None] + level[None, :]
    for l in range(top + 1):
        base, d, _ = hz.level(l)
        idx = anc[l] - base
        valid = anc[l] >= 0
        sub = np.full((N, N), np.inf)
        vi = np.nonzero(valid)[0]
        sub[np.ix_(vi, vi)] = d[np.ix_(idx[vi], idx[vi])]
        cand = base_sum - 2 * l + sub
        better = cand <= best  # ties go to the higher level
        best = np.where(better, cand, best)
        best_l = np.where(better, l, best_l)
    return best, best_l


@dataclass(frozen=True)
class GromovCheck:
    max_level: int
    pairs: int
    mismatches: int
    witness: tuple | None

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def check_gromov_identity(snapshot: Snapshot, max_level: int = 5) -> GromovCheck:
    """Compare ½(|x|+|y|-d) with l - h/2 from canonical geodesics, for all pairs."""
    max_level = min(max_level, snapshot.depth)
    d = distance_matrix(snapshot, max_level)
    can, _ = canonical_distance_matrix(snapshot, max_level)
    bad = np.argwhere(d != can)
    witness = None
    if len(bad):
        x, y = map(int, bad[0])
        witness = (snapshot.label(x), snapshot.label(y), int(d[x, y]), float(can[x, y]))
    N = d.shape[0]
    return GromovCheck(max_level, N * N, len(bad), witness)


# -- empirical constants --------------------------------------------------------

@dataclass(frozen=True)
class HorizontalBound:
    c_obs: int
    per_level: tuple

    def to_json(self) -> dict:
        return {
            "c_obs": self.c_obs,
            "per_level": list(self.per_level),
            "label": "empirical lower bound on the horizontal geodesic constant at the tested depth",
        }


def horizontal_geodesic_bound(snapshot: Snapshot, max_level: int | None = None) -> HorizontalBound:
    """Longest horizontal path that is also a shortest path in the whole graph."""
    top = snapshot.depth if max_level is None else min(max_level, snapshot.depth)
    hz = _Horizontal(snapshot)
    per_level = []
    for n in range(top + 1):
        base, hd, _ = hz.level(n)
        graph = None
        best = 0
        for comp in snapshot.components(n):
            if len(comp) < 2:
                continue
            local = np.array(comp.vertices) - base
            block = hd[np.ix_(local, local)]
            reach = int(block.max())
            if reach <= best:
                continue
            if graph is None:
                graph = adjacency_matrix(snapshot, n)
            g = dijkstra(graph, indices=list(comp.vertices), unweighted=True, directed=False, limit=reach)
            glob = g[:, list(comp.vertices)]
            hits = block[block == glob]
            if hits.size:
                best = max(best, int(hits.max()))
        per_level.append(best)
    return HorizontalBound(max(per_level), tuple(per_level))


def delta_observed(snapshot: Snapshot, max_level: int = 4) -> Fraction:
    """max over triples of min(|x∧z|, |z∧y|) - |x∧y|, Gromov products at the root."""
    max_level = min(max_level, snapshot.depth)
    d = distance_matrix(snapshot, max_level)
    lev = snapshot.level_of[: d.shape[0]]
    P2 = lev[:, None] + lev[None, :] - d  # twice the Gromov product
    worst = 0
    for z in range(P2.shape[0]):
        m = np.minimum(P2[:, z][:, None], P2[z, :][None, :]) - P2
        worst = max(worst, int(m.max()))
    return Fraction(worst, 2)


# -- near-isometry -----------------------------------------------------------------

@dataclass
class NearIsometryMap:
    snapshot: Snapshot
    sigma: list  # vertex id -> vertex id of the reduced tree
    depth: int
    groups: dict = field(default_factory=dict)  # component id -> [(image vertex, [offspring component ids])]

    def pairs(self) -> list:
        s = self.snapshot
        return [(s.label(v), s.label(self.sigma[v])) for v in range(level_prefix(s, self.depth))]

    def to_json(self) -> dict:
        return {"depth": self.depth, "pairs": [list(p) for p in self.pairs()]}


def build_near_isometry(table: ClassTable, certificates, depth: int | None = None) -> NearIsometryMap:
    """Level-by-level bijection onto the reduced tree driven by rearranging matrices.

    ``certificates`` holds one power-1 rearranging matrix per row of the table's A.
    For a power k > 1, classify ``snapshot.subsample(k)`` and pass that table.
    """
    if not table.simple:
        raise ValueError("near-isometry needs a simple class table")
    certs = {c.row: c for c in certificates}
    if sorted(certs) != list(range(table.m)) or any(c.power != 1 for c in certs.values()):
        raise ValueError("need one power-1 certificate per row of A; rebuild on the k-step snapshot for k > 1")
    snap = table.snapshot
    depth = snap.depth if depth is None else min(depth, snap.depth)
    vclass = table.vertex_class
    uvec = table.u
    B = table.B
    sigma = [-1] * snap.n_vertices
    sigma[0] = 0
    offspring: dict = {}
    for n in range(1, depth + 1):
        for c in snap.components(n):
            parent_comp = snap.component_of(snap.tree_parent[c.vertices[0]]).id
            offspring.setdefault(parent_comp, []).append(c)
    groups: dict = {}
    for n in range(depth):
        for comp in snap.components(n):
            i = table.component_class[comp.id]
            C = certs[i].C
            images = [sigma[x] for x in comp.vertices]
            # rows of C to image vertices, matching c_r u^t with the b-row of the image's class
            free = list(range(len(C)))
            row_of = []
            for y in images:
                want = list(B[vclass[y]])
                for r in free:
                    got = [sum(C[r][j] * uvec[j][t] for j in range(table.m)) for t in range(table.n)]
                    if got == want:
                        row_of.append(r)
                        free.remove(r)
                        break
                else:
                    raise InvariantViolation(f"no certificate row matches the image of {snap.component_words(comp)}")
            by_class: dict = {}
            for o in offspring.get(comp.id, []):
                by_class.setdefault(table.component_class[o.id], []).append(o)
            bookkeeping = []
            for y, r in zip(images, row_of):
                group = []
                for j in range(table.m):
                    for _ in range(C[r][j]):
                        if not by_class.get(j):
                            raise InvariantViolation("certificate asks for more offspring than the component has")
                        group.append(by_class[j].pop(0))
                slots: dict = {}
                for ch in snap.children[y]:
                    slots.setdefault(vclass[ch], []).append(ch)
                for o in group:
                    for w in o.vertices:
                        bucket = slots.get(vclass[w])
                        if not bucket:
                            raise InvariantViolation(f"vertex classes under {snap.label(y)} do not match its group")
                        sigma[w] = bucket.pop(0)
                if any(slots.values()):
                    raise InvariantViolation(f"children of {snap.label(y)} left unassigned")
                bookkeeping.append((y, [o.id for o in group]))
            if any(by_class.values()):
                raise InvariantViolation(f"offspring of {snap.component_words(comp)} left unassigned")
            groups[comp.id] = bookkeeping
    nim = NearIsometryMap(snap, sigma, depth, groups)
    check_near_isometry_invariants(nim, table)
    return nim


def check_near_isometry_invariants(nim: NearIsometryMap, table: ClassTable) -> None:
    """Bijection per level, one common parent per component image, classes preserved."""
    snap = nim.snapshot
    for n in range(nim.depth + 1):
        ids = snap.levels[n]
        if sorted(nim.sigma[v] for v in ids) != ids:
            raise InvariantViolation(f"sigma is not a bijection on level {n}")
        for comp in snap.components(n):
            if n > 0 and len({snap.tree_parent[nim.sigma[v]] for v in comp.vertices}) != 1:
                raise InvariantViolation(f"images of {snap.component_words(comp)} have different parents")
        for v in ids:
            if table.vertex_class[nim.sigma[v]] != table.vertex_class[v]:
                raise InvariantViolation(f"sigma changes the vertex class of {snap.label(v)}")


def tree_distance_matrix(snapshot: Snapshot, vertices: np.ndarray, max_level: int) -> np.ndarray:
    """Distances in the reduced tree between the given vertices."""
    N = level_prefix(snapshot, max_level)
    anc = _ancestor_table(snapshot, N, max_level)[:, vertices]
    lev = snapshot.level_of[vertices]
    common = np.zeros((len(vertices), len(vertices)), dtype=np.int64)
    for l in range(1, max_level + 1):
        a = anc[l]
        common += (a[:, None] == a[None, :]) & (a[:, None] >= 0)
    return lev[:, None] + lev[None, :] - 2 * common


@dataclass(frozen=True)
class NearIsometryReport:
    max_deviation: int
    c_obs: int
    bound: int
    pairs: int
    max_level: int
    witness: tuple | None
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.bound

    def to_json(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "c_obs": self.c_obs,
            "bound": self.bound,
            "pairs": self.pairs,
            "max_level": self.max_level,
            "exhaustive": self.exhaustive,
            "witness": list(self.witness) if self.witness else None,
            "label": "<= c_obs + 2 at tested depth",
        }


def verify_near_isometry(nim: NearIsometryMap, max_level: int = 5, sample: int = 200_000, seed: int = 0) -> NearIsometryReport:
    """max |d(σx, σy) - d(x, y)| over all pairs (sampled beyond the vertex limit)."""
    snap = nim.snapshot
    max_level = min(max_level, nim.depth)
    N = level_prefix(snap, max_level)
    c_obs = horizontal_geodesic_bound(snap, max_level).c_obs
    sig = np.array(nim.sigma[:N], dtype=np.int64)
    if N <= EXHAUSTIVE_VERTEX_LIMIT:
        src = distance_matrix(snap, max_level)
        tgt_all = tree_distance_matrix(snap, np.arange(N), max_level)
        tgt = tgt_all[np.ix_(sig, sig)]
        dev = np.abs(tgt - src)
        pairs, exhaustive = N * N, True
        k = int(np.argmax(dev))
        x, y = divmod(k, N)
        worst = int(dev[x, y])
    else:
        rng = np.random.default_rng(seed)
        xs = rng.integers(0, N, size=min(sample, N * N))
        ys = rng.integers(0, N, size=xs.size)
        graph = adjacency_matrix(snap, max_level)
        uniq = np.unique(xs)
        dist = dijkstra(graph, indices=uniq, unweighted=True, directed=False)
        row = {int(v): i for i, v in enumerate(uniq)}
        src = np.array([dist[row[int(a)], b] for a, b in zip(xs, ys)], dtype=np.int64)
        pts = np.unique(np.concatenate([sig[xs], sig[ys]]))
        tmat = tree_distance_matrix(snap, pts, max_level)
        pos = {int(v): i for i, v in enumerate(pts)}
        tgt = np.array([tmat[pos[int(sig[a])], pos[int(sig[b])]] for a, b in zip(xs, ys)])
        dev = np.abs(tgt - src)
        k = int(np.argmax(dev))
        x, y = int(xs[k]), int(ys[k])
        worst = int(dev[k])
        pairs, exhaustive = int(xs.size), False
    report = NearIsometryReport(
        worst, c_obs, c_obs + 2, pairs, max_level, (snap.label(x), snap.label(y)), exhaustive
    )
    if not report.ok:
        raise InvariantViolation(
            f"near-isometry bound violated: |d(σx,σy) - d(x,y)| = {worst} > {c_obs + 2} at {report.witness}"
        )
    return report
