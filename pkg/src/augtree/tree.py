"""The augmented tree (X, E_v ∪ E_h) materialised to a finite depth.

One :class:`Snapshot` type serves the raw word tree, its quotient and the
reduced tree.  Vertices carry every word they stand for (a single word unless
the snapshot is a quotient) and are numbered level by level in the
lexicographic order of their canonical (least) word.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded, InvariantViolation, UndecidedEdge
from .geometry import (
    EdgeDecision,
    Hull,
    cylinder_hull,
    decide_edge,
    dist_bound,
    edge_threshold,
    invariant_hull,
)
from .similitude import IFS, Similitude, Word, word_label

DEFAULT_MAX_VERTICES = 200_000


def default_cap() -> int:
    raw = os.environ.get("AUGTREE_MAX_VERTICES")
    if raw is None:
        return DEFAULT_MAX_VERTICES
    try:
        return int(raw)
    except ValueError:
        raise CapExceeded(f"AUGTREE_MAX_VERTICES must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Vertex:
    id: int
    level: int
    words: tuple  # sorted; words[0] is canonical
    map: Similitude
    theta: Fraction  # r_x / r**(level * step)

    @property
    def canonical(self) -> Word:
        return self.words[0]


@dataclass(frozen=True)
class Component:
    level: int
    vertices: tuple  # vertex ids, ascending (= lexicographic)
    index: int  # position of the least vertex inside its level

    @property
    def id(self) -> tuple:
        return (self.level, self.index)

    def __len__(self):
        return len(self.vertices)


class Snapshot:
    """Levels 0..depth of an augmented tree, its quotient, or a k-step subsample."""

    def __init__(
        self,
        spec: IFS,
        vertices: list,
        levels: list,
        parents: list,
        adj: list,
        *,
        quotient: bool = False,
        reduced: bool = False,
        step: int = 1,
        mode: str = "hull",
        kappa: Fraction | None = None,
    ):
        self.spec = spec
        self.vertices = vertices
        self.levels = levels
        self.parents = parents
        self.adj = adj
        self.quotient = quotient
        self.reduced = reduced
        self.step = step
        self.mode = mode
        self.kappa = spec.kappa if kappa is None else Fraction(kappa)
        self.tree_parent = [p[0] if p else None for p in parents]
        self._components: dict = {}
        self._word_index = {w: v.id for v in vertices for w in v.words}

    # -- basic accessors -------------------------------------------------
    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def level_ratio(self) -> Fraction:
        return self.spec.r_min ** self.step

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def level_of(self) -> np.ndarray:
        return np.array([v.level for v in self.vertices], dtype=np.int64)

    @cached_property
    def children(self) -> list:
        """Children in the (reduced) tree, ascending."""
        out = [[] for _ in self.vertices]
        for v, p in enumerate(self.tree_parent):
            if p is not None:
                out[p].append(v)
        return out

    @cached_property
    def hull(self) -> Hull:
        return invariant_hull(self.spec)

    def vertex_hull(self, v: int) -> Hull:
        return cylinder_hull(self.vertices[v].canonical, self.spec, self.hull)

    def vertex_of(self, word) -> int:
        try:
            return self._word_index[tuple(word)]
        except KeyError:
            raise KeyError(f"word {word_label(tuple(word))!r} is not a vertex of this snapshot") from None

    def label(self, v: int) -> str:
        words = self.vertices[v].words
        n = self.spec.n_maps
        if len(words) == 1:
            return word_label(words[0], n) or "ϑ"
        return "{" + ",".join(word_label(w, n) for w in words) + "}"

    def ancestor(self, v: int, level: int) -> int:
        while self.vertices[v].level > level:
            v = self.tree_parent[v]
        return v

    def horizontal_edges(self, n: int) -> list:
        return [(a, b) for a in self.levels[n] for b in self.adj[a] if a < b]

    # -- components ------------------------------------------------------
    def components(self, n: int) -> list:
        hit = self._components.get(n)
        if hit is not None:
            return hit
        ids = self.levels[n]
        base = ids[0]
        size = len(ids)
        rows, cols = [], []
        for a, b in self.horizontal_edges(n):
            rows.append(a - base)
            cols.append(b - base)
        graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
        _, labels = connected_components(graph, directed=False)
        groups: dict = {}
        for k, lab in enumerate(labels):
            groups.setdefault(lab, []).append(base + k)
        comps = sorted(groups.values(), key=lambda g: g[0])
        result = [Component(n, tuple(g), g[0] - base) for g in comps]
        self._components[n] = result
        return result

    @cached_property
    def component_index(self) -> list:
        """For each vertex, the position of its component within its level."""
        out = [0] * self.n_vertices
        for n in range(self.depth + 1):
            for k, comp in enumerate(self.components(n)):
                for v in comp.vertices:
                    out[v] = k
        return out

    def component_of(self, v: int) -> Component:
        return self.components(self.vertices[v].level)[self.component_index[v]]

    def component_words(self, comp: Component) -> list:
        return [self.label(v) for v in comp.vertices]

    # -- derived snapshots -----------------------------------------------
    def subsample(self, k: int) -> "Snapshot":
        """The snapshot on levels X_0, X_k, X_2k, ... with k-th ancestors as parents."""
        if k < 1:
            raise ValueError("k must be positive")
        if k == 1:
            return self
        keep = list(range(0, self.depth + 1, k))
        new_id = {}
        vertices, levels = [], []
        for new_level, n in enumerate(keep):
            ids = []
            for v in self.levels[n]:
                old = self.vertices[v]
                nv = Vertex(len(vertices), new_level, old.words, old.map, old.theta)
                new_id[v] = nv.id
                vertices.append(nv)
                ids.append(nv.id)
            levels.append(ids)
        parents = [()] * len(vertices)
        for n in keep[1:]:
            for v in self.levels[n]:
                frontier = {v}
                for _ in range(k):
                    frontier = {p for u in frontier for p in self.parents[u]}
                tree = v
                for _ in range(k):
                    tree = self.tree_parent[tree]
                ordered = sorted(frontier - {tree})
                parents[new_id[v]] = tuple([new_id[tree]] + [new_id[p] for p in ordered])
        adj = [()] * len(vertices)
        for v, nv in new_id.items():
            adj[nv] = tuple(sorted(new_id[u] for u in self.adj[v]))
        return Snapshot(
            self.spec,
            vertices,
            levels,
            parents,
            adj,
            quotient=self.quotient,
            reduced=self.reduced,
            step=self.step * k,
            mode=self.mode,
            kappa=self.kappa,
        )

    # -- checks ----------------------------------------------------------
    def check_invariants(self) -> None:
        """Edge symmetry, anti-reflexivity and the parent condition on horizontal edges."""
        for v in range(self.n_vertices):
            lv = self.vertices[v].level
            for u in self.adj[v]:
                if u == v:
                    raise InvariantViolation(f"self loop at {self.label(v)}")
                if v not in self.adj[u]:
                    raise InvariantViolation(f"asymmetric edge {self.label(v)}-{self.label(u)}")
                if self.vertices[u].level != lv:
                    raise InvariantViolation("horizontal edge joins different levels")
                if lv > 0:
                    pv, pu = self.tree_parent[v], self.tree_parent[u]
                    if pv != pu and pu not in self.adj[pv]:
                        raise InvariantViolation(
                            f"edge {self.label(v)}-{self.label(u)} but parents are neither equal nor adjacent"
                        )

    def summary(self) -> dict:
        return {
            "depth": self.depth,
            "quotient": self.quotient,
            "step": self.step,
            "mode": self.mode,
            "level_sizes": [len(ids) for ids in self.levels],
            "horizontal_edges": [len(self.horizontal_edges(n)) for n in range(self.depth + 1)],
            "components": [len(self.components(n)) for n in range(self.depth + 1)],
            "exact": self.spec.exact,
        }


def _level_edges(spec: IFS, vertices: list, n: int, mode: str, kappa, hull: Hull, max_refine: int):
    """All horizontal edges within one level, by an axis-0 sweep over hull intervals."""
    t = edge_threshold(spec, n, kappa)
    hulls = [cylinder_hull(v.canonical, spec, hull) for v in vertices]
    order = sorted(range(len(vertices)), key=lambda i: hulls[i].lo[0])
    edges = []
    for pos, i in enumerate(order):
        reach = hulls[i].hi[0] + t
        for j in order[pos + 1 :]:
            if hulls[j].lo[0] > reach:
                break
            if hulls[i].distance(hulls[j]) > t:
                continue
            a, b = vertices[i], vertices[j]
            if mode == "certified":
                verdict = decide_edge(a.canonical, b.canonical, n, spec, kappa, "certified", hull, max_refine)
                if verdict is EdgeDecision.UNDECIDED:
                    bound = dist_bound(a.canonical, b.canonical, max_refine, spec, hull)
                    raise UndecidedEdge(word_label(a.canonical), word_label(b.canonical), bound)
                if verdict is EdgeDecision.NO_EDGE:
                    continue
            edges.append((a.id, b.id))
    return edges


def _adjacency(n_vertices: int, edges) -> list:
    adj = [set() for _ in range(n_vertices)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return [tuple(sorted(s)) for s in adj]


def build_snapshot(
    spec: IFS,
    max_level: int,
    *,
    mode: str = "hull",
    kappa=None,
    cap: int | None = None,
    max_refine: int = 5,
) -> Snapshot:
    """Enumerate X_0..X_max_level and decide every horizontal edge."""
    if max_level < 0:
        raise ValueError("max_level must be nonnegative")
    if mode not in ("hull", "certified"):
        raise ValueError(f"unknown edge mode {mode!r}")
    cap = default_cap() if cap is None else cap
    kappa = spec.kappa if kappa is None else Fraction(kappa)
    words, parent_idx = spec.levels(max_level, cap)
    hull = invariant_hull(spec)
    vertices, levels, parents = [], [], []
    for n, lw in enumerate(words):
        ids = []
        offset = levels[n - 1][0] if n else 0
        for w, p in zip(lw, parent_idx[n]):
            v = Vertex(len(vertices), n, (w,), spec.word_map(w), spec.theta(w, n))
            vertices.append(v)
            parents.append(() if p is None else (offset + p,))
            ids.append(v.id)
        levels.append(ids)
    edges = []
    for n, ids in enumerate(levels):
        edges.extend(_level_edges(spec, [vertices[i] for i in ids], n, mode, kappa, hull, max_refine))
    snap = Snapshot(spec, vertices, levels, parents, _adjacency(len(vertices), edges), mode=mode, kappa=kappa)
    return snap


def components_at(snapshot: Snapshot, n: int) -> list:
    if not 0 <= n <= snapshot.depth:
        raise ValueError(f"level {n} outside snapshot depth {snapshot.depth}")
    return snapshot.components(n)


def offspring_components(snapshot: Snapshot, comp: Component) -> list:
    """Components of the next level whose vertices descend from ``comp``."""
    n = comp.level
    if n >= snapshot.depth:
        raise ValueError("component lies on the last built level")
    members = set(comp.vertices)
    out = []
    for child in snapshot.components(n + 1):
        hits = [p in members for v in child.vertices for p in snapshot.parents[v]]
        if all(hits):
            out.append(child)
        elif any(hits):
            raise InvariantViolation(
                f"component at level {n + 1} descends from several components of level {n}"
            )
    return out


def to_dot(snapshot: Snapshot, view: str = "augmented") -> str:
    """Graphviz text.  Views: ``augmented`` (all edges), ``vertical`` (E_v only), ``reduced`` (tree edges only)."""
    if view not in ("augmented", "vertical", "reduced"):
        raise ValueError(f"unknown DOT view {view!r}")
    lines = ["graph augtree {", "  node [shape=circle, fontsize=10];"]
    for n in range(snapshot.depth + 1):
        for k, comp in enumerate(snapshot.components(n)):
            if view == "augmented" and len(comp) > 1:
                lines.append(f"  subgraph cluster_{n}_{k} {{ style=dotted;")
                lines.extend(f'    v{v} [label="{snapshot.label(v)}"];' for v in comp.vertices)
                lines.append("  }")
            else:
                lines.extend(f'  v{v} [label="{snapshot.label(v)}"];' for v in comp.vertices)
        lines.append("  { rank=same; " + " ".join(f"v{v};" for v in snapshot.levels[n]) + " }")
    for v in range(snapshot.n_vertices):
        ps = (snapshot.tree_parent[v],) if view == "reduced" else snapshot.parents[v]
        for p in ps:
            if p is not None:
                lines.append(f"  v{p} -- v{v};")
    if view == "augmented":
        for n in range(snapshot.depth + 1):
            lines.extend(f"  v{a} -- v{b} [style=dashed];" for a, b in snapshot.horizontal_edges(n))
    lines.append("}")
    return "\n".join(lines) + "\n"
