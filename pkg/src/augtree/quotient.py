"""Quotient of the augmented tree by coincident similitudes, and its reduced tree."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantViolation
from .tree import Snapshot, Vertex


def build_quotient(snapshot: Snapshot) -> Snapshot:
    """Identify same-level vertices whose similitudes are equal.

    Vertical and horizontal edges are induced from member pairs.  Each vertex
    keeps every parent, sorted lexicographically; the first one is the edge the
    reduced tree retains.
    """
    if snapshot.quotient:
        return snapshot
    if snapshot.step != 1:
        raise ValueError("build the quotient before subsampling")
    to_q = [0] * snapshot.n_vertices
    vertices, levels = [], []
    for ids in snapshot.levels:
        groups: dict = {}
        for v in ids:
            groups.setdefault(snapshot.vertices[v].map.key, []).append(v)
        blocks = []
        for members in groups.values():
            words = tuple(sorted(w for v in members for w in snapshot.vertices[v].words))
            blocks.append((words, members))
        blocks.sort(key=lambda b: b[0][0])
        level_ids = []
        for words, members in blocks:
            first = snapshot.vertices[members[0]]
            q = Vertex(len(vertices), first.level, words, first.map, first.theta)
            vertices.append(q)
            level_ids.append(q.id)
            for v in members:
                to_q[v] = q.id
        levels.append(level_ids)
    parents = [set() for _ in vertices]
    adj = [set() for _ in vertices]
    for v in range(snapshot.n_vertices):
        q = to_q[v]
        parents[q].update(to_q[p] for p in snapshot.parents[v])
        for u in snapshot.adj[v]:
            if to_q[u] != q:
                adj[q].add(to_q[u])
    return Snapshot(
        snapshot.spec,
        vertices,
        levels,
        [tuple(sorted(p)) for p in parents],
        [tuple(sorted(a)) for a in adj],
        quotient=True,
        mode=snapshot.mode,
        kappa=snapshot.kappa,
    )


def reduce_to_tree(q: Snapshot) -> Snapshot:
    """Keep only the vertical edge to the lexicographically least parent."""
    if not q.quotient:
        q = build_quotient(q)
    out = Snapshot(
        q.spec,
        q.vertices,
        q.levels,
        [(p[0],) if p else () for p in q.parents],
        q.adj,
        quotient=True,
        reduced=True,
        step=q.step,
        mode=q.mode,
        kappa=q.kappa,
    )
    edges = sum(1 for p in out.parents if p)
    if edges != out.n_vertices - 1:
        raise InvariantViolation("reduced tree does not have #vertices - 1 vertical edges")
    for v in range(1, out.n_vertices):
        # canonical word of the child extends the canonical word of the kept parent
        c, pc = out.vertices[v].canonical, out.vertices[out.tree_parent[v]].canonical
        if c[: len(pc)] != pc:
            raise InvariantViolation(f"retained parent of {out.label(v)} is not its canonical prefix")
    return out


def has_coincidences(snapshot: Snapshot) -> bool:
    """True when two vertices of some level carry the same similitude (or already merged words)."""
    if any(len(v.words) > 1 for v in snapshot.vertices):
        return True
    for ids in snapshot.levels:
        keys = {snapshot.vertices[v].map.key for v in ids}
        if len(keys) != len(ids):
            return True
    return False


@dataclass(frozen=True)
class DegreeProfile:
    max_degree: tuple  # per level
    growing: bool

    def to_json(self) -> dict:
        return {
            "max_degree": list(self.max_degree),
            "growing": self.growing,
            "note": "finite-depth heuristic; growth suggests a separation failure, bounded values prove nothing",
        }


def degree_profile(snapshot: Snapshot) -> DegreeProfile:
    """Max total degree (parents + children + horizontal neighbours) per level."""
    n_children = [0] * snapshot.n_vertices
    for ps in snapshot.parents:
        for p in ps:
            n_children[p] += 1
    out = []
    for n, ids in enumerate(snapshot.levels):
        # the last level has no children built, so it is left out of the profile
        if n == snapshot.depth and n > 0:
            break
        out.append(max(len(snapshot.parents[v]) + n_children[v] + len(snapshot.adj[v]) for v in ids))
    tail = out[-3:]
    growing = len(tail) == 3 and tail[0] < tail[1] < tail[2]
    return DegreeProfile(tuple(out), growing)
