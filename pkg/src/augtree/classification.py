"""Equivalence classes of components and vertices, and the incidence data (A, B, u).

A component class match needs a conjugacy certificate: one similitude h with
``S_g(x) = h ∘ S_x`` for a bijection g preserving horizontal edges, vertex
classes and (in a quotient) the lexicographic order.  Such an h carries the
whole subgraph T_D onto T'_D, so the match is sound.  Non-matches are refuted
with finite-depth signatures; anything neither certified nor refuted makes the
table ``NotStabilized`` instead of guessing.

Vertex classes live on the reduced tree.  A vertex x is keyed by its
normalised ratio and the set of relative maps ``S_x^{-1} S_v`` over the
lexicographically smaller vertices v of its level that share descendants with
it.  Equal keys give isomorphic reduced subtrees.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import InvariantViolation
from .geometry import Hull
from .similitude import IFS, Similitude, format_rational
from .tree import Component, Snapshot

DEFAULT_WINDOW = 3
SHARE_STATE_CAP = 20_000


# -- vertex keys on the reduced tree --------------------------------------------

class _ShareOracle:
    """Decides whether two same-level pieces have coinciding descendants.

    State: the two normalised ratios and the relative map ψ = S_x^{-1} S_v.
    Children are ``S_a^{-1} ψ S_b``; a state is dead when ψ(H) misses H.
    Exhausting the state cap answers True, which only refines classes.
    """

    def __init__(self, spec: IFS, hull: Hull, cap: int = SHARE_STATE_CAP):
        self.spec = spec
        self.hull = hull
        self.cap = cap
        self.cache: dict = {}
        self.inconclusive = 0
        self._inv = [m.inverse() for m in spec.maps]

    def _alive(self, psi: Similitude) -> bool:
        return self.hull.distance(self.hull.image(psi)) == 0

    def suffix_maps(self, theta):
        r = self.spec.r_min
        out = []
        for z in self.spec.child_suffixes(theta):
            m = self.spec.word_map(z)
            out.append((m, m.inverse(), theta * m.ratio / r))
        return out

    def shares(self, theta_x, theta_v, psi: Similitude) -> bool:
        root = (theta_x, theta_v, psi.key)
        hit = self.cache.get(root)
        if hit is not None:
            return hit
        seen = {root}
        stack = [(theta_x, theta_v, psi)]
        answer = False
        while stack and not answer:
            tx, tv, p = stack.pop()
            for ma, ma_inv, tx2 in self.suffix_maps(tx):
                for mb, _, tv2 in self.suffix_maps(tv):
                    p2 = ma_inv.compose(p).compose(mb)
                    if p2.ratio == 1 and p2.is_identity():
                        answer = True
                        break
                    if not self._alive(p2):
                        continue
                    state = (tx2, tv2, p2.key)
                    if state not in seen:
                        seen.add(state)
                        stack.append((tx2, tv2, p2))
                if answer:
                    break
            if len(seen) > self.cap:
                self.inconclusive += 1
                answer = True
        self.cache[root] = answer
        return answer


def vertex_keys(snapshot: Snapshot) -> list:
    """Per-vertex class key ``(theta, frozenset of relative-map keys)``."""
    keys = []
    if not snapshot.quotient:
        return [(v.theta, frozenset()) for v in snapshot.vertices]
    oracle = _ShareOracle(snapshot.spec, snapshot.hull)
    for ids in snapshot.levels:
        hulls = {v: snapshot.vertex_hull(v) for v in ids}
        order = sorted(ids, key=lambda v: hulls[v].lo[0])
        near = {v: [] for v in ids}
        for pos, a in enumerate(order):
            for b in order[pos + 1 :]:
                if hulls[b].lo[0] > hulls[a].hi[0]:
                    break
                if hulls[a].distance(hulls[b]) == 0:
                    near[a].append(b)
                    near[b].append(a)
        for x in ids:
            vx = snapshot.vertices[x]
            inv = vx.map.inverse()
            rel = set()
            for v in near[x]:
                if v >= x:
                    continue
                vv = snapshot.vertices[v]
                psi = inv.compose(vv.map)
                if oracle.shares(vx.theta, vv.theta, psi):
                    rel.add(psi.key)
            keys.append((vx.theta, frozenset(rel)))
    return keys


# -- conjugacy certificates -----------------------------------------------------

@dataclass(frozen=True)
class ConjugacyCertificate:
    source: Component
    target: Component
    pairs: tuple  # (source vertex id, target vertex id)
    conjugator: Similitude

    def to_json(self, snapshot: Snapshot) -> dict:
        return {
            "source": snapshot.component_words(self.source),
            "target": snapshot.component_words(self.target),
            "pairs": [[snapshot.label(a), snapshot.label(b)] for a, b in self.pairs],
            "conjugator": self.conjugator.to_json(),
        }


def verify_certificate(snapshot: Snapshot, cert: ConjugacyCertificate, vertex_class=None) -> bool:
    """Independent re-check of a certificate against the snapshot."""
    g = dict(cert.pairs)
    if sorted(g) != list(cert.source.vertices) or sorted(g.values()) != list(cert.target.vertices):
        return False
    expected = snapshot.level_ratio ** (cert.target.level - cert.source.level)
    if cert.conjugator.ratio != expected:
        return False
    for x, y in g.items():
        if not cert.conjugator.compose(snapshot.vertices[x].map).equals(snapshot.vertices[y].map):
            return False
        if {g[u] for u in snapshot.adj[x]} != set(snapshot.adj[y]):
            return False
        if vertex_class is not None and vertex_class[x] != vertex_class[y]:
            return False
    if snapshot.quotient:
        ordered = [g[x] for x in cert.source.vertices]
        if ordered != sorted(ordered):
            return False
    return True


def conjugacy_equivalent(snapshot: Snapshot, t1: Component, t2: Component, vertex_class=None):
    """Search for a certificate carrying ``t1`` onto ``t2``; None when there is none."""
    if len(t1) != len(t2):
        return None
    ratio = snapshot.level_ratio ** (t2.level - t1.level)
    verts = snapshot.vertices
    a0 = t1.vertices[0]
    a0_inv = verts[a0].map.inverse()
    by_key = {verts[y].map.key: y for y in t2.vertices}
    for y0 in t2.vertices:
        h = verts[y0].map.compose(a0_inv)
        if h.ratio != ratio:
            continue
        g = {}
        for x in t1.vertices:
            y = by_key.get(h.compose(verts[x].map).key)
            if y is None or y in g.values():
                break
            g[x] = y
        else:
            cert = ConjugacyCertificate(t1, t2, tuple(sorted(g.items())), h)
            if verify_certificate(snapshot, cert, vertex_class):
                return cert
    return None


# -- class table ------------------------------------------------------------------

@dataclass
class ClassTable:
    status: str  # "Simple" | "NotStabilized"
    depth: int
    window: int
    component_reps: list  # Component per class
    vertex_reps: list  # vertex id per class
    A: tuple
    B: tuple
    u: tuple
    component_class: dict  # Component.id -> class index (0-based)
    vertex_class: list  # vertex id -> class index
    certificates: dict  # Component.id -> ConjugacyCertificate onto its representative
    class_levels: tuple  # level of first appearance per component class
    vertex_class_levels: tuple
    notes: list = field(default_factory=list)
    snapshot: Snapshot | None = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.component_reps)

    @property
    def n(self) -> int:
        return len(self.vertex_reps)

    @property
    def simple(self) -> bool:
        return self.status == "Simple"

    def representative_sizes(self) -> list:
        return [len(c) for c in self.component_reps]

    def to_json(self) -> dict:
        snap = self.snapshot
        return {
            "status": self.status,
            "depth": self.depth,
            "window": self.window,
            "quotient": snap.quotient if snap else None,
            "step": snap.step if snap else 1,
            "component_classes": [
                {"index": i + 1, "level": c.level, "representative": snap.component_words(c)}
                for i, c in enumerate(self.component_reps)
            ],
            "vertex_classes": [
                {
                    "index": i + 1,
                    "level": snap.vertices[v].level,
                    "representative": snap.label(v),
                    "theta": format_rational(snap.vertices[v].theta),
                }
                for i, v in enumerate(self.vertex_reps)
            ],
            "A": [list(r) for r in self.A],
            "B": [list(r) for r in self.B],
            "u": [list(r) for r in self.u],
            "notes": list(self.notes),
        }


def _shortlex(snapshot: Snapshot, ids) -> tuple:
    return min((len(w), w) for v in ids for w in snapshot.vertices[v].words)


def _offspring_map(snapshot: Snapshot) -> dict:
    """Component.id -> list of offspring components, via the retained parent."""
    out = {c.id: [] for n in range(snapshot.depth + 1) for c in snapshot.components(n)}
    for n in range(1, snapshot.depth + 1):
        for c in snapshot.components(n):
            parents = {snapshot.component_of(p).id for v in c.vertices for p in snapshot.parents[v]}
            if len(parents) != 1:
                raise InvariantViolation(f"component {snapshot.component_words(c)} has ancestors in two components")
            out[parents.pop()].append(c)
    return out


class _Signatures:
    """Interned finite-depth signatures used only to refute equivalence."""

    def __init__(self, snapshot: Snapshot, vertex_class: list, offspring: dict):
        self.snap = snapshot
        self.vclass = vertex_class
        self.offspring = offspring
        self._intern: dict = {}
        self._memo: dict = {}
        self._vmemo: dict = {}

    def _id(self, obj) -> int:
        return self._intern.setdefault(obj, len(self._intern))

    def component(self, c: Component, depth: int, top: bool = True) -> int:
        key = (c.id, depth, top)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        snap = self.snap
        desc = tuple(
            sorted(
                (
                    self.vclass[v],
                    len(snap.adj[v]),
                    len(snap.children[v]),
                    0 if top else len(snap.parents[v]),
                )
                for v in c.vertices
            )
        )
        kids = ()
        if depth > 0:
            kids = tuple(sorted(self.component(o, depth - 1, False) for o in self.offspring[c.id]))
        sig = self._id(("C", len(c), desc, kids))
        self._memo[key] = sig
        return sig

    def vertex(self, v: int, depth: int) -> int:
        key = (v, depth)
        hit = self._vmemo.get(key)
        if hit is not None:
            return hit
        kids = ()
        if depth > 0:
            kids = tuple(sorted(self.vertex(c, depth - 1) for c in self.snap.children[v]))
        sig = self._id(("V", len(self.snap.children[v]), kids))
        self._vmemo[key] = sig
        return sig


def _classify_vertices(snapshot: Snapshot, window: int, notes: list):
    keys = vertex_keys(snapshot)
    D = snapshot.depth
    sigs = _Signatures(snapshot, [0] * snapshot.n_vertices, {})
    key_class: dict = {}
    reps: list = []
    levels: list = []
    vclass = [0] * snapshot.n_vertices
    ambiguous = False
    for n, ids in enumerate(snapshot.levels):
        d = min(window, D - n)
        for v in sorted(ids, key=lambda v: _shortlex(snapshot, [v])):
            k = keys[v]
            if k not in key_class:
                sv = sigs.vertex(v, d)
                clash = [i for i, r in enumerate(reps) if sigs.vertex(r, d) == sv]
                if clash and n < D:
                    ambiguous = True
                    notes.append(
                        f"vertex {snapshot.label(v)} (level {n}) has a new key but is not refuted "
                        f"against class t{clash[0] + 1} at depth {d}"
                    )
                key_class[k] = len(reps)
                reps.append(v)
                levels.append(n)
            vclass[v] = key_class[k]
    return vclass, reps, levels, ambiguous


def classify(snapshot: Snapshot, window: int = DEFAULT_WINDOW) -> ClassTable:
    """Component and vertex classes of a built snapshot (raw, quotient or subsampled)."""
    D = snapshot.depth
    if window < 1:
        raise ValueError("window must be at least 1")
    if D < window + 2:
        raise ValueError(f"classification needs depth >= window + 2 = {window + 2}, got {D}")
    notes: list = []
    vclass, vreps, vlevels, ambiguous = _classify_vertices(snapshot, window, notes)
    offspring = _offspring_map(snapshot)
    sigs = _Signatures(snapshot, vclass, offspring)

    reps: list = []
    clevels: list = []
    cclass: dict = {}
    certs: dict = {}
    for n in range(D + 1):
        d = min(window, D - n)
        comps = sorted(snapshot.components(n), key=lambda c: _shortlex(snapshot, c.vertices))
        for c in comps:
            found = None
            unrefuted = []
            for i, rep in enumerate(reps):
                cert = conjugacy_equivalent(snapshot, c, rep, vclass)
                if cert is not None:
                    found = i
                    certs[c.id] = cert
                    break
                if sigs.component(c, d) == sigs.component(rep, d):
                    unrefuted.append(i)
            if found is None:
                if unrefuted and n < D:
                    ambiguous = True
                    notes.append(
                        f"component {snapshot.component_words(c)} (level {n}) neither certified nor "
                        f"refuted against class T{unrefuted[0] + 1}"
                    )
                found = len(reps)
                reps.append(c)
                clevels.append(n)
            cclass[c.id] = found

    m, k = len(reps), len(vreps)
    A = [[0] * m for _ in range(m)]
    B = [[0] * k for _ in range(k)]
    u = [[0] * k for _ in range(m)]
    for i, rep in enumerate(reps):
        for v in rep.vertices:
            u[i][vclass[v]] += 1
        if rep.level < D:
            for o in offspring[rep.id]:
                A[i][cclass[o.id]] += 1
    for i, v in enumerate(vreps):
        if snapshot.vertices[v].level < D:
            for c in snapshot.children[v]:
                B[i][vclass[c]] += 1

    late = [lv for lv in clevels + vlevels if lv > D - window]
    status = "Simple"
    if ambiguous:
        status = "NotStabilized"
    if late:
        status = "NotStabilized"
        notes.append(f"new classes appeared at level {max(late)}, inside the last {window} levels")

    if status == "Simple":
        _replay(snapshot, reps, vreps, A, B, cclass, vclass, offspring)
        if not necessary_identity(A, B, u):
            raise InvariantViolation("A u^t != u^t B on a simple table")

    return ClassTable(
        status=status,
        depth=D,
        window=window,
        component_reps=reps,
        vertex_reps=vreps,
        A=tuple(map(tuple, A)),
        B=tuple(map(tuple, B)),
        u=tuple(map(tuple, u)),
        component_class=cclass,
        vertex_class=vclass,
        certificates=certs,
        class_levels=tuple(clevels),
        vertex_class_levels=tuple(vlevels),
        notes=notes,
        snapshot=snapshot,
    )


def _replay(snapshot, reps, vreps, A, B, cclass, vclass, offspring) -> None:
    """Every component and vertex below the last level must reproduce its class row."""
    D = snapshot.depth
    for n in range(D):
        for c in snapshot.components(n):
            row = [0] * len(reps)
            for o in offspring[c.id]:
                row[cclass[o.id]] += 1
            if row != A[cclass[c.id]]:
                raise InvariantViolation(
                    f"component {snapshot.component_words(c)} has offspring profile {row}, "
                    f"class row is {A[cclass[c.id]]}"
                )
        for v in snapshot.levels[n]:
            row = [0] * len(vreps)
            for ch in snapshot.children[v]:
                row[vclass[ch]] += 1
            if row != B[vclass[v]]:
                raise InvariantViolation(
                    f"vertex {snapshot.label(v)} has child profile {row}, class row is {B[vclass[v]]}"
                )


def necessary_identity(A, B, u) -> bool:
    """A u^t == u^t B, exactly."""
    m, n = len(A), len(B)
    for i in range(m):
        for j in range(n):
            lhs = sum(A[i][k] * u[k][j] for k in range(m))
            rhs = sum(u[i][k] * B[k][j] for k in range(n))
            if lhs != rhs:
                return False
    return True


# -- tree isomorphism from a shared B ----------------------------------------------

@dataclass(frozen=True)
class IsomorphismPlan:
    B: tuple
    depth: int
    pairs: tuple  # (label in tree 1, label in tree 2), level by level

    def to_json(self) -> dict:
        return {
            "B": [list(r) for r in self.B],
            "rule": "root to root; children of paired vertices paired class by class in lexicographic order",
            "depth": self.depth,
            "pairs": [list(p) for p in self.pairs],
        }


def tree_isomorphism_by_B(t1: ClassTable, t2: ClassTable, depth: int | None = None):
    """Level-preserving isomorphism of the two reduced trees, or None if B differs."""
    if not (t1.simple and t2.simple):
        return None
    if t1.B != t2.B:
        return None
    s1, s2 = t1.snapshot, t2.snapshot
    depth = min(s1.depth, s2.depth) if depth is None else depth
    pairs = [(0, 0)]
    frontier = [(0, 0)]
    for _ in range(depth):
        nxt = []
        for x, y in frontier:
            by_class: dict = {}
            for c in s2.children[y]:
                by_class.setdefault(t2.vertex_class[c], []).append(c)
            for c in s1.children[x]:
                bucket = by_class.get(t1.vertex_class[c])
                if not bucket:
                    raise InvariantViolation("shared B but child classes do not match")
                nxt.append((c, bucket.pop(0)))
            if any(by_class.values()):
                raise InvariantViolation("shared B but child classes do not match")
        pairs.extend(nxt)
        frontier = nxt
    labelled = tuple((s1.label(a), s2.label(b)) for a, b in pairs)
    return IsomorphismPlan(t1.B, depth, labelled)


def class_profile(table: ClassTable) -> dict:
    """Counts of components per class per level; handy for reports."""
    snap = table.snapshot
    out = []
    for n in range(snap.depth + 1):
        cnt = Counter(table.component_class[c.id] for c in snap.components(n))
        out.append([cnt.get(i, 0) for i in range(table.m)])
    return {"components_per_class": out}
