"""Contractive similitudes, words over an IFS, and the ratio-threshold level sets.

In dimension one everything is exact: ratios, signs and translations are
:class:`fractions.Fraction`.  In higher dimensions the orthogonal part and the
translation are floats and equality is decided with :data:`FLOAT_TOL`.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

from .errors import CapExceeded, DimensionMismatch, SpecError

Number = Union[Fraction, float]
Word = tuple  # tuple[int, ...], symbols are 1..N; () is the root

FLOAT_TOL = 1e-12
ROOT: Word = ()


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer, or a decimal string into a Fraction."""
    if isinstance(value, bool):
        raise SpecError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"not a rational: {value!r}") from exc
    raise SpecError(f"rationals must be given as strings 'p/q', got {value!r}")


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


def _matvec(a, v):
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def _transpose(a):
    return tuple(zip(*a))


def _identity(d):
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


class Similitude:
    """The map ``x -> ratio * O x + translation``.

    ``ratio`` is always a positive Fraction.  Conjugators and relative maps
    built from IFS maps may have ratio >= 1, so contractivity is checked by
    :class:`IFS`, not here.
    """

    def __init__(self, ratio, orth=None, translation=(0,)):
        ratio = Fraction(ratio)
        if ratio <= 0:
            raise SpecError(f"similitude ratio must be positive, got {ratio}")
        translation = tuple(translation)
        d = len(translation)
        if orth is None:
            orth = _identity(d)
        elif isinstance(orth, int):
            orth = ((orth,),)
        orth = tuple(tuple(row) for row in orth)
        if len(orth) != d or any(len(row) != d for row in orth):
            raise DimensionMismatch("orthogonal part and translation disagree on dimension")
        if d == 1:
            if orth[0][0] not in (1, -1):
                raise SpecError("1D orthogonal part must be +1 or -1")
            orth = ((int(orth[0][0]),),)
            translation = (Fraction(translation[0]),)
        else:
            orth = tuple(tuple(float(v) for v in row) for row in orth)
            translation = tuple(float(v) for v in translation)
            prod = _matmul(orth, _transpose(orth))
            for i in range(d):
                for j in range(d):
                    if abs(prod[i][j] - (1.0 if i == j else 0.0)) > 1e-9:
                        raise SpecError("orthogonal part is not orthogonal")
        self.ratio = ratio
        self.orth = orth
        self.translation = translation

    @property
    def dimension(self) -> int:
        return len(self.translation)

    @property
    def exact(self) -> bool:
        return self.dimension == 1

    @property
    def sign(self) -> int:
        if self.dimension != 1:
            raise DimensionMismatch("sign is only defined in dimension 1")
        return self.orth[0][0]

    def __call__(self, x):
        if self.dimension == 1:
            if not isinstance(x, (tuple, list)):
                return self.ratio * self.orth[0][0] * x + self.translation[0]
            x = x[0]
            return (self.ratio * self.orth[0][0] * x + self.translation[0],)
        ox = _matvec(self.orth, x)
        r = float(self.ratio)
        return tuple(r * v + b for v, b in zip(ox, self.translation))

    def compose(self, other: "Similitude") -> "Similitude":
        """``self ∘ other``."""
        if self.dimension != other.dimension:
            raise DimensionMismatch("cannot compose similitudes of different dimension")
        r = self.ratio * other.ratio
        orth = _matmul(self.orth, other.orth)
        if self.dimension == 1:
            b = (self.ratio * self.orth[0][0] * other.translation[0] + self.translation[0],)
        else:
            rb = _matvec(self.orth, other.translation)
            b = tuple(float(self.ratio) * v + t for v, t in zip(rb, self.translation))
        return Similitude(r, orth, b)

    def inverse(self) -> "Similitude":
        ot = _transpose(self.orth)
        inv_r = 1 / self.ratio
        if self.dimension == 1:
            b = (-self.orth[0][0] * self.translation[0] * inv_r,)
        else:
            b = tuple(-float(inv_r) * v for v in _matvec(ot, self.translation))
        return Similitude(inv_r, ot, b)

    @cached_property
    def key(self):
        """Hashable identity.  Exact in 1D; snapped to a FLOAT_TOL grid otherwise."""
        if self.dimension == 1:
            return (self.ratio, self.orth[0][0], self.translation[0])
        snap = lambda v: round(v / FLOAT_TOL)
        return (
            self.ratio,
            tuple(snap(v) for row in self.orth for v in row),
            tuple(snap(v) for v in self.translation),
        )

    def equals(self, other: "Similitude", tol: float = FLOAT_TOL) -> bool:
        if self.dimension != other.dimension:
            raise DimensionMismatch("cannot compare similitudes of different dimension")
        if self.ratio != other.ratio:
            return False
        if self.dimension == 1:
            return self.orth == other.orth and self.translation == other.translation
        return all(
            abs(a - b) <= tol
            for ra, rb in zip(self.orth, other.orth)
            for a, b in zip(ra, rb)
        ) and all(abs(a - b) <= tol for a, b in zip(self.translation, other.translation))

    def is_identity(self) -> bool:
        return self.equals(Similitude(1, _identity(self.dimension), (0,) * self.dimension))

    def __eq__(self, other):
        return isinstance(other, Similitude) and self.dimension == other.dimension and self.equals(other)

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        if self.dimension == 1:
            s = "-" if self.sign < 0 else ""
            return f"Similitude({s}{self.ratio}*x + {self.translation[0]})"
        return f"Similitude(ratio={self.ratio}, orth={self.orth}, translation={self.translation})"

    def to_json(self) -> dict:
        if self.dimension == 1:
            return {
                "ratio": format_rational(self.ratio),
                "reflect": self.sign < 0,
                "translate": [format_rational(self.translation[0])],
            }
        return {
            "ratio": format_rational(self.ratio),
            "orthogonal": [list(row) for row in self.orth],
            "translate": list(self.translation),
        }


def compose(f: Similitude, g: Similitude) -> Similitude:
    return f.compose(g)


def maps_equal(f: Similitude, g: Similitude) -> bool:
    return f.equals(g)


def affine_1d(ratio, translation, reflect: bool = False) -> Similitude:
    """Shorthand for ``x -> ±ratio*x + translation`` on the line."""
    return Similitude(Fraction(ratio), -1 if reflect else 1, (Fraction(translation),))


class IFS:
    """A finite family of contractive similitudes together with the edge constant kappa."""

    def __init__(self, maps: Sequence[Similitude], kappa=0, name: str | None = None):
        maps = tuple(maps)
        if len(maps) < 2:
            raise SpecError("an IFS needs at least two maps")
        dims = {m.dimension for m in maps}
        if len(dims) != 1:
            raise DimensionMismatch("all maps of an IFS must share one dimension")
        for i, m in enumerate(maps, 1):
            if not 0 < m.ratio < 1:
                raise SpecError(f"map {i} has ratio {m.ratio}, expected a value in (0, 1)")
        kappa = Fraction(kappa)
        if kappa < 0:
            raise SpecError("kappa must be nonnegative")
        self.maps = maps
        self.kappa = kappa
        self.name = name
        self._map_cache: dict = {(): Similitude(1, _identity(self.dimension), (0,) * self.dimension)}
        self._suffix_cache: dict = {}

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def dimension(self) -> int:
        return self.maps[0].dimension

    @property
    def exact(self) -> bool:
        return self.dimension == 1

    @cached_property
    def ratios(self) -> tuple:
        return tuple(m.ratio for m in self.maps)

    @cached_property
    def r_min(self) -> Fraction:
        return min(self.ratios)

    def with_kappa(self, kappa) -> "IFS":
        return IFS(self.maps, kappa, self.name)

    def word_map(self, word: Word) -> Similitude:
        cached = self._map_cache.get(word)
        if cached is None:
            cached = self.word_map(word[:-1]).compose(self.maps[word[-1] - 1])
            self._map_cache[word] = cached
        return cached

    def word_ratio(self, word: Word) -> Fraction:
        r = Fraction(1)
        for i in word:
            r *= self.maps[i - 1].ratio
        return r

    def check_word(self, word: Word) -> None:
        for i in word:
            if not 1 <= i <= self.n_maps:
                raise SpecError(f"symbol {i} out of range 1..{self.n_maps}")

    def child_suffixes(self, theta: Fraction) -> tuple:
        """Suffixes z such that x z is a child of a vertex x with ``r_x = theta * r**|x|``.

        These are the z with ``theta*r_z <= r < theta*r_{z-}``, in lexicographic order.
        """
        theta = Fraction(theta)
        hit = self._suffix_cache.get(theta)
        if hit is not None:
            return hit
        r = self.r_min
        out: list = []

        def walk(prefix, t):
            for i, ri in enumerate(self.ratios, 1):
                ti = t * ri
                if ti <= r:
                    out.append(prefix + (i,))
                else:
                    walk(prefix + (i,), ti)

        walk((), theta)
        result = tuple(out)
        self._suffix_cache[theta] = result
        return result

    def theta(self, word: Word, level: int) -> Fraction:
        """Normalised ratio ``r_x / r**level``; lies in (r, 1] for words of that level."""
        return self.word_ratio(word) / self.r_min ** level

    def level_membership(self, word: Word, n: int) -> bool:
        if n < 0:
            raise ValueError("level index must be nonnegative")
        if not word:
            return n == 0
        threshold = self.r_min ** n
        return self.word_ratio(word) <= threshold < self.word_ratio(word[:-1])

    def levels(self, max_level: int, cap: int | None = None):
        """Breadth-first level sets X_0..X_max_level.

        Returns ``(words, parents)`` where ``words[n]`` is the lexicographically
        ordered list of X_n and ``parents[n][k]`` is the index in ``words[n-1]``
        of the parent of ``words[n][k]``.
        """
        words = [[ROOT]]
        parents = [[None]]
        thetas = [Fraction(1)]
        r = self.r_min
        for n in range(1, max_level + 1):
            lw, lp, lt = [], [], []
            for idx, (x, th) in enumerate(zip(words[-1], thetas)):
                for z in self.child_suffixes(th):
                    lw.append(x + z)
                    lp.append(idx)
                    lt.append(th * self.word_ratio(z) / r)
                if cap is not None and len(lw) > cap:
                    raise CapExceeded(
                        f"level {n} exceeds {cap} vertices; lower the depth or raise the cap "
                        "(--max-vertices / AUGTREE_MAX_VERTICES)"
                    )
            words.append(lw)
            parents.append(lp)
            thetas = lt
        return words, parents

    def __eq__(self, other):
        return (
            isinstance(other, IFS)
            and self.kappa == other.kappa
            and len(self.maps) == len(other.maps)
            and all(a.equals(b) for a, b in zip(self.maps, other.maps))
        )

    def __hash__(self):
        return hash((self.kappa, tuple(m.key for m in self.maps)))

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"IFS({label}{list(self.maps)!r}, kappa={self.kappa})"

    def to_json(self) -> dict:
        d = {
            "dimension": self.dimension,
            "kappa": format_rational(self.kappa),
            "maps": [m.to_json() for m in self.maps],
        }
        if self.name:
            d["name"] = self.name
        return d


def level_membership(x: Word, n: int, spec: IFS) -> bool:
    return spec.level_membership(tuple(x), n)


def enumerate_level(n: int, spec: IFS, cap: int | None = None) -> list:
    if n < 0:
        raise ValueError("level index must be nonnegative")
    return spec.levels(n, cap)[0][n]


def word_label(word: Word, n_maps: int = 9) -> str:
    if not word:
        return ""
    if n_maps <= 9:
        return "".join(str(i) for i in word)
    return ".".join(str(i) for i in word)


def parse_word(label: str, n_maps: int = 9) -> Word:
    label = label.strip()
    if label in ("", "root", "ϑ"):
        return ROOT
    if "." in label or n_maps > 9:
        return tuple(int(s) for s in label.split("."))
    return tuple(int(c) for c in label)


def _map_from_json(obj, dimension: int, index: int) -> Similitude:
    if not isinstance(obj, dict):
        raise SpecError(f"maps[{index}] must be an object")
    unknown = set(obj) - {"ratio", "reflect", "translate", "orthogonal"}
    if unknown:
        raise SpecError(f"maps[{index}] has unknown keys {sorted(unknown)}")
    if "ratio" not in obj:
        raise SpecError(f"maps[{index}] is missing 'ratio'")
    ratio = parse_rational(obj["ratio"])
    translate = obj.get("translate", ["0"] * dimension)
    if not isinstance(translate, list) or len(translate) != dimension:
        raise SpecError(f"maps[{index}].translate must list {dimension} coordinates")
    reflect = bool(obj.get("reflect", False))
    if dimension == 1:
        if "orthogonal" in obj:
            raise SpecError("1D maps use 'reflect', not 'orthogonal'")
        return Similitude(ratio, -1 if reflect else 1, (parse_rational(translate[0]),))
    orth = obj.get("orthogonal")
    if orth is None:
        orth = [[1.0 if i == j else 0.0 for j in range(dimension)] for i in range(dimension)]
    orth = [list(map(float, row)) for row in orth]
    if reflect:
        orth[0] = [-v for v in orth[0]]
    coords = [float(parse_rational(t)) if isinstance(t, str) else float(t) for t in translate]
    return Similitude(ratio, orth, coords)


def ifs_from_json(data: dict) -> IFS:
    if not isinstance(data, dict):
        raise SpecError("IFS spec must be a JSON object")
    dimension = data.get("dimension", 1)
    if not isinstance(dimension, int) or dimension < 1:
        raise SpecError("'dimension' must be a positive integer")
    maps = data.get("maps")
    if not isinstance(maps, list):
        raise SpecError("'maps' must be a list")
    return IFS(
        [_map_from_json(m, dimension, i) for i, m in enumerate(maps)],
        parse_rational(data.get("kappa", "0")),
        data.get("name"),
    )


def loads_ifs(text: str) -> IFS:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return ifs_from_json(data)


def load_ifs(path) -> IFS:
    with open(path, encoding="utf-8") as fh:
        return loads_ifs(fh.read())


def ratio_multiset(spec: IFS) -> tuple:
    return tuple(sorted(spec.ratios))


def prefixes(word: Word) -> Iterable[Word]:
    for k in range(len(word) + 1):
        yield word[:k]
