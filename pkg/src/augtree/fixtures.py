"""Reference systems used by the tests, the acceptance suite and the CLI (``--fixture``)."""

from __future__ import annotations

from fractions import Fraction as F

from .similitude import IFS, affine_1d


def k_lambda(lam) -> IFS:
    """{x/4, (x+3/4)/4, (x+lam)/4, (x+3)/4} on [0, 1]; S_14 = S_21 for every lam."""
    lam = F(lam)
    q = F(1, 4)
    return IFS(
        [affine_1d(q, 0), affine_1d(q, F(3, 16)), affine_1d(q, lam / 4), affine_1d(q, F(3, 4))],
        name=f"K_{lam}",
    )


def overlapping_quarter() -> IFS:
    """The four-map quarter system {x/4, x/4+3/16, x/4+7/16, x/4+3/4}."""
    return k_lambda(F(7, 4))


def touching_triple(r=F(1, 3)) -> IFS:
    """{r x, r^2 x + 1 - 2r^2, r^2 x + 1 - r^2}: pieces 2 and 3 touch at 1 - r^2."""
    r = F(r)
    return IFS([affine_1d(r, 0), affine_1d(r * r, 1 - 2 * r * r), affine_1d(r * r, 1 - r * r)], name=f"touching({r})")


def dust_triple(r=F(1, 3)) -> IFS:
    """Same ratios as :func:`touching_triple` with the middle piece moved so all pieces are disjoint."""
    r = F(r)
    return IFS(
        [affine_1d(r, 0), affine_1d(r * r, (1 + r - 2 * r * r) / 2), affine_1d(r * r, 1 - r * r)],
        name=f"dust({r})",
    )


def cantor() -> IFS:
    return IFS([affine_1d(F(1, 3), 0), affine_1d(F(1, 3), F(2, 3))], name="cantor")


def unit_interval() -> IFS:
    return IFS([affine_1d(F(1, 2), 0), affine_1d(F(1, 2), F(1, 2))], name="interval")


FINITE_TYPE_MATRIX = ((2, 1, 1), (1, 2, 1), (0, 2, 1))

REARRANGE_QUARTER = {
    "A": [[1, 1, 0], [1, 2, 1], [1, 2, 2]],
    "B": [[3, 1], [2, 1]],
    "u": [[1, 0], [2, 1], [3, 1]],
    "C": [
        [[1, 1, 0]],
        [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
        [[1, 1, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]],
    ],
    "C_squared": [
        [[2, 3, 1]],
        [[3, 4, 0], [1, 2, 1], [0, 1, 3]],
        [[3, 4, 0], [0, 1, 3], [0, 1, 3], [2, 3, 0]],
    ],
}

REARRANGE_TOUCHING = {
    "A": [[1, 1, 1, 0, 0], [1, 1, 2, 1, 0], [1, 0, 1, 0, 1], [1, 1, 3, 2, 0], [1, 1, 1, 0, 2]],
    "B": [[3, 2], [1, 2]],
    "u": [[1, 0], [2, 0], [0, 2], [3, 0], [1, 2]],
    "C": [
        [[1, 1, 1, 0, 0]],
        [[1, 1, 1, 0, 0], [0, 0, 1, 1, 0]],
        [[1, 0, 1, 0, 0], [0, 0, 0, 0, 1]],
        [[1, 1, 1, 0, 0], [0, 0, 1, 1, 0], [0, 0, 1, 1, 0]],
        [[1, 1, 1, 0, 0], [0, 0, 0, 0, 1], [0, 0, 0, 0, 1]],
    ],
}

FIXTURES = {
    "quarter": overlapping_quarter,
    "k15_8": lambda: k_lambda(F(15, 8)),
    "k2": lambda: k_lambda(2),
    "touching": touching_triple,
    "dust": dust_triple,
    "cantor": cantor,
    "interval": unit_interval,
}
