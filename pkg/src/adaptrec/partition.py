"""Colored lattice partition of R^m.

The unit-scale partition assigns every point a level k in {0, ..., m}:
level k is reached when at least m-k coordinates lie within delta[k] of
the integer lattice, and earlier levels have been carved away.  Cells of
level k are boxes: m-k coordinates pinned near integer anchors, the rest
ranging over open bands between consecutive integers, never closer than
delta[k-1] to either end.  Colors are levels shifted to 1-based.

Working at precision eps means evaluating everything at y = x/eps and
scaling distances back by eps.  In exact mode all arithmetic happens on
integers over a common denominator, so distances, memberships and ties
are decided exactly; float64 mode trades that for speed and carries a
documented tolerance.

Cells of one color are pairwise separated by at least the constant
``separation_lower_bound(delta)``; each cell has max-norm diameter
strictly below one.  Those two facts make one well-chosen 1-Lipschitz
function per color enough to identify the cell: see ``measurement``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import backend
from .errors import ContractViolation, DomainError, NotACellError
from .num import lcm_denoms, scale_all, to_fraction, to_fraction_vec

HALF = Fraction(1, 2)


def default_delta_schedule(m: int) -> tuple[Fraction, ...]:
    """Threshold schedule delta[k] = (m+1-k) / (2(m+2)), k = 0..m.

    Strictly decreasing from just below 1/2, with uniform steps
    1/(2(m+2)); the resulting same-color separation is exactly that step.
    """
    if m < 1:
        raise DomainError("dimension m must be at least 1")
    den = 2 * (m + 2)
    return tuple(Fraction(m + 1 - k, den) for k in range(m + 1))


def separation_lower_bound(delta: tuple[Fraction, ...]) -> Fraction:
    """Proven lower bound on the max-norm gap between same-color cells.

    Two distinct cells of level k differ in an anchor (gap 1-2*delta[k]),
    an origin (gap 2*delta[k-1]), or a pinned coordinate set
    (gap delta[k-1]-delta[k]); level 0 only in an anchor.
    """
    c = 1 - 2 * delta[0]
    for k in range(1, len(delta)):
        c = min(c, 1 - 2 * delta[k], 2 * delta[k - 1], delta[k - 1] - delta[k])
    return c


@dataclass(frozen=True)
class PartitionSpec:
    """Partition of R^m at precision eps.

    ``delta`` is the threshold schedule on the unit scale, ``c`` a
    certified lower bound on same-color cell separation (also unit
    scale).  ``mode`` selects exact rational arithmetic or float64 with
    zero-test tolerance ``zero_tol``.
    """

    m: int
    eps: Fraction
    delta: tuple[Fraction, ...]
    c: Fraction
    mode: str = "exact"
    max_float_index: int = 2**40

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("dimension m must be at least 1")
        if self.mode not in ("exact", "float64"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.eps <= 0:
            raise DomainError("precision eps must be positive")
        if len(self.delta) != self.m + 1:
            raise DomainError("need one threshold per level, m+1 in total")
        if not self.delta[0] < HALF:
            raise DomainError("delta[0] must stay below 1/2")
        if self.delta[-1] <= 0:
            raise DomainError("thresholds must stay positive")
        for a, b in zip(self.delta, self.delta[1:]):
            if not b < a:
                raise DomainError("thresholds must strictly decrease")
        if not 0 < self.c <= separation_lower_bound(self.delta):
            raise DomainError(
                "c must be a positive lower bound on the cell separation"
            )

    @classmethod
    def create(cls, m, eps=1, mode="exact", delta=None, c=None,
               max_float_index=2**40) -> "PartitionSpec":
        eps = to_fraction(eps)
        if delta is None:
            delta = default_delta_schedule(m)
        else:
            delta = tuple(to_fraction(d) for d in delta)
        if c is None:
            c = separation_lower_bound(delta)
        else:
            c = to_fraction(c)
        return cls(m=m, eps=eps, delta=delta, c=c, mode=mode,
                   max_float_index=max_float_index)

    @property
    def n_colors(self) -> int:
        return self.m + 1

    @property
    def eps_f(self) -> float:
        return float(self.eps)

    @property
    def c_f(self) -> float:
        return float(self.c)

    @property
    def delta_f(self) -> tuple[float, ...]:
        return tuple(float(d) for d in self.delta)

    @property
    def zero_tol(self) -> float:
        """Zero-test tolerance for float64 mode: 1e-9 * min(1, c*eps)."""
        return 1e-9 * min(1.0, self.c_f * self.eps_f)


@dataclass(frozen=True)
class ColorSet:
    """Nonempty subset of the colors 1..m+1."""

    colors: frozenset[int]

    def __post_init__(self):
        if not self.colors:
            raise ContractViolation("color set must be nonempty")
        for r in self.colors:
            if not isinstance(r, int) or r < 1:
                raise ContractViolation(f"colors are positive integers, got {r!r}")

    @classmethod
    def of(cls, *colors: int) -> "ColorSet":
        return cls(frozenset(colors))

    def check(self, spec: PartitionSpec) -> None:
        if max(self.colors) > spec.n_colors:
            raise ContractViolation(
                f"color set {sorted(self.colors)} exceeds {spec.n_colors} colors"
            )

    def __iter__(self):
        return iter(sorted(self.colors))

    def __len__(self):
        return len(self.colors)


@dataclass(frozen=True)
class CellId:
    """One cell of the unit-scale partition.

    ``pinned`` lists the anchored coordinate indices (0-based, sorted),
    ``anchors`` their integer anchors in the same order, ``origins`` the
    floor integers of the free coordinates in increasing coordinate
    order.  The level equals the number of free coordinates.
    """

    level: int
    pinned: tuple[int, ...]
    anchors: tuple[int, ...]
    origins: tuple[int, ...]

    def __post_init__(self):
        if self.level != len(self.origins):
            raise NotACellError("level must equal the number of free coordinates")
        if len(self.pinned) != len(self.anchors):
            raise NotACellError("need one anchor per pinned coordinate")
        m = self.dim
        prev = -1
        for j in self.pinned:
            if not prev < j < m:
                raise NotACellError("pinned indices must be sorted and in range")
            prev = j

    @property
    def dim(self) -> int:
        return len(self.pinned) + len(self.origins)

    @property
    def color(self) -> int:
        return self.level + 1

    def check(self, spec: PartitionSpec) -> None:
        if self.dim != spec.m or self.level > spec.m:
            raise NotACellError(
                f"cell of dimension {self.dim}, level {self.level} does not "
                f"belong to an m={spec.m} partition"
            )


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def scaled_point(x, spec: PartitionSpec):
    """(q, t, M): y = x/eps and the thresholds as integers over M.

    M also absorbs the denominators of c and 1/2 so separating-score
    windows stay integral.
    """
    y = tuple(f / spec.eps for f in to_fraction_vec(x, spec.m))
    M = lcm_denoms(y, spec.delta, (spec.c, HALF))
    return scale_all(y, M), scale_all(spec.delta, M), M


def float_point(x, spec: PartitionSpec):
    return tuple(float(to_fraction(v)) / spec.eps_f for v in x)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


def level_of(x, spec: PartitionSpec) -> int:
    """Level of the region containing x.  Total: every point has one."""
    q, t, M = scaled_point(x, spec)
    return backend.level_of(q, t, M)


def cell_of(x, spec: PartitionSpec) -> CellId:
    """The unique cell containing x: its level, pinned set, anchors, origins."""
    q, t, M = scaled_point(x, spec)
    k = backend.level_of(q, t, M)
    pinned, anchors, origins = backend.locate_cell(q, t, M, k)
    return CellId(level=k, pinned=pinned, anchors=anchors, origins=origins)


def dist_to_colors(x, colors: ColorSet, spec: PartitionSpec):
    """Max-norm distance from x to the union of the given color classes.

    Exact mode returns a Fraction, float64 mode a float.  The distance is
    taken to closures, so it vanishes exactly on boundary points as well.
    """
    colors.check(spec)
    if spec.mode == "float64":
        y = float_point(x, spec)
        ld = backend.level_dists_f(y, spec.delta_f)
        return spec.eps_f * min(ld[r - 1] for r in colors)
    q, t, M = scaled_point(x, spec)
    ld = backend.level_dists(q, t, M)
    return spec.eps * Fraction(min(ld[r - 1] for r in colors), M)


def dist_to_cell(x, cell: CellId, spec: PartitionSpec):
    """Max-norm distance from x to the closure of one cell."""
    cell.check(spec)
    if spec.mode == "float64":
        y = float_point(x, spec)
        d = backend.cell_dist_f(y, spec.delta_f, cell.level, cell.pinned,
                                cell.anchors, cell.origins)
        return spec.eps_f * d
    q, t, M = scaled_point(x, spec)
    d = backend.cell_dist(q, t, M, cell.level, cell.pinned, cell.anchors,
                          cell.origins)
    return spec.eps * Fraction(d, M)


def representative(cell: CellId, spec: PartitionSpec):
    """Center point of a cell, scaled by eps.

    Pinned coordinates sit on their anchors, free ones at band midpoints;
    any point of the cell is within eps of it because cell diameters stay
    below one on the unit scale.
    """
    cell.check(spec)
    vals: list[Fraction] = [Fraction(0)] * cell.dim
    for j, a in zip(cell.pinned, cell.anchors):
        vals[j] = spec.eps * a
    free = [j for j in range(cell.dim) if j not in set(cell.pinned)]
    for j, o in zip(free, cell.origins):
        vals[j] = spec.eps * (o + HALF)
    if spec.mode == "float64":
        return tuple(float(v) for v in vals)
    return tuple(vals)


def cell_extent(cell: CellId, spec: PartitionSpec):
    """Per-coordinate bounding interval of a cell's closure (unit scale).

    Pinned coordinates span [a - delta[k], a + delta[k]], free ones the
    closed band [o + delta[k-1], o + 1 - delta[k-1]].
    """
    cell.check(spec)
    k = cell.level
    out: list[tuple[Fraction, Fraction]] = [None] * cell.dim
    for j, a in zip(cell.pinned, cell.anchors):
        out[j] = (a - spec.delta[k], a + spec.delta[k])
    free = [j for j in range(cell.dim) if j not in set(cell.pinned)]
    for j, o in zip(free, cell.origins):
        out[j] = (o + spec.delta[k - 1], o + 1 - spec.delta[k - 1])
    return out


# ---------------------------------------------------------------------------
# cell index encoding: a bijection cells-of-one-color <-> positive integers
# ---------------------------------------------------------------------------


def _fold(vals: list[int]) -> int:
    enc = vals[-1]
    for v in reversed(vals[:-1]):
        enc = backend.pair(v, enc)
    return enc


def _unfold(enc: int, m: int) -> list[int]:
    vals = []
    for _ in range(m - 1):
        v, enc = backend.unpair(enc)
        vals.append(v)
    vals.append(enc)
    return vals


def encode_cell(cell: CellId, spec: PartitionSpec) -> int:
    """Index of a cell among the cells of its color, starting at 1.

    Zigzags every anchor and origin, folds them with the classic pairing
    (a+b)(a+b+1)/2 + b in coordinate order, then interleaves the rank of
    the pinned set.  The all-zero level-0 cell gets index 1.
    """
    cell.check(spec)
    m = cell.dim
    vals = [0] * m
    for j, a in zip(cell.pinned, cell.anchors):
        vals[j] = backend.zigzag(a)
    free = [j for j in range(m) if j not in set(cell.pinned)]
    for j, o in zip(free, cell.origins):
        vals[j] = backend.zigzag(o)
    n_subsets = math.comb(m, m - cell.level)
    rank = backend.subset_rank(cell.pinned, m)
    return _fold(vals) * n_subsets + rank + 1


def decode_cell(index: int, color: int, spec: PartitionSpec) -> CellId:
    """Inverse of encode_cell; every index >= 1 names a nonempty cell."""
    if not isinstance(index, int) or index < 1:
        raise DomainError(f"cell index must be a positive integer, got {index!r}")
    if not 1 <= color <= spec.n_colors:
        raise DomainError(f"color must lie in 1..{spec.n_colors}, got {color}")
    m = spec.m
    k = color - 1
    n_subsets = math.comb(m, m - k)
    enc, rank = divmod(index - 1, n_subsets)
    pinned = backend.subset_unrank(rank, m, m - k)
    vals = _unfold(enc, m)
    pin_set = set(pinned)
    anchors = tuple(backend.unzigzag(vals[j]) for j in pinned)
    origins = tuple(backend.unzigzag(vals[j]) for j in range(m) if j not in pin_set)
    return CellId(level=k, pinned=pinned, anchors=anchors, origins=origins)
