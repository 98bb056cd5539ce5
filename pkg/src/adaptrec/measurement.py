"""Measurement functionals and the query oracle.

Two families of 1-Lipschitz functions drive the recovery protocol:

* color-distance: x -> dist(x, union of some color classes), used to
  bisect on the color of the cell containing x;
* separating: one function per color r built so its value at any point
  of a color-r cell reveals that cell's index, x -> max over color-r
  cells of (c*eps / (2*index) - dist(x, cell)).

Both are max-norm Lipschitz with constant one: the first as a distance
function, the second as a supremum of shifted distance functions.  On a
color-r cell at most one term of the supremum is nonnegative because the
cells sit at least c apart, which is what makes the value decodable.

The oracle hides the unknown vector behind a query counter; everything
downstream sees only descriptors and returned values, and a transcript
can replay a past run without the vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import backend
from .errors import BudgetExhaustedError, ContractViolation, DomainError
from .num import to_fraction
from . import partition
from .partition import CellId, ColorSet, PartitionSpec


@dataclass(frozen=True)
class MeasurementDescriptor:
    """What to measure: kind 'colors' carries a ColorSet, 'sep' a color."""

    kind: str
    colors: ColorSet | None = None
    target_color: int | None = None

    def __post_init__(self):
        if self.kind == "colors":
            if self.colors is None or self.target_color is not None:
                raise ContractViolation("'colors' descriptor needs a ColorSet only")
        elif self.kind == "sep":
            if self.target_color is None or self.colors is not None:
                raise ContractViolation("'sep' descriptor needs a target color only")
            if self.target_color < 1:
                raise ContractViolation("target color must be positive")
        else:
            raise ContractViolation(f"unknown descriptor kind {self.kind!r}")


def color_distance(colors) -> MeasurementDescriptor:
    if not isinstance(colors, ColorSet):
        colors = ColorSet(frozenset(colors))
    return MeasurementDescriptor(kind="colors", colors=colors)


def separating(color: int) -> MeasurementDescriptor:
    return MeasurementDescriptor(kind="sep", target_color=color)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _lambda_star_exact(x, color: int, spec: PartitionSpec) -> Fraction:
    q, t, M = partition.scaled_point(x, spec)
    k = color - 1
    dist_here = backend.level_dists(q, t, M)[k]
    c_scaled = spec.c * M
    assert c_scaled.denominator == 1
    # any cell farther than dist_here + c/2 is dominated by the nearest
    # cell's term, so the supremum is attained inside this window
    w = dist_here + (int(c_scaled) + 1) // 2
    best = None
    nonneg = 0
    half_c_eps = spec.c * spec.eps / 2
    for pinned, anchors, origins, dist in backend.enum_cells(q, t, M, k, w):
        cell = CellId(level=k, pinned=pinned, anchors=anchors, origins=origins)
        idx = partition.encode_cell(cell, spec)
        term = half_c_eps / idx - spec.eps * Fraction(dist, M)
        if term >= 0:
            nonneg += 1
        if best is None or term > best:
            best = term
    if nonneg > 1:
        raise ContractViolation(
            "more than one nonnegative separating term; the schedule does "
            "not meet its separation bound"
        )
    assert best is not None, "window always contains the nearest cell"
    return best


def _lambda_star_float(x, color: int, spec: PartitionSpec) -> float:
    y = partition.float_point(x, spec)
    k = color - 1
    comb_mk = float(math.comb(spec.m, spec.m - k))
    val = backend.lambda_star_f(list(y), list(spec.delta_f), k, spec.c_f, comb_mk)
    return spec.eps_f * val


def evaluate(descriptor: MeasurementDescriptor, x, spec: PartitionSpec):
    """Evaluate one measurement functional at x.

    Returns a Fraction in exact mode, a float in float64 mode.
    """
    if descriptor.kind == "colors":
        return partition.dist_to_colors(x, descriptor.colors, spec)
    if descriptor.target_color > spec.n_colors:
        raise ContractViolation(
            f"color {descriptor.target_color} exceeds {spec.n_colors} colors"
        )
    if spec.mode == "float64":
        return _lambda_star_float(x, descriptor.target_color, spec)
    return _lambda_star_exact(x, descriptor.target_color, spec)


# ---------------------------------------------------------------------------
# transcripts and oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptEntry:
    q: int
    descriptor: MeasurementDescriptor
    value: Fraction | float


@dataclass
class Transcript:
    """Ordered record of queries and answers; serializes to JSON lines."""

    entries: list[TranscriptEntry] = field(default_factory=list)
    budget: int | None = None

    def append(self, descriptor, value) -> None:
        self.entries.append(TranscriptEntry(len(self.entries) + 1, descriptor, value))

    def __len__(self):
        return len(self.entries)

    def to_jsonl(self) -> str:
        lines = []
        for e in self.entries:
            row = {"q": e.q, "kind": e.descriptor.kind}
            if e.descriptor.kind == "colors":
                row["colors"] = sorted(e.descriptor.colors.colors)
            else:
                row["r"] = e.descriptor.target_color
            if isinstance(e.value, Fraction):
                row["value"] = str(e.value)
            else:
                row["value"] = float(e.value)
            lines.append(json.dumps(row))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        t = cls()
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if row["kind"] == "colors":
                desc = color_distance(row["colors"])
            else:
                desc = separating(row["r"])
            value = row["value"]
            if isinstance(value, str):
                value = Fraction(value)
            t.entries.append(TranscriptEntry(row["q"], desc, value))
        return t


class MeasurementOracle:
    """Answers adaptive queries about a hidden vector, counting them."""

    def __init__(self, x, spec: PartitionSpec, budget: int | None = None):
        self._x = tuple(to_fraction(v) for v in x)
        if len(self._x) != spec.m:
            raise DomainError(f"expected a vector of length {spec.m}")
        self.spec = spec
        self.budget = budget
        self.transcript = Transcript(budget=budget)

    @property
    def consumed(self) -> int:
        return len(self.transcript)

    def query(self, descriptor: MeasurementDescriptor):
        if self.budget is not None and self.consumed >= self.budget:
            raise BudgetExhaustedError(
                f"query budget of {self.budget} measurements exhausted"
            )
        value = evaluate(descriptor, self._x, self.spec)
        self.transcript.append(descriptor, value)
        return value


class ReplayOracle:
    """Re-answers a recorded transcript; raises if the queries diverge."""

    def __init__(self, transcript: Transcript):
        self._entries = list(transcript.entries)
        self._pos = 0

    @property
    def consumed(self) -> int:
        return self._pos

    def query(self, descriptor: MeasurementDescriptor):
        if self._pos >= len(self._entries):
            raise BudgetExhaustedError("transcript exhausted")
        entry = self._entries[self._pos]
        if entry.descriptor != descriptor:
            raise ContractViolation(
                f"replay mismatch at query {self._pos + 1}: recorded "
                f"{entry.descriptor}, requested {descriptor}"
            )
        self._pos += 1
        return entry.value


def make_oracle(x, spec: PartitionSpec, budget: int | None = None) -> MeasurementOracle:
    return MeasurementOracle(x, spec, budget)
