"""Adaptive recovery to precision eps in ceil(log2(m+1)) + 1 queries.

The protocol bisects on the color of the cell containing the unknown
vector using color-distance queries (the value is zero exactly when the
queried colors include the right one), then asks the single separating
question for the landed color.  That answer equals c*eps / (2*index) for
the containing cell's index, so the cell, and with it a representative
within eps of every one of its points, can be written down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backend
from .errors import ContractViolation, DomainError, PrecisionExceededError
from .measurement import color_distance, make_oracle, separating
from .num import INT64_SAFE, lcm_denoms, scale_all, to_fraction, to_fraction_vec
from .partition import CellId, ColorSet, PartitionSpec, decode_cell, representative


def n_of(m: int) -> int:
    """Query budget of the protocol: ceil(log2(m+1)) + 1."""
    if m < 1:
        raise DomainError("dimension m must be at least 1")
    return m.bit_length() + 1


@dataclass(frozen=True)
class RecoveryResult:
    x_hat: tuple
    cell: CellId
    color: int
    index: int
    queries_used: int
    error_bound: Fraction | float


def recover(oracle, spec: PartitionSpec) -> RecoveryResult:
    """Run the protocol against any oracle exposing ``query(descriptor)``."""
    m = spec.m
    tol = spec.zero_tol if spec.mode == "float64" else 0
    lo, hi = 1, spec.n_colors
    queries = 0
    while hi > lo:
        half = (hi - lo + 2) // 2
        probe = ColorSet(frozenset(range(lo, lo + half)))
        value = oracle.query(color_distance(probe))
        queries += 1
        if value <= tol:
            hi = lo + half - 1
        else:
            lo = lo + half
    color = lo
    value = oracle.query(separating(color))
    queries += 1

    if spec.mode == "exact":
        ratio = spec.c * spec.eps / (2 * to_fraction(value))
        if ratio.denominator != 1 or ratio < 1:
            raise ContractViolation(
                "separating answer does not decode to a cell index; the "
                "oracle and the partition disagree"
            )
        index = int(ratio)
        bound = spec.eps
    else:
        if value <= 0:
            raise PrecisionExceededError("separating answer must be positive")
        raw = spec.c_f * spec.eps_f / (2.0 * float(value))
        index = round(raw)
        good = 1 <= index <= spec.max_float_index
        if good:
            drift = abs(spec.c_f * spec.eps_f / (2.0 * index) - float(value))
            good = drift <= n_of(m) * spec.zero_tol
        if not good:
            raise PrecisionExceededError(
                "cell index %r is outside the certified float64 range; "
                "rerun in exact mode" % raw
            )
        bound = spec.eps_f + n_of(m) * spec.zero_tol

    cell = decode_cell(index, color, spec)
    x_hat = representative(cell, spec)
    return RecoveryResult(
        x_hat=x_hat,
        cell=cell,
        color=color,
        index=index,
        queries_used=queries,
        error_bound=bound,
    )


def recover_point(x, spec: PartitionSpec, budget: int | None = None):
    """Recover a concrete vector: builds the oracle, runs the protocol.

    Returns ``(result, oracle)`` so callers can inspect the transcript.
    """
    if budget is None:
        budget = n_of(spec.m)
    oracle = make_oracle(x, spec, budget=budget)
    result = recover(oracle, spec)
    return result, oracle


# ---------------------------------------------------------------------------
# bulk driver
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    """Vectorized recovery outcomes for a list of points.

    ``rep2`` holds cell representatives in half-units on the unit scale
    (even entries are pinned anchors doubled, odd ones band midpoints
    doubled), so ``x_hat = eps * rep2 / 2``.  ``within_bound`` certifies
    the per-point error bound: exactly in exact mode, up to the float
    tolerance budget otherwise.
    """

    spec: PartitionSpec
    levels: "np.ndarray"
    rep2: "np.ndarray"
    queries: "np.ndarray"
    within_bound: "np.ndarray"

    def __len__(self):
        return len(self.levels)

    def cell(self, i: int) -> CellId:
        rep = self.rep2[i]
        pinned = tuple(j for j in range(self.spec.m) if rep[j] % 2 == 0)
        anchors = tuple(int(rep[j]) // 2 for j in pinned)
        origins = tuple(int(rep[j] - 1) // 2 for j in range(self.spec.m)
                        if rep[j] % 2 != 0)
        return CellId(level=int(self.levels[i]), pinned=pinned,
                      anchors=anchors, origins=origins)

    def x_hat(self, i: int):
        if self.spec.mode == "float64":
            return tuple(self.spec.eps_f * float(v) / 2.0 for v in self.rep2[i])
        return tuple(self.spec.eps * Fraction(int(v), 2) for v in self.rep2[i])


def recover_many(points, spec: PartitionSpec) -> BatchResult:
    """Run the protocol over many points at once.

    Exact mode scales rows to a shared denominator and dispatches the
    ones that fit 64-bit arithmetic to the bulk kernel; rows too large
    for it (or whole batches above the kernel's dimension limit) fall
    back to the per-point engine, bigints and all.  The split is greedy
    in input order: a row joins the kernel group while the running
    common denominator times the running magnitude bound stays safe, so
    a few wild rows cost only themselves, not the whole batch.  Exact
    results are identical to ``recover_point`` either way.

    Float64 mode simulates the protocol on the known points directly,
    so unlike :func:`recover_point` it carries no certified cell-index
    ceiling: the reconstruction never round-trips through the separating
    value.
    """
    m = spec.m
    if spec.mode == "float64":
        Y = np.array([[float(v) for v in row] for row in points],
                     dtype=np.float64) / spec.eps_f
        Y = Y.reshape(len(points), m)
        lvl, _cv, rep2, ok, nq = backend.bulk_recover_f(
            Y, spec.delta_f, spec.zero_tol)
        tol_y = n_of(m) * spec.zero_tol / spec.eps_f
        good = ok & (np.abs(Y - rep2 / 2.0).max(axis=1) <= 1.0 + tol_y)
        return BatchResult(spec, lvl, rep2, nq, good)

    vecs = [to_fraction_vec(row, m) for row in points]
    ys = [tuple(v / spec.eps for v in row) for row in vecs]
    kernel_rows: list[int] = []
    scalar_rows: list[int] = []
    M = lcm_denoms(spec.delta)
    bound = Fraction(0)
    for i, row in enumerate(ys):
        if m > 62:
            scalar_rows.append(i)
            continue
        M_row = math.lcm(M, lcm_denoms(row))
        b_row = max(bound, *(abs(v) for v in row))
        if M_row * b_row < INT64_SAFE:
            M, bound = M_row, b_row
            kernel_rows.append(i)
        else:
            scalar_rows.append(i)

    n = len(ys)
    if not scalar_rows:
        Q = np.array([scale_all(row, M) for row in ys], dtype=np.int64)
        Q = Q.reshape(n, m)
        t = scale_all(spec.delta, M)
        lvl, _cv, rep2, nq = backend.bulk_recover_exact(Q, t, M)
        good = np.abs(2 * Q - rep2 * M).max(axis=1) <= 2 * M
        return BatchResult(spec, lvl, rep2, nq, good)

    levels = np.empty(n, dtype=np.int64)
    rep2 = np.empty((n, m), dtype=object)
    queries = np.empty(n, dtype=np.int64)
    good = np.empty(n, dtype=bool)
    if kernel_rows:
        Q = np.array([scale_all(ys[i], M) for i in kernel_rows],
                     dtype=np.int64).reshape(len(kernel_rows), m)
        t = scale_all(spec.delta, M)
        lvl, _cv, r2, nq = backend.bulk_recover_exact(Q, t, M)
        ok = np.abs(2 * Q - r2 * M).max(axis=1) <= 2 * M
        for pos, i in enumerate(kernel_rows):
            levels[i] = lvl[pos]
            rep2[i] = [int(v) for v in r2[pos]]
            queries[i] = nq[pos]
            good[i] = ok[pos]
    for i in scalar_rows:
        res, _ = recover_point(vecs[i], spec)
        levels[i] = res.cell.level
        rr = [0] * m
        for j, a in zip(res.cell.pinned, res.cell.anchors):
            rr[j] = 2 * a
        free = [j for j in range(m) if j not in set(res.cell.pinned)]
        for j, o in zip(free, res.cell.origins):
            rr[j] = 2 * o + 1
        rep2[i] = rr
        queries[i] = res.queries_used
        err = max(abs(a - b) for a, b in zip(vecs[i], res.x_hat))
        good[i] = err <= res.error_bound
    return BatchResult(spec, levels, rep2, queries, good)
