"""Adaptive wrappers around non-adaptive sketches, and a demonstration
that the wrapper beats every non-adaptive benchmark for diagonal
operators between Hilbert spaces.

A sketch is a pair (N, Phi) with continuous N: F -> R^m and a
reconstruction Phi: R^m -> Y.  Whatever worst-case error the pair
achieves with m numbers of simultaneous information, the wrapper
achieves with 1 + n_of(m) adaptive queries: one query for the norm of
the sketch vector, then the recovery protocol run on the secret vector
N(f) at a precision delta fine enough that Phi moves by at most eps.
Since the recovery queries are 1-Lipschitz functionals of N(f) and N is
continuous, every query is a continuous measurement of f itself.

The demo instantiates this for S = diag(sigma) on the unit ball of a
d-dimensional Hilbert space: the best non-adaptive error with n queries
is sigma_{n+1}, while the wrapper with n + 1 queries sketches the top
m = 2^(n-2) coordinates and lands near sigma_{m+1}, doubly exponential
in n instead of singly.  Everything is truncated to dimension d; the
weight sigma_{d+1} of the discarded tail is carried along and reported,
not ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import recovery
from .errors import (
    ContractViolation,
    DomainError,
    OutsideCoveringError,
    TruncationLimitError,
)
from .num import to_fraction, to_fraction_vec
from .partition import PartitionSpec

Vec = tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# sketch wrapping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SketchProblem:
    """A non-adaptive sketch (N, Phi) plus the continuity data needed to
    wrap it.

    ``modulus`` certifies uniform continuity of Phi on bounded cubes:
    whenever two sketch vectors differ by at most modulus(eps) in the
    max norm, their reconstructions differ by at most eps in ``metric``.
    It must be positive for positive eps; it is the caller's burden
    because no algorithm can conjure a modulus from a black-box Phi.
    """

    m: int
    N: Callable[[Vec], Vec]
    Phi: Callable[[Vec], Vec]
    modulus: Callable[[Fraction], Fraction]
    metric: Callable[[Vec, Vec], Fraction]

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("sketch dimension must be at least 1")


@dataclass(frozen=True)
class WrapResult:
    output: Vec
    sketch_hat: Vec
    queries: int
    norm_query: Fraction
    delta: Fraction


def sup_metric(a: Vec, b: Vec) -> Fraction:
    return max(abs(x - y) for x, y in zip(a, b))


def l2_metric_sq(a: Vec, b: Vec) -> Fraction:
    """Squared Euclidean distance; kept squared so it stays rational."""
    return sum((x - y) ** 2 for x, y in zip(a, b))


def wrap_sketch(problem: SketchProblem, f: Sequence, eps,
                mode: str = "exact") -> WrapResult:
    """Run the adaptive wrapper on one input.

    Query 1 is R = max-norm of N(f).  The remaining queries recover the
    secret vector N(f) to precision delta = min(modulus(eps), 1), and
    the answer is Phi of the recovered vector, within eps of Phi(N(f)).
    At most 1 + n_of(m) queries are spent in total; the bisection can
    come in under budget, so the count is reported, not assumed.
    """
    eps = to_fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    delta = to_fraction(problem.modulus(eps))
    if delta <= 0:
        raise ContractViolation("modulus must return a positive precision")
    delta = min(delta, Fraction(1))
    y = tuple(problem.N(tuple(to_fraction(v) for v in f)))
    if len(y) != problem.m:
        raise ContractViolation("sketch map returned the wrong dimension")
    norm_query = max(abs(v) for v in y)
    spec = PartitionSpec.create(problem.m, eps=delta, mode=mode)
    result, _oracle = recovery.recover_point(y, spec)
    out = tuple(problem.Phi(result.x_hat))
    return WrapResult(
        output=out,
        sketch_hat=result.x_hat,
        queries=1 + result.queries_used,
        norm_query=norm_query,
        delta=delta,
    )


def wrap_budget(m: int) -> int:
    """Query budget of the wrapper: one norm query plus the recovery."""
    return 1 + recovery.n_of(m)


# ---------------------------------------------------------------------------
# partition-of-unity reconstruction over a covering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Covering:
    """Open max-norm balls C_i covering a sampled sketch range, with a
    representative output g_i for each ball."""

    centers: tuple[Vec, ...]
    radii: tuple[Fraction, ...]
    reps: tuple[Vec, ...]

    def __post_init__(self):
        if not (len(self.centers) == len(self.radii) == len(self.reps)):
            raise DomainError("centers, radii, reps must align")
        if self.M < 1:
            raise DomainError("a covering needs at least one ball")
        if any(r <= 0 for r in self.radii):
            raise DomainError("ball radii must be positive")
        dims = {len(c) for c in self.centers}
        if len(dims) != 1:
            raise DomainError("ball centers must share a dimension")
        odims = {len(g) for g in self.reps}
        if len(odims) != 1:
            raise DomainError("representatives must share a dimension")

    @property
    def M(self) -> int:
        return len(self.centers)

    @property
    def n(self) -> int:
        return len(self.centers[0])


def pou_weights(cov: Covering, sample: Sequence[Sequence], y: Sequence
                ) -> tuple[Fraction, ...]:
    """Partition-of-unity weights at y over the covering.

    weight_i is dist(y, sample outside C_i) normalized to sum to one.
    Distances are max-norm minima over the finite sample, computed in
    float64 and then normalized exactly, so the weights are nonnegative
    rationals summing to exactly 1.  A ball whose complement misses the
    sample entirely has infinite raw weight; those balls share the mass
    uniformly and everything else gets zero, the limit of the finite
    formula.  If every raw weight is zero, y sits outside the sampled
    covering and no reconstruction is defined there.
    """
    pts = np.asarray(
        [[float(v) for v in p] for p in sample], dtype=np.float64
    )
    if pts.ndim != 2 or pts.shape[1] != cov.n:
        raise DomainError("sample points must match the covering dimension")
    yv = np.asarray([float(v) for v in y], dtype=np.float64)
    if yv.shape != (cov.n,):
        raise DomainError("query point must match the covering dimension")
    raw: list[Fraction | None] = []
    for center, radius in zip(cov.centers, cov.radii):
        cvec = np.array([float(v) for v in center])
        outside = np.abs(pts - cvec).max(axis=1) >= float(radius)
        if not outside.any():
            raw.append(None)
            continue
        d = float(np.abs(pts[outside] - yv).max(axis=1).min())
        raw.append(Fraction(d))
    if any(r is None for r in raw):
        unbounded = [i for i, r in enumerate(raw) if r is None]
        share = Fraction(1, len(unbounded))
        return tuple(
            share if i in set(unbounded) else Fraction(0)
            for i in range(cov.M)
        )
    total = sum(raw)
    if total == 0:
        raise OutsideCoveringError(
            "query point touches the sample outside every ball"
        )
    return tuple(r / total for r in raw)


def pou_reconstruct(cov: Covering, sample: Sequence[Sequence], y: Sequence
                    ) -> Vec:
    """Evaluate the continuous reconstruction at y: the convex
    combination of the representatives g_i under ``pou_weights``."""
    w = pou_weights(cov, sample, y)
    dim = len(cov.reps[0])
    out = [Fraction(0)] * dim
    for wi, g in zip(w, cov.reps):
        if wi == 0:
            continue
        for j in range(dim):
            out[j] += wi * g[j]
    return tuple(out)


# ---------------------------------------------------------------------------
# diagonal operators between Hilbert spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalOperator:
    """S(f) = (sigma_k f_k) on the unit ball, truncated to d weights.

    ``tail`` is sigma_{d+1} of the untruncated operator (zero for a
    genuinely finite-rank one); it quantifies what the truncation
    discards and is surfaced by every report built on this type.
    """

    weights: tuple[Fraction, ...]
    tail: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.weights:
            raise DomainError("need at least one weight")
        if any(w <= 0 for w in self.weights):
            raise DomainError("weights must be positive")
        if any(a < b for a, b in zip(self.weights, self.weights[1:])):
            raise DomainError("weights must be nonincreasing")
        if not 0 <= self.tail <= self.weights[-1]:
            raise DomainError("tail weight must extend the decay")

    @property
    def d(self) -> int:
        return len(self.weights)

    def apply(self, f: Sequence[Fraction]) -> Vec:
        if len(f) != self.d:
            raise DomainError("input dimension mismatch")
        return tuple(w * v for w, v in zip(self.weights, f))

    @classmethod
    def geometric(cls, ratio=Fraction(1, 2), d: int = 64) -> "DiagonalOperator":
        ratio = to_fraction(ratio)
        if not 0 < ratio < 1:
            raise DomainError("ratio must lie in (0, 1)")
        return cls(weights=tuple(ratio ** k for k in range(1, d + 1)),
                   tail=ratio ** (d + 1))

    @classmethod
    def harmonic(cls, d: int = 64) -> "DiagonalOperator":
        return cls(weights=tuple(Fraction(1, k) for k in range(1, d + 1)),
                   tail=Fraction(1, d + 1))


def s_numbers(op: DiagonalOperator, n: int) -> tuple[Fraction, Fraction]:
    """Bernstein and Kolmogorov numbers (b_n, d_n) of the operator.

    Between Hilbert spaces both equal the (n+1)-th weight, so the pair
    is returned for interface symmetry and always coincides.  Indices
    at or past the truncation are refused rather than silently zero.
    """
    if n < 0:
        raise DomainError("s-number index must be nonnegative")
    if n >= op.d:
        raise TruncationLimitError(
            f"s-number index {n} reaches past the truncation d={op.d}"
        )
    return op.weights[n], op.weights[n]


# ---------------------------------------------------------------------------
# the speedup demo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DemoTrial:
    trial: int
    queries: int
    error: Fraction


@dataclass(frozen=True)
class DemoReport:
    """Outcome of one adaptive-vs-non-adaptive run at a fixed budget n.

    error_bound is the guarantee sigma_{m+1} + eps; benchmark is the
    best non-adaptive error sigma_{n+1} with the same number of queries
    (minus the one extra the basic wrapper spends).  truncation_tail is
    sigma_{d+1}: bounds tighter than it are artifacts of the truncation.
    """

    n: int
    m: int
    d: int
    eps: Fraction
    trials: tuple[DemoTrial, ...]
    max_error: Fraction
    error_bound: Fraction
    benchmark: Fraction
    max_queries: int
    query_budget: int
    truncation_tail: Fraction

    @property
    def beats_benchmark(self) -> bool:
        return self.max_error <= self.benchmark


def _ceil_sqrt(m: int) -> int:
    r = math.isqrt(m)
    return r if r * r == m else r + 1


def _unit_ball_point(rng: np.random.Generator, d: int) -> Vec:
    """A random point of the Euclidean unit ball, certified inside.

    Drawn uniformly in float64, shrunk a hair, then checked against the
    exact rational norm; the check has never fired but costs nothing.
    """
    v = rng.standard_normal(d)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return (Fraction(0),) * d
    radius = float(rng.uniform()) ** (1.0 / d)
    scale = radius * (1.0 - 2.0 ** -40) / norm
    f = tuple(Fraction(x * scale) for x in v)
    while sum(x * x for x in f) > 1:
        f = tuple(x * Fraction(999, 1000) for x in f)
    return f


def hilbert_speedup_demo(op: DiagonalOperator, n: int, eps,
                         trials: int = 1000, seed: int = 0,
                         mode: str = "exact") -> DemoReport:
    """Measure the wrapper against the best non-adaptive error.

    With n + 1 adaptive queries the wrapper sketches the top m = 2^(n-2)
    coordinates of S(f) and zero-pads; any trial erring beyond
    sigma_{m+1} + eps breaks the guarantee and raises.  How the achieved
    maximum compares to the non-adaptive benchmark sigma_{n+1} is data,
    not a theorem about random inputs, so it is reported on the result
    instead of enforced.  The refinement that saves one further query by
    aligning the norm measurement with the coloring scale is not
    implemented; budgets here are the basic n + 1.
    """
    if n < 2:
        raise DomainError("the wrapper needs a budget of at least 2")
    if trials < 1:
        raise DomainError("need at least one trial")
    eps = to_fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    m = 2 ** (n - 2)
    if m >= op.d:
        raise TruncationLimitError(
            f"sketch dimension {m} reaches the truncation d={op.d}; "
            f"raise d or lower n"
        )
    root = _ceil_sqrt(m)
    weights = op.weights

    def sketch(f: Vec) -> Vec:
        return tuple(weights[k] * f[k] for k in range(m))

    def embed(y: Vec) -> Vec:
        return tuple(y) + (Fraction(0),) * (op.d - m)

    problem = SketchProblem(
        m=m,
        N=sketch,
        Phi=embed,
        # embedding is an isometry, so the l2 gap is at most sqrt(m)
        # times the max-norm gap; an integer root keeps delta rational
        modulus=lambda e: e / root,
        metric=l2_metric_sq,
    )
    rng = np.random.default_rng(seed)
    budget = wrap_budget(m)
    bound = weights[m] + eps
    bound_sq = bound * bound
    rows = []
    max_err_sq = Fraction(0)
    max_queries = 0
    for t in range(trials):
        f = _unit_ball_point(rng, op.d)
        res = wrap_sketch(problem, f, eps, mode=mode)
        if res.queries > budget:
            raise ContractViolation(
                f"trial {t} spent {res.queries} queries, budget {budget}"
            )
        err_sq = problem.metric(res.output, op.apply(f))
        if err_sq > bound_sq:
            raise ContractViolation(
                f"trial {t} erred beyond sigma_{m + 1} + eps"
            )
        rows.append(DemoTrial(trial=t, queries=res.queries,
                              error=_frac_sqrt_upper(err_sq)))
        max_err_sq = max(max_err_sq, err_sq)
        max_queries = max(max_queries, res.queries)
    return DemoReport(
        n=n,
        m=m,
        d=op.d,
        eps=eps,
        trials=tuple(rows),
        max_error=_frac_sqrt_upper(max_err_sq),
        error_bound=bound,
        benchmark=weights[n] if n < op.d else op.tail,
        max_queries=max_queries,
        query_budget=budget,
        truncation_tail=op.tail,
    )


def _frac_sqrt_upper(x: Fraction) -> Fraction:
    """A rational upper bound on sqrt(x), slack below 2^-119.

    Comparisons against rational thresholds stay exact when made on the
    squares; this is only for reporting and for conservative checks
    where an upper bound errs on the safe side.
    """
    if x < 0:
        raise DomainError("negative square")
    if x == 0:
        return Fraction(0)
    scale = 2 ** 120
    val = x.numerator * scale * scale // x.denominator
    return Fraction(math.isqrt(val) + 1, scale)
