"""Sketch wrapping, partition-of-unity reconstruction, s-numbers, and
the adaptive speedup demo."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptrec.errors import (
    ContractViolation,
    DomainError,
    OutsideCoveringError,
    TruncationLimitError,
)
from adaptrec.recovery import n_of
from adaptrec.widths import (
    Covering,
    DiagonalOperator,
    SketchProblem,
    _frac_sqrt_upper,
    hilbert_speedup_demo,
    l2_metric_sq,
    pou_reconstruct,
    pou_weights,
    s_numbers,
    sup_metric,
    wrap_budget,
    wrap_sketch,
)


def identity_problem(m: int) -> SketchProblem:
    return SketchProblem(
        m=m,
        N=lambda f: f,
        Phi=lambda y: y,
        modulus=lambda e: e,
        metric=sup_metric,
    )


# ---------------------------------------------------------------------------
# wrapping
# ---------------------------------------------------------------------------


def test_wrap_identity_sketch_recovers_input():
    problem = identity_problem(2)
    res = wrap_sketch(problem, (F(3, 7), F(-12, 5)), F(1, 100))
    assert sup_metric(res.output, (F(3, 7), F(-12, 5))) <= F(1, 100)
    assert res.queries <= wrap_budget(2)
    assert res.norm_query == F(12, 5)


def test_wrap_zero_input():
    res = wrap_sketch(identity_problem(3), (0, 0, 0), F(1, 10))
    assert res.norm_query == 0
    assert sup_metric(res.output, (F(0),) * 3) <= F(1, 10)


def test_wrap_linear_sketch_meets_eps():
    """Phi a genuine linear reconstruction: its sup-norm Lipschitz
    constant is the max absolute row sum, and the wrapper promise holds
    with modulus e -> e / L."""
    A = ((F(2), F(-1)), (F(1, 2), F(3)))
    L = max(sum(abs(v) for v in row) for row in A)

    def N(f):
        return (f[0] + f[1], f[0] - f[1])

    def Phi(y):
        return tuple(sum(a * v for a, v in zip(row, y)) for row in A)

    problem = SketchProblem(m=2, N=N, Phi=Phi,
                            modulus=lambda e: e / L, metric=sup_metric)
    rng = np.random.default_rng(2)
    eps = F(1, 50)
    for _ in range(300):
        f = tuple(F(int(v), 64) for v in rng.integers(-256, 256, size=2))
        res = wrap_sketch(problem, f, eps)
        assert sup_metric(res.output, Phi(N(f))) <= eps
        assert res.queries <= wrap_budget(2)


def test_wrap_budget_formula():
    for m in (1, 2, 3, 4, 7, 1023):
        assert wrap_budget(m) == 1 + n_of(m)


def test_wrap_clamps_coarse_modulus():
    problem = SketchProblem(
        m=1, N=lambda f: f, Phi=lambda y: y,
        modulus=lambda e: e * 10 ** 9, metric=sup_metric,
    )
    res = wrap_sketch(problem, (F(1, 3),), F(1, 2))
    assert res.delta == 1


def test_wrap_rejects_bad_inputs():
    with pytest.raises(DomainError):
        wrap_sketch(identity_problem(1), (F(0),), F(0))
    broken = SketchProblem(m=1, N=lambda f: f, Phi=lambda y: y,
                           modulus=lambda e: F(0), metric=sup_metric)
    with pytest.raises(ContractViolation):
        wrap_sketch(broken, (F(0),), F(1, 10))
    wrong_dim = SketchProblem(m=2, N=lambda f: (f[0],), Phi=lambda y: y,
                              modulus=lambda e: e, metric=sup_metric)
    with pytest.raises(ContractViolation):
        wrap_sketch(wrong_dim, (F(0), F(0)), F(1, 10))
    with pytest.raises(DomainError):
        SketchProblem(m=0, N=lambda f: f, Phi=lambda y: y,
                      modulus=lambda e: e, metric=sup_metric)


# ---------------------------------------------------------------------------
# partition of unity over a covering
# ---------------------------------------------------------------------------


def two_ball_covering():
    return Covering(
        centers=((F(0),), (F(1),)),
        radii=(F(3, 4), F(3, 4)),
        reps=((F(0), F(0)), (F(1), F(1))),
    )


SAMPLE = [(F(-1, 2),), (F(0),), (F(1, 4),), (F(1, 2),),
          (F(3, 4),), (F(1),), (F(3, 2),)]


def test_pou_weights_are_convex_coefficients():
    cov = two_ball_covering()
    rng = np.random.default_rng(9)
    for _ in range(200):
        y = (F(int(rng.integers(-40, 140)), 100),)
        try:
            w = pou_weights(cov, SAMPLE, y)
        except OutsideCoveringError:
            continue
        assert all(wi >= 0 for wi in w)
        assert sum(w) == 1


def test_pou_picks_pure_representative_deep_inside():
    cov = two_ball_covering()
    assert pou_weights(cov, SAMPLE, (F(0),)) == (1, 0)
    assert pou_reconstruct(cov, SAMPLE, (F(0),)) == (F(0), F(0))
    assert pou_weights(cov, SAMPLE, (F(1),)) == (0, 1)
    assert pou_reconstruct(cov, SAMPLE, (F(1),)) == (F(1), F(1))


def test_pou_blends_in_the_overlap():
    cov = two_ball_covering()
    assert pou_weights(cov, SAMPLE, (F(1, 2),)) == (F(1, 2), F(1, 2))
    assert pou_reconstruct(cov, SAMPLE, (F(1, 2),)) == (F(1, 2), F(1, 2))


def test_pou_single_ball_covering_everything():
    cov = Covering(centers=((F(0),),), radii=(F(100),), reps=((F(7),),))
    assert pou_weights(cov, SAMPLE, (F(1, 3),)) == (1,)
    assert pou_reconstruct(cov, SAMPLE, (F(1, 3),)) == (F(7),)


def test_pou_outside_covering_raises():
    cov = two_ball_covering()
    sample = SAMPLE + [(F(3),)]
    with pytest.raises(OutsideCoveringError):
        pou_weights(cov, sample, (F(3),))


def test_pou_dimension_checks():
    cov = two_ball_covering()
    with pytest.raises(DomainError):
        pou_weights(cov, [(F(0), F(0))], (F(0),))
    with pytest.raises(DomainError):
        pou_weights(cov, SAMPLE, (F(0), F(0)))


def test_covering_validation():
    with pytest.raises(DomainError):
        Covering(centers=((F(0),),), radii=(F(1), F(2)), reps=((F(0),),))
    with pytest.raises(DomainError):
        Covering(centers=((F(0),),), radii=(F(0),), reps=((F(0),),))
    with pytest.raises(DomainError):
        Covering(centers=((F(0),), (F(0), F(0))), radii=(F(1), F(1)),
                 reps=((F(0),), (F(0),)))
    with pytest.raises(DomainError):
        Covering(centers=((F(0),), (F(1),)), radii=(F(1), F(1)),
                 reps=((F(0),), (F(0), F(0))))


# ---------------------------------------------------------------------------
# diagonal operators and s-numbers
# ---------------------------------------------------------------------------


def test_s_numbers_match_svd_oracle():
    op = DiagonalOperator.geometric(F(1, 2), d=10)
    mat = np.diag([float(w) for w in op.weights])
    svals = np.linalg.svd(mat, compute_uv=False)
    for n in range(op.d):
        b, dn = s_numbers(op, n)
        assert b == dn
        assert abs(float(b) - svals[n]) < 1e-12


def test_s_numbers_nonincreasing_and_guarded():
    op = DiagonalOperator.harmonic(d=12)
    seq = [s_numbers(op, n)[0] for n in range(op.d)]
    assert all(a >= b for a, b in zip(seq, seq[1:]))
    with pytest.raises(DomainError):
        s_numbers(op, -1)
    with pytest.raises(TruncationLimitError):
        s_numbers(op, op.d)


def test_diagonal_operator_validation():
    with pytest.raises(DomainError):
        DiagonalOperator(weights=())
    with pytest.raises(DomainError):
        DiagonalOperator(weights=(F(1), F(0)))
    with pytest.raises(DomainError):
        DiagonalOperator(weights=(F(1, 2), F(1)))
    with pytest.raises(DomainError):
        DiagonalOperator(weights=(F(1), F(1, 2)), tail=F(2, 3))
    with pytest.raises(DomainError):
        DiagonalOperator.geometric(F(3, 2))
    assert DiagonalOperator.harmonic(d=5).tail == F(1, 6)


def test_diagonal_apply():
    op = DiagonalOperator(weights=(F(1), F(1, 2)))
    assert op.apply((F(2), F(2))) == (F(2), F(1))
    with pytest.raises(DomainError):
        op.apply((F(1),))


# ---------------------------------------------------------------------------
# the speedup demo
# ---------------------------------------------------------------------------


def test_demo_beats_nonadaptive_benchmark():
    op = DiagonalOperator.geometric(F(1, 2), d=16)
    report = hilbert_speedup_demo(op, n=4, eps=F(1, 1000), trials=40, seed=1)
    assert report.m == 4
    assert report.query_budget == 1 + n_of(4)
    assert report.max_queries <= report.query_budget
    assert report.error_bound == op.weights[4] + F(1, 1000)
    assert report.max_error <= report.error_bound
    assert report.benchmark == op.weights[4]
    assert report.beats_benchmark
    assert report.truncation_tail == F(1, 2) ** 17
    assert len(report.trials) == 40
    assert all(t.error <= report.max_error for t in report.trials)


def test_demo_guards():
    op = DiagonalOperator.geometric(F(1, 2), d=16)
    with pytest.raises(TruncationLimitError):
        hilbert_speedup_demo(op, n=6, eps=F(1, 100), trials=1)
    with pytest.raises(DomainError):
        hilbert_speedup_demo(op, n=1, eps=F(1, 100), trials=1)
    with pytest.raises(DomainError):
        hilbert_speedup_demo(op, n=4, eps=F(0), trials=1)
    with pytest.raises(DomainError):
        hilbert_speedup_demo(op, n=4, eps=F(1, 100), trials=0)


# ---------------------------------------------------------------------------
# numeric helpers
# ---------------------------------------------------------------------------


def test_metrics():
    assert sup_metric((F(1), F(2)), (F(0), F(4))) == 2
    assert l2_metric_sq((F(1), F(2)), (F(0), F(4))) == 5


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=0, max_value=10 ** 9, max_denominator=10 ** 9))
def test_frac_sqrt_upper_is_tight_upper_bound(x):
    r = _frac_sqrt_upper(x)
    assert r >= 0
    assert r * r >= x
    slack = F(1, 2 ** 119)
    assert r < slack or (r - slack) ** 2 < x
