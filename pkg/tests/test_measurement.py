"""Measurement functionals, oracles, transcripts."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from adaptrec import measurement, partition
from adaptrec.errors import BudgetExhaustedError, ContractViolation
from adaptrec.measurement import (
    MeasurementOracle,
    ReplayOracle,
    Transcript,
    color_distance,
    evaluate,
    separating,
)
from adaptrec.partition import ColorSet, PartitionSpec, cell_of, encode_cell

F = Fraction


def fracs(max_den=40, span=6):
    return st.fractions(min_value=-span, max_value=span,
                        max_denominator=max_den)


def test_descriptor_validation():
    with pytest.raises(ContractViolation):
        measurement.MeasurementDescriptor(kind="colors")
    with pytest.raises(ContractViolation):
        measurement.MeasurementDescriptor(kind="sep")
    with pytest.raises(ContractViolation):
        measurement.MeasurementDescriptor(kind="wat", target_color=1)
    d = color_distance({2, 1})
    assert sorted(d.colors.colors) == [1, 2]
    assert separating(3).target_color == 3


def test_color_distance_matches_partition_function():
    spec = PartitionSpec.create(2)
    x = [F(1, 10), F(1, 2)]
    for colors in ({1}, {2}, {3}, {1, 3}, {1, 2, 3}):
        want = partition.dist_to_colors(x, ColorSet(frozenset(colors)), spec)
        got = evaluate(color_distance(colors), x, spec)
        assert got == want


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 5), st.data())
def test_separating_value_at_own_cell(m, data):
    """On its own color class the separating functional returns exactly
    c*eps / (2 * index): the defining identity that makes the final
    query decodable.  The other terms are all negative there."""
    x = data.draw(st.lists(fracs(), min_size=m, max_size=m))
    spec = PartitionSpec.create(m)
    cell = cell_of(x, spec)
    idx = encode_cell(cell, spec)
    val = evaluate(separating(cell.color), x, spec)
    assert val == spec.c * spec.eps / (2 * idx)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_separating_exact_vs_float(m, data):
    x = data.draw(st.lists(fracs(max_den=16, span=4), min_size=m, max_size=m))
    color = data.draw(st.integers(1, m + 1))
    exact_spec = PartitionSpec.create(m)
    float_spec = PartitionSpec.create(m, mode="float64")
    ve = evaluate(separating(color), x, exact_spec)
    vf = evaluate(separating(color), [float(v) for v in x], float_spec)
    assert abs(float(ve) - vf) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.data())
def test_separating_is_1_lipschitz_exact(m, data):
    x = data.draw(st.lists(fracs(max_den=20, span=4), min_size=m, max_size=m))
    y = data.draw(st.lists(fracs(max_den=20, span=4), min_size=m, max_size=m))
    color = data.draw(st.integers(1, m + 1))
    spec = PartitionSpec.create(m)
    vx = evaluate(separating(color), x, spec)
    vy = evaluate(separating(color), y, spec)
    gap = max(abs(a - b) for a, b in zip(x, y))
    assert abs(vx - vy) <= gap


def test_separating_scales_with_eps():
    spec1 = PartitionSpec.create(2)
    spec2 = PartitionSpec.create(2, eps=F(1, 10))
    x = [F(3, 7), F(-2, 5)]
    v1 = evaluate(separating(2), x, spec1)
    v2 = evaluate(separating(2), [v / 10 for v in x], spec2)
    assert v2 == v1 / 10


def test_oracle_budget_and_transcript():
    spec = PartitionSpec.create(2)
    oracle = MeasurementOracle([F(1, 3), F(0)], spec, budget=2)
    oracle.query(color_distance({1}))
    oracle.query(color_distance({2, 3}))
    with pytest.raises(BudgetExhaustedError):
        oracle.query(separating(1))
    assert oracle.consumed == 2
    assert [e.q for e in oracle.transcript.entries] == [1, 2]


def test_transcript_jsonl_round_trip():
    spec = PartitionSpec.create(3)
    oracle = MeasurementOracle([F(1, 3), F(0), F(-5, 4)], spec)
    oracle.query(color_distance({1, 2}))
    oracle.query(separating(1))
    text = oracle.transcript.to_jsonl()
    back = Transcript.from_jsonl(text)
    assert back.entries == oracle.transcript.entries
    # exact values survive the text round trip as rationals
    assert isinstance(back.entries[0].value, Fraction)


def test_replay_oracle_answers_and_guards():
    spec = PartitionSpec.create(2)
    oracle = MeasurementOracle([F(1, 2), F(1, 2)], spec)
    v1 = oracle.query(color_distance({1}))
    replay = ReplayOracle(oracle.transcript)
    assert replay.query(color_distance({1})) == v1
    with pytest.raises(BudgetExhaustedError):
        replay.query(color_distance({1}))
    replay2 = ReplayOracle(oracle.transcript)
    with pytest.raises(ContractViolation):
        replay2.query(color_distance({2}))


def test_float_transcript_serializes_floats():
    spec = PartitionSpec.create(2, mode="float64")
    oracle = MeasurementOracle([0.25, -1.5], spec)
    oracle.query(color_distance({1}))
    line = oracle.transcript.to_jsonl()
    import json

    row = json.loads(line)
    assert isinstance(row["value"], float)
