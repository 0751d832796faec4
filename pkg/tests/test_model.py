import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_tensor
from rosterlearn.errors import ParseError, SchemaError, UsageError
from rosterlearn.model import (
    Constraint,
    ConstraintModel,
    check,
    load_model,
    parse,
    render,
    serialize,
)
from rosterlearn.tensor import Dimension, DimensionSchema, ScheduleTensor


def model(schema, *constraints):
    return ConstraintModel(schema, constraints)


def test_check_roster(roster):
    ok = model(roster.schema, Constraint("Sum", ["Nurses"], ["Days"], 3, None))
    assert check(roster, ok).satisfied
    tight = model(roster.schema, Constraint("Sum", ["Nurses"], ["Days"], 4, None))
    result = check(roster, tight)
    assert not result
    [v] = result.violations
    assert v.cell == {"Days": "Day2"} and v.value == 3


def test_check_reports_all(roster):
    m = model(
        roster.schema,
        Constraint("Sum", ["Nurses"], ["Days"], None, 3),
        Constraint("Sum", ["Days"], ["Nurses"], 3, None),
    )
    cells = [(v.constraint.M, v.cell) for v in check(roster, m).violations]
    assert cells == [
        (("Nurses",), {"Days": "Day1"}),
        (("Nurses",), {"Days": "Day3"}),
        (("Days",), {"Nurses": "Nurse3"}),
    ]


def test_empty_model(roster):
    assert check(roster, model(roster.schema)).satisfied


def test_check_ignores_labels_but_not_sizes(roster):
    relabelled = DimensionSchema(
        (roster.schema.dims[0], Dimension("Days", ("Mon", "Tue", "Wed"), True),
         roster.schema.dims[2])
    )
    t = ScheduleTensor(relabelled, roster.data)
    m = model(roster.schema, Constraint("Sum", ["Nurses"], ["Days"], 4, None))
    assert check(t, m).violations[0].cell == {"Days": "Tue"}
    with pytest.raises(SchemaError):
        check(ScheduleTensor.zeros(DimensionSchema.of(Nurses=4, Days=2, Shifts=3)), m)


def test_absent_min_values_never_violate():
    s = DimensionSchema.of(Nurses=1, Days=3)
    t = ScheduleTensor(s, [[1, 1, 1]])
    m = model(s, Constraint("MinConsZero", ["Days"], ["Nurses"], 2, None))
    assert check(t, m).satisfied


def test_constraint_invariants():
    with pytest.raises(UsageError):
        Constraint("Sum", ["A"], ["B"])
    with pytest.raises(UsageError):
        Constraint("Sum", ["A"], ["B"], 3, 2)
    with pytest.raises(UsageError):
        Constraint("Sum", ["A"], ["A"], 1, None)
    with pytest.raises(UsageError):
        Constraint("Sum", [], ["A"], 1, None)
    with pytest.raises(UsageError):
        Constraint("Sum", ["A"], ["B"], -1, None)


def test_model_rejects_duplicates_and_bad_runs(roster):
    c = Constraint("Sum", ["Nurses"], ["Days"], 1, None)
    with pytest.raises(SchemaError):
        model(roster.schema, c, Constraint("Sum", ["Nurses"], ["Days"], None, 3))
    with pytest.raises(UsageError):
        model(roster.schema, Constraint("MaxConsOne", ["Nurses"], ["Days"], None, 3))


def test_render_vocabulary_rows():
    assert render(Constraint("Sum", ["Nurses"], ["Days"], 3, None)) == (
        "# of distinct employees / day ≥ 3"
    )
    assert render(Constraint("MaxConsOne", ["Days"], ["Nurses"], None, 3)) == (
        "max consecutive working days per Nurse ≤ 3"
    )
    assert render(Constraint("Sum", ["Days"], ["Nurses"], 2, 5)) == (
        "# of working days / Nurse between 2 and 5"
    )
    assert render(Constraint("MinConsZero", ["Days"], ["Nurses", "Shifts"], 2, None)) == (
        "min consecutive non-working days per Nurse per Shift ≥ 2"
    )


def test_render_injective_over_candidates():
    from rosterlearn.learner import enumerate_candidates

    schema = DimensionSchema.of(Nurses=4, Days=7, Shifts=3)
    texts = {
        render(Constraint(c.kind, c.M, c.S, 1, None), schema)
        for c in enumerate_candidates(schema, kinds=["Nonzero", "Sum", "MinConsZero",
                                                     "MinConsOne", "MaxConsZero", "MaxConsOne"])
    }
    n = len(list(enumerate_candidates(schema, kinds=["Nonzero", "Sum", "MinConsZero",
                                                      "MinConsOne", "MaxConsZero",
                                                      "MaxConsOne"])))
    assert len(texts) == n


def test_round_trip(roster):
    m = model(
        roster.schema,
        Constraint("Sum", ["Nurses"], ["Days"], 3, None),
        Constraint("MaxConsOne", ["Days"], ["Nurses", "Shifts"], None, 2),
    )
    assert parse(serialize(m)) == m


def _doc(roster, **override):
    c = {"kind": "Sum", "M": ["Nurses"], "S": ["Days"], "lower": 1, "upper": 3}
    c.update(override)
    return json.dumps({"schema": {"dimensions": roster.schema.to_dict()}, "constraints": [c]})


@pytest.mark.parametrize(
    "override, where",
    [
        ({"lower": 4, "upper": 3}, "constraints[0]"),
        ({"M": ["Weeks"]}, "constraints[0].M"),
        ({"kind": "Mean"}, "constraints[0].kind"),
        ({"lower": "3"}, "constraints[0].lower"),
        ({"kind": "MaxConsOne", "M": ["Nurses"]}, "constraints[0]"),
    ],
)
def test_parse_errors_have_location(roster, override, where):
    with pytest.raises(ParseError) as err:
        parse(_doc(roster, **override))
    assert err.value.location == where


def test_parse_syntax_error_location():
    with pytest.raises(ParseError) as err:
        parse('{"schema": ')
    assert "line 1" in str(err.value)


def test_load_model_prefixes_path(tmp_path, roster):
    p = tmp_path / "m.json"
    p.write_text(_doc(roster, M=["Weeks"]))
    with pytest.raises(ParseError) as err:
        load_model(p)
    assert str(p) in str(err.value)


SMALL = DimensionSchema.of(Nurses=2, Days=3, Shifts=2)


@st.composite
def constraints(draw):
    from rosterlearn.learner import enumerate_candidates

    cands = list(enumerate_candidates(SMALL, kinds=["Sum", "Nonzero", "MinConsOne",
                                                     "MaxConsZero"]))
    chosen = draw(st.lists(st.sampled_from(cands), unique=True, min_size=1, max_size=4))
    out = []
    for c in chosen:
        lo = draw(st.one_of(st.none(), st.integers(0, 3)))
        hi = draw(st.one_of(st.none(), st.integers(lo or 0, 4)))
        if lo is None and hi is None:
            hi = 2
        out.append(Constraint(c.kind, c.M, c.S, lo, hi))
    return out


@settings(max_examples=60, deadline=None)
@given(constraints(), st.integers(0, 2**32 - 1))
def test_check_matches_oracle(cs, seed):
    t = random_tensor(np.random.default_rng(seed), SMALL)
    m = ConstraintModel(SMALL, cs)
    expected = oracles.satisfies(
        t.data, [(c.kind.value, SMALL.axes(c.M), SMALL.axes(c.S), c.lower, c.upper) for c in m]
    )
    assert check(t, m).satisfied == expected


@settings(max_examples=40, deadline=None)
@given(constraints(), st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_widening_never_breaks(cs, seed, slack):
    t = random_tensor(np.random.default_rng(seed), SMALL)
    m = ConstraintModel(SMALL, cs)
    wider = ConstraintModel(SMALL, [
        Constraint(c.kind, c.M, c.S,
                   None if c.lower is None else max(0, c.lower - slack),
                   None if c.upper is None else c.upper + slack)
        for c in cs
    ])
    if check(t, m).satisfied:
        assert check(t, wider).satisfied


@settings(max_examples=40, deadline=None)
@given(constraints())
def test_serialize_round_trip_property(cs):
    m = ConstraintModel(SMALL, cs)
    assert parse(serialize(m)) == m
