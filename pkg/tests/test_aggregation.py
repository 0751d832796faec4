import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from rosterlearn import aggregation as agg
from rosterlearn.aggregation import AggregatorKind
from rosterlearn.errors import OrderingError, RankError, SchemaError, UsageError
from rosterlearn.tensor import DimensionSchema, ScheduleTensor

RUN_KINDS = ["MinConsZero", "MinConsOne", "MaxConsZero", "MaxConsOne"]


def vector(bits):
    return ScheduleTensor(DimensionSchema.of(Nurses=1, Days=len(bits)), [bits])


def test_nonzero_roster(roster):
    y = agg.nonzero(roster, ["Nurses", "Days"])
    expected = np.ones((4, 3), dtype=int)
    expected[2, 1] = 0
    assert y.data.tolist() == expected.tolist()
    assert y.schema.names == ("Nurses", "Days")


def test_nonzero_all_dims_is_identity(roster):
    assert agg.nonzero(roster, roster.schema.names).data.tolist() == roster.data.tolist()


def test_nonzero_of_zeros(roster):
    z = ScheduleTensor.zeros(roster.schema)
    assert not agg.nonzero(z, ["Days"]).data.any()


def test_sum_roster(roster):
    assert agg.sum(roster, ["Nurses"]).tolist() == [3, 3, 2, 3]
    assert agg.sum(roster, ["Days"]).tolist() == [4, 3, 4]
    assert agg.sum(roster, roster.schema.names).data.tolist() == roster.data.tolist()


def test_sum_accepts_aggregates(roster):
    y = agg.nonzero(roster, ["Nurses", "Days"])
    assert agg.sum(y, ["Days"]).tolist() == [4, 3, 4]


def test_empty_dims_rejected(roster):
    with pytest.raises(UsageError):
        agg.nonzero(roster, [])
    with pytest.raises(UsageError):
        agg.sum(roster, [])


def test_count_roster(roster):
    assert agg.count(roster, ["Nurses"], ["Days"]).tolist() == [4, 3, 4]
    assert agg.count(roster, ["Days"], ["Nurses"]).tolist() == [3, 3, 2, 3]
    per_day = agg.count(roster, ["Shifts"], ["Nurses", "Days"]).data
    expected = np.ones((4, 3), dtype=int)
    expected[2, 1] = 0
    assert per_day.tolist() == expected.tolist()


def test_count_errors(roster):
    with pytest.raises(UsageError):
        agg.count(roster, ["Nurses"], ["Nurses", "Days"])
    with pytest.raises(UsageError):
        agg.count(roster, [], ["Days"])
    with pytest.raises(SchemaError):
        agg.count(roster, ["Weeks"], ["Days"])


def test_count_with_runs_roster(roster):
    assert agg.count_with(roster, ["Days"], ["Nurses"], "MaxConsOne").tolist() == [3, 3, 1, 3]
    assert agg.count_with(roster, ["Days"], ["Nurses"], "MaxConsZero").tolist() == [0, 0, 1, 0]
    assert agg.count_with(roster, ["Nurses"], ["Days"], "Sum") == agg.count(
        roster, ["Nurses"], ["Days"]
    )


def test_cons_aggregate_over_nonzero(roster):
    y = agg.nonzero(roster, ["Nurses", "Days"])
    assert agg.cons_aggregate(y, "MaxConsOne", ["Nurses"]).tolist() == [3, 3, 1, 3]


@pytest.mark.parametrize(
    "bits, kind, expected",
    [
        ([1, 0, 1], "MaxConsZero", 1),
        ([1, 1, 1], "MaxConsZero", 0),
        ([1, 0, 1], "MinConsOne", 1),
        ([1, 1, 1], "MinConsOne", 3),
        ([0, 1, 1, 0, 0, 0, 1], "MinConsZero", 1),
        ([0, 1, 1, 0, 0, 0, 1], "MaxConsZero", 3),
        ([0, 1, 1, 0, 0, 0, 1], "MaxConsOne", 2),
    ],
)
def test_run_vectors(bits, kind, expected):
    r = agg.cons_aggregate(vector(bits), kind, ["Nurses"])
    assert r.tolist() == [expected]
    assert r.present().tolist() == [expected]


def test_min_kind_without_run_is_absent():
    r = agg.cons_aggregate(vector([1, 1, 1]), "MinConsZero", ["Nurses"])
    assert r.mask.tolist() == [False]
    assert r.present().size == 0
    assert agg.cons_aggregate(vector([0, 0]), "MaxConsOne", ["Nurses"]).tolist() == [0]


def test_cons_errors(roster):
    with pytest.raises(RankError):
        agg.cons_aggregate(roster, "MaxConsOne", ["Nurses"])
    with pytest.raises(OrderingError):
        agg.cons_aggregate(roster, "MaxConsOne", ["Days", "Shifts"])
    with pytest.raises(RankError):
        agg.count_with(roster, ["Days", "Shifts"], ["Nurses"], "MaxConsOne")
    with pytest.raises(OrderingError):
        agg.count_with(roster, ["Nurses"], ["Days"], "MinConsOne")
    with pytest.raises(UsageError):
        agg.cons_aggregate(roster, "Sum", ["Nurses", "Days"])


def test_kind_parse():
    assert AggregatorKind.parse("MaxConsOne") is AggregatorKind.MAX_CONS_ONE
    assert AggregatorKind.parse("SUM") is AggregatorKind.SUM
    with pytest.raises(ValueError):
        AggregatorKind.parse("Mean")


def test_max_attainable(roster):
    s = roster.schema
    assert agg.max_attainable(s, "Sum", ["Nurses"]) == 4
    assert agg.max_attainable(s, "Sum", ["Days", "Shifts"]) == 9
    assert agg.max_attainable(s, "Nonzero", ["Nurses"]) == 1
    assert agg.max_attainable(s, "MaxConsOne", ["Days"]) == 3


# -- oracle equivalence ------------------------------------------------------


@st.composite
def tensors(draw, max_rank=4):
    sizes = draw(st.lists(st.integers(1, 4), min_size=2, max_size=max_rank))
    ordered = draw(st.lists(st.booleans(), min_size=len(sizes), max_size=len(sizes)))
    from rosterlearn.tensor import Dimension

    schema = DimensionSchema(
        tuple(Dimension(f"D{i}", tuple(f"v{j}" for j in range(n)), o)
              for i, (n, o) in enumerate(zip(sizes, ordered)))
    )
    data = draw(arrays(np.uint8, schema.shape, elements=st.integers(0, 1)))
    return ScheduleTensor(schema, data)


def _subset(draw, names, min_size=1):
    return draw(st.lists(st.sampled_from(names), unique=True, min_size=min_size,
                         max_size=len(names)))


@settings(max_examples=150, deadline=None)
@given(tensors(), st.data())
def test_nonzero_and_sum_match_oracle(t, data):
    keep = _subset(data.draw, list(t.schema.names))
    axes = t.schema.axes(keep)
    shape = tuple(t.schema.shape[a] for a in axes)
    assert agg.nonzero(t, keep).data.tolist() == oracles.as_array(
        oracles.nonzero(t.data, axes), shape).tolist()
    assert agg.sum(t, keep).data.tolist() == oracles.as_array(
        oracles.total(t.data, axes), shape).tolist()


@settings(max_examples=200, deadline=None)
@given(tensors(), st.data(), st.sampled_from(["Sum", "Nonzero"] + RUN_KINDS))
def test_count_with_matches_oracle(t, data, kind):
    names = list(t.schema.names)
    M = _subset(data.draw, names)
    rest = [n for n in names if n not in M]
    if not rest:
        return
    S = _subset(data.draw, rest)
    k = AggregatorKind.parse(kind)
    if k.consecutive and (len(M) != 1 or not t.schema[M[0]].ordered):
        with pytest.raises((RankError, OrderingError)):
            agg.count_with(t, M, S, kind)
        return
    got = agg.count_with(t, M, S, kind)
    want = oracles.count_with(t.data, t.schema.axes(M), t.schema.axes(S), kind)
    for idx, v in want.items():
        if v is None:
            assert not got.mask[idx]
        else:
            assert got.mask is None or got.mask[idx]
            assert got.data[idx] == v


# -- algebraic properties ----------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(tensors(), st.data())
def test_nonzero_idempotent_and_dominated(t, data):
    keep = _subset(data.draw, list(t.schema.names))
    once = agg.nonzero(t, keep)
    assert agg.nonzero(once, keep) == once
    assert (once.data <= agg.sum(t, keep).data).all()


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
def test_run_inequalities(bits):
    v = vector(bits)
    get = {k: agg.cons_aggregate(v, k, ["Nurses"]) for k in RUN_KINDS}
    mx1, mx0 = get["MaxConsOne"].tolist()[0], get["MaxConsZero"].tolist()[0]
    assert mx1 <= sum(bits)
    assert mx1 + mx0 <= len(bits)
    if any(bits):
        assert get["MinConsOne"].tolist()[0] <= mx1


@settings(max_examples=80, deadline=None)
@given(tensors(), st.data())
def test_count_range(t, data):
    names = list(t.schema.names)
    M = _subset(data.draw, names)
    rest = [n for n in names if n not in M]
    if not rest:
        return
    S = _subset(data.draw, rest)
    values = agg.count(t, M, S).data
    assert values.min() >= 0
    assert values.max() <= agg.max_attainable(t.schema, "Sum", M)
