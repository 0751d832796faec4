import csv
import itertools
import logging
import math

import numpy as np
import pytest

from rosterlearn.errors import GenerationError, ParseError, UsageError
from rosterlearn.evaluation import (
    CSV_COLUMNS,
    EvalConfig,
    Scenario,
    builtin_scenario,
    estimate_precision,
    estimate_recall,
    run_experiment,
    satisfied_rows,
)
from rosterlearn.generator import GeneratorConfig, generate
from rosterlearn.learner import enumerate_candidates, learn, profile, stack
from rosterlearn.model import Constraint, ConstraintModel, check
from rosterlearn.tensor import DimensionSchema, ScheduleTensor

SCHEMA = DimensionSchema.of(Nurses=4, Days=7, Shifts=3)
TARGET = ConstraintModel(
    SCHEMA,
    [
        Constraint("Sum", ["Shifts"], ["Nurses", "Days"], None, 1),
        Constraint("Sum", ["Nurses"], ["Days"], 2, 3),
        Constraint("MaxConsOne", ["Days"], ["Nurses"], None, 4),
    ],
)
GEN = GeneratorConfig(mix_steps=200)


@pytest.fixture(scope="module")
def pool():
    return generate(TARGET, 60, GeneratorConfig(seed=1, mix_steps=200))


def test_recall_trivial_cases(pool):
    assert estimate_recall(TARGET, ConstraintModel(SCHEMA), pool) == 1.0
    assert estimate_recall(TARGET, TARGET, pool) == 1.0
    with pytest.raises(UsageError):
        estimate_recall(TARGET, TARGET, [])


def test_precision_of_target_is_one():
    assert estimate_precision(TARGET, TARGET, GEN, 20) == 1.0


def test_precision_without_samples_warns(caplog):
    impossible = ConstraintModel(SCHEMA, [
        Constraint("Sum", ["Days"], ["Nurses"], 7, None),
        Constraint("MaxConsOne", ["Days"], ["Nurses"], None, 2),
    ])
    with caplog.at_level(logging.WARNING):
        p = estimate_precision(TARGET, impossible, GeneratorConfig(max_repair_steps=30, restarts=0), 3)
    assert math.isnan(p)
    assert "0 of 3" in caplog.text


def test_learned_from_samples_is_sound(pool):
    learned = learn(pool[:10])
    assert estimate_precision(TARGET, learned, GEN, 30) == 1.0


def test_satisfied_rows_matches_check(pool):
    cands = list(enumerate_candidates(SCHEMA))
    prof = profile(stack(pool), SCHEMA, cands)
    learned = learn(pool[:3])
    assert satisfied_rows(prof, learned).tolist() == [check(t, learned).satisfied for t in pool]


TINY = DimensionSchema.of(Nurses=2, Days=2, Shifts=2)
TINY_TARGET = ConstraintModel(TINY, [
    Constraint("Sum", ["Shifts"], ["Nurses", "Days"], None, 1),
    Constraint("Sum", ["Nurses"], ["Days"], 1, None),
])


def every_tensor(schema):
    for bits in itertools.product((0, 1), repeat=int(np.prod(schema.shape))):
        yield ScheduleTensor(schema, np.array(bits, dtype=np.uint8))


def exact(target, learned):
    sol_t = [t for t in every_tensor(TINY) if check(t, target)]
    sol_l = [t for t in every_tensor(TINY) if check(t, learned)]
    both = [t for t in sol_t if check(t, learned)]
    return len(both) / len(sol_t), len(both) / len(sol_l)


def test_tiny_exhaustive_cross_check():
    cfg = GeneratorConfig(seed=5, initial_density=0.3, mix_steps=100)
    pool = generate(TINY_TARGET, 600, cfg)
    other = ConstraintModel(TINY, [Constraint("Sum", ["Days", "Shifts"], ["Nurses"], 1, 2)])
    for learned in (learn(pool[:2]), other):
        rc, pr = exact(TINY_TARGET, learned)
        assert abs(estimate_recall(TINY_TARGET, learned, pool) - rc) <= 0.08
        assert abs(estimate_precision(TINY_TARGET, learned, cfg, 600) - pr) <= 0.08


def small_scenario():
    return Scenario("week", TARGET, generator=GeneratorConfig(mix_steps=100))


def test_run_experiment(tmp_path):
    cfg = EvalConfig(small_scenario(), pool_size=40, train_sizes=[1, 5], trials=2, seed=3,
                     precision_samples=5)
    seen = []
    report = run_experiment(cfg, progress=seen.append)
    assert len(report.rows) == 4 == len(seen)
    for r in report.rows:
        assert 0 <= r.recall <= 1 and 0 <= r.recall_heldout <= 1
        assert r.precision == 1.0
        assert r.learn_seconds > 0
    avg = report.averages()
    assert set(avg) == {1, 5}
    assert avg[5]["recall"] >= avg[1]["recall"]

    report.write_csv(tmp_path / "r.csv")
    report.write_svg(tmp_path / "r.svg")
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 5
    assert (tmp_path / "r.svg").read_text().lstrip().startswith("<?xml")
    assert not list(tmp_path.glob(".tmp-*"))


def test_run_experiment_deterministic():
    cfg = EvalConfig(small_scenario(), pool_size=30, train_sizes=[2], trials=2, seed=8,
                     precision_samples=3)
    strip = lambda rep: [(r.recall, r.recall_heldout, r.precision, r.n_constraints)
                         for r in rep.rows]
    assert strip(run_experiment(cfg)) == strip(run_experiment(cfg))


def test_train_on_whole_pool():
    cfg = EvalConfig(small_scenario(), pool_size=12, train_sizes=[12], trials=1,
                     precision_samples=2)
    [row] = run_experiment(cfg).rows
    assert row.recall == 1.0
    assert math.isnan(row.recall_heldout)


def test_infeasible_target_aborts():
    bad = Scenario("bad", ConstraintModel(SCHEMA, [
        Constraint("Sum", ["Days"], ["Nurses"], 7, None),
        Constraint("MaxConsOne", ["Days"], ["Nurses"], None, 2),
    ]), generator=GeneratorConfig(max_repair_steps=20, restarts=0))
    with pytest.raises(GenerationError):
        run_experiment(EvalConfig(bad, pool_size=2, train_sizes=[1], trials=1))


def test_eval_config_validation():
    sc = small_scenario()
    with pytest.raises(UsageError):
        EvalConfig(sc, pool_size=10, train_sizes=[20])
    with pytest.raises(UsageError):
        EvalConfig(sc, trials=0)
    with pytest.raises(UsageError):
        EvalConfig(sc, train_sizes=[])


@pytest.mark.parametrize("name, nurses", [("small", 10), ("medium", 31), ("large", 49)])
def test_builtin_scenarios(name, nurses):
    sc = builtin_scenario(name)
    assert sc.schema.shape == (nurses, 28, 4)
    assert len(sc.target) == 11
    assert not sc.schema["Nurses"].ordered
    assert sc.background.excludes(["Shifts"], ["Days"])


def test_scenario_parse_errors():
    with pytest.raises(ParseError):
        Scenario.from_dict({"name": "x"})
    with pytest.raises(ParseError):
        Scenario.from_dict({"target": TARGET.to_dict(), "generator": {"seed": 3}})
