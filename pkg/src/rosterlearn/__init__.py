"""Learn human-readable rostering constraints from example schedules."""

from ._backend import NAME as BACKEND
from .aggregation import (
    AggregateTensor,
    AggregatorKind,
    cons_aggregate,
    count,
    count_with,
    max_attainable,
    nonzero,
    sum,
)
from .errors import (
    ArityError,
    GenerationError,
    OrderingError,
    ParseError,
    RankError,
    RosterLearnError,
    SchemaError,
    UsageError,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    Scenario,
    builtin_scenario,
    estimate_precision,
    estimate_recall,
    run_experiment,
)
from .generator import GeneratorConfig, generate, violation_magnitude
from .learner import BackgroundKnowledge, enumerate_candidates, learn
from .model import CheckResult, Constraint, ConstraintModel, Violation, check, parse, render, serialize
from .tensor import Dimension, DimensionSchema, ScheduleTensor, load_schedule

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AggregateTensor", "AggregatorKind", "cons_aggregate", "count", "count_with",
    "max_attainable", "nonzero", "sum", "ArityError", "GenerationError", "OrderingError",
    "ParseError", "RankError", "RosterLearnError", "SchemaError", "UsageError", "EvalConfig",
    "EvalReport", "Scenario", "builtin_scenario", "estimate_precision", "estimate_recall",
    "run_experiment", "GeneratorConfig", "generate", "violation_magnitude",
    "BackgroundKnowledge", "enumerate_candidates", "learn", "CheckResult", "Constraint",
    "ConstraintModel", "Violation", "check", "parse", "render", "serialize", "Dimension",
    "DimensionSchema", "ScheduleTensor", "load_schedule",
]
