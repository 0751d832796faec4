"""Bound constraints over aggregate quantities, and models built from them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .aggregation import AggregatorKind, check_consecutive, count_with_batch
from .errors import ParseError, RankError, SchemaError, UsageError
from .tensor import DimensionSchema, ScheduleTensor


@dataclass(frozen=True)
class Constraint:
    """``lower <= kind(Nonzero(X, M ∪ S), S)[e] <= upper`` for every S-cell ``e``."""

    kind: AggregatorKind
    M: tuple[str, ...]
    S: tuple[str, ...]
    lower: Optional[int] = None
    upper: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AggregatorKind.parse(self.kind))
        object.__setattr__(self, "M", tuple(self.M))
        object.__setattr__(self, "S", tuple(self.S))
        if not self.M or not self.S:
            raise UsageError("M and S must both be non-empty")
        if set(self.M) & set(self.S):
            raise UsageError(f"M and S overlap on {sorted(set(self.M) & set(self.S))}")
        if self.lower is None and self.upper is None:
            raise UsageError("a constraint needs at least one bound")
        for side in ("lower", "upper"):
            v = getattr(self, side)
            if v is not None and (isinstance(v, bool) or int(v) != v or v < 0):
                raise UsageError(f"{side} bound must be a non-negative integer, got {v!r}")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise UsageError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def key(self) -> tuple:
        return (self.kind, self.M, self.S)

    def admits(self, value: int) -> bool:
        return (self.lower is None or value >= self.lower) and (
            self.upper is None or value <= self.upper
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "M": list(self.M),
            "S": list(self.S),
            "lower": self.lower,
            "upper": self.upper,
        }


@dataclass(frozen=True)
class Violation:
    constraint: Constraint
    cell: dict
    value: int

    def __str__(self):
        where = ", ".join(f"{k}={v}" for k, v in self.cell.items())
        return f"{where}: value {self.value}"


@dataclass
class CheckResult:
    violations: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.satisfied


class ConstraintModel:
    """Ordered, duplicate-free list of constraints over one schema."""

    def __init__(self, schema: DimensionSchema, constraints: Iterable[Constraint] = ()):
        self.schema = schema
        seen = set()
        normalized = []
        for c in constraints:
            c = Constraint(c.kind, schema.canonical(c.M), schema.canonical(c.S), c.lower, c.upper)
            check_consecutive(schema, c.M, c.kind)
            if c.key in seen:
                raise SchemaError(f"duplicate constraint for {c.kind} M={c.M} S={c.S}")
            seen.add(c.key)
            normalized.append(c)
        self.constraints = tuple(normalized)

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __eq__(self, other):
        if not isinstance(other, ConstraintModel):
            return NotImplemented
        return self.schema == other.schema and self.constraints == other.constraints

    def __repr__(self):
        return f"ConstraintModel({len(self.constraints)} constraints over {self.schema.names})"

    def find(self, kind, M, S) -> Optional[Constraint]:
        key = (AggregatorKind.parse(kind), self.schema.canonical(M), self.schema.canonical(S))
        for c in self.constraints:
            if c.key == key:
                return c
        return None

    def to_dict(self) -> dict:
        return {
            "schema": {"dimensions": self.schema.to_dict()},
            "constraints": [c.to_dict() for c in self.constraints],
        }

    @classmethod
    def from_dict(cls, raw) -> "ConstraintModel":
        if not isinstance(raw, dict):
            raise ParseError("model document must be an object")
        schema_raw = raw.get("schema")
        if not isinstance(schema_raw, dict):
            raise ParseError("missing 'schema' object", "schema")
        schema = DimensionSchema.from_dict(schema_raw.get("dimensions"), where="schema.dimensions")
        items = raw.get("constraints")
        if not isinstance(items, list):
            raise ParseError("missing 'constraints' list", "constraints")
        constraints = []
        seen = set()
        for i, item in enumerate(items):
            loc = f"constraints[{i}]"
            if not isinstance(item, dict):
                raise ParseError("constraint must be an object", loc)
            try:
                kind = AggregatorKind.parse(item.get("kind"))
            except ValueError as exc:
                raise ParseError(str(exc), f"{loc}.kind") from None
            for part in ("M", "S"):
                names = item.get(part)
                if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
                    raise ParseError("must be a list of dimension names", f"{loc}.{part}")
                for n in names:
                    if n not in schema.names:
                        raise ParseError(f"unknown dimension {n!r}", f"{loc}.{part}")
            for side in ("lower", "upper"):
                v = item.get(side)
                if v is not None and (not isinstance(v, int) or isinstance(v, bool)):
                    raise ParseError("bound must be an integer or null", f"{loc}.{side}")
            try:
                c = Constraint(
                    kind,
                    schema.canonical(item["M"]),
                    schema.canonical(item["S"]),
                    item.get("lower"),
                    item.get("upper"),
                )
                check_consecutive(schema, c.M, c.kind)
            except (UsageError, RankError) as exc:
                raise ParseError(str(exc), loc) from None
            if c.key in seen:
                raise ParseError("duplicate (kind, M, S) entry", loc)
            seen.add(c.key)
            constraints.append(c)
        return cls(schema, constraints)


def serialize(m: ConstraintModel) -> str:
    return json.dumps(m.to_dict(), indent=2)


def parse(text: str) -> ConstraintModel:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return ConstraintModel.from_dict(raw)


def load_model(path) -> ConstraintModel:
    with open(path) as fh:
        text = fh.read()
    try:
        return parse(text)
    except ParseError as exc:
        raise ParseError(str(exc), str(path)) from None


def _require_compatible(t: ScheduleTensor, m: ConstraintModel):
    if not t.schema.compatible(m.schema):
        raise SchemaError(
            f"schedule dimensions {list(zip(t.schema.names, t.schema.shape))} do not match "
            f"model dimensions {list(zip(m.schema.names, m.schema.shape))}"
        )


def check(t: ScheduleTensor, m: ConstraintModel) -> CheckResult:
    """Every S-cell value of every constraint must lie in its bounds.

    Labels may differ between schedule and model; names and sizes may not.
    All violations are reported, labelled with the schedule's own value names.
    """
    _require_compatible(t, m)
    result = CheckResult()
    arr = t.data[np.newaxis]
    for c in m.constraints:
        values, mask = count_with_batch(arr, t.schema, c.M, c.S, c.kind)
        values = values[0]
        lo = c.lower if c.lower is not None else 0
        hi = c.upper if c.upper is not None else np.iinfo(np.int64).max
        bad = (values < lo) | (values > hi)
        if mask is not None:
            bad &= mask[0]
        sub = t.schema.sub(c.S)
        for idx in np.argwhere(bad):
            cell = {d.name: d.values[i] for d, i in zip(sub.dims, idx)}
            result.violations.append(Violation(c, cell, int(values[tuple(idx)])))
    return result


# Phrases for the nurse-rostering vocabulary, keyed by lower-cased (M, S).
_PHRASES = {
    (("days",), ("nurses",)): "# of working days / Nurse",
    (("days", "shifts"), ("nurses",)): "# of working shifts / Nurse",
    (("nurses",), ("days",)): "# of distinct employees / day",
    (("shifts",), ("days",)): "# of shifts for each day with at least one nurse working",
    (("shifts",), ("nurses", "days")): "# of working shifts per day per nurse",
    (("days",), ("nurses", "shifts")): "# of working days in the same shift / nurse",
    (("nurses",), ("days", "shifts")): "# of nurses / shift each day",
}


def _singular(name: str) -> str:
    return name[:-1] if len(name) > 1 and name.endswith("s") else name


def _phrase(c: Constraint) -> str:
    key = (tuple(n.lower() for n in c.M), tuple(n.lower() for n in c.S))
    per = " per ".join(_singular(n) for n in c.S)
    if c.kind is AggregatorKind.SUM:
        if key in _PHRASES:
            return _PHRASES[key]
        return f"# of distinct {'×'.join(c.M)} / {per}"
    if c.kind is AggregatorKind.NONZERO:
        return f"any {'×'.join(c.M)} activity / {per}"
    extreme = "max" if c.kind.name.startswith("MAX") else "min"
    status = "working" if c.kind.name.endswith("ONE") else "non-working"
    return f"{extreme} consecutive {status} {c.M[0].lower()} per {per}"


def render(c: Constraint, schema: Optional[DimensionSchema] = None) -> str:
    """One-line English reading of ``c``; ``schema`` fixes the name order if given."""
    if schema is not None:
        c = Constraint(c.kind, schema.canonical(c.M), schema.canonical(c.S), c.lower, c.upper)
    phrase = _phrase(c)
    if c.lower is not None and c.upper is not None:
        return f"{phrase} between {c.lower} and {c.upper}"
    if c.lower is not None:
        return f"{phrase} ≥ {c.lower}"
    return f"{phrase} ≤ {c.upper}"
