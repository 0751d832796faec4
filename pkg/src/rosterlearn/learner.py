"""Learn bound constraints from example schedules.

For every candidate ``(kind, M, S)`` the aggregate ``kind(Nonzero(X, M ∪ S), S)``
is computed on each example, all values are pooled, and their minimum and
maximum become the constraint's bounds.  Bounds that carry no information
(lower 0, upper at the largest attainable value) are dropped.
"""

from __future__ import annotations

import enum
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .aggregation import AggregatorKind, count_with_batch, max_attainable
from .errors import ParseError, SchemaError
from .model import Constraint, ConstraintModel
from .tensor import DimensionSchema, ScheduleTensor

# Nonzero(Nonzero(X, M ∪ S), S) does not depend on M, so it is left out by default.
DEFAULT_KINDS = (
    AggregatorKind.SUM,
    AggregatorKind.MIN_CONS_ZERO,
    AggregatorKind.MIN_CONS_ONE,
    AggregatorKind.MAX_CONS_ZERO,
    AggregatorKind.MAX_CONS_ONE,
)

_NO_MIN = np.iinfo(np.int64).max


class Candidate(NamedTuple):
    kind: AggregatorKind
    M: tuple[str, ...]
    S: tuple[str, ...]


@dataclass(frozen=True)
class BackgroundKnowledge:
    """(M, S) pairs the learner must not enumerate, with an optional note each."""

    excluded_pairs: frozenset = frozenset()
    notes: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def exclude(cls, *pairs) -> "BackgroundKnowledge":
        """``BackgroundKnowledge.exclude((["Shifts"], ["Days"]), ...)``"""
        return cls(frozenset((frozenset(M), frozenset(S)) for M, S in pairs))

    def excludes(self, M, S) -> bool:
        return (frozenset(M), frozenset(S)) in self.excluded_pairs

    def validate(self, schema: DimensionSchema):
        for M, S in self.excluded_pairs:
            for name in M | S:
                schema.axis(name)

    def to_dict(self) -> dict:
        out = []
        for M, S in sorted(self.excluded_pairs, key=lambda p: (sorted(p[0]), sorted(p[1]))):
            entry = {"M": sorted(M), "S": sorted(S)}
            note = self.notes.get((M, S))
            if note:
                entry["note"] = note
            out.append(entry)
        return {"exclude": out}

    @classmethod
    def from_dict(cls, raw) -> "BackgroundKnowledge":
        if not isinstance(raw, dict) or not isinstance(raw.get("exclude", []), list):
            raise ParseError("background knowledge needs an 'exclude' list")
        pairs, notes = set(), {}
        for i, item in enumerate(raw.get("exclude", [])):
            loc = f"exclude[{i}]"
            if not isinstance(item, dict):
                raise ParseError("entry must be an object", loc)
            for part in ("M", "S"):
                names = item.get(part)
                if not isinstance(names, list) or not names or not all(
                    isinstance(n, str) for n in names
                ):
                    raise ParseError("must be a non-empty list of names", f"{loc}.{part}")
            key = (frozenset(item["M"]), frozenset(item["S"]))
            pairs.add(key)
            if item.get("note"):
                notes[key] = str(item["note"])
        return cls(frozenset(pairs), notes)

    @classmethod
    def load(cls, path) -> "BackgroundKnowledge":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
        return cls.from_dict(raw)


@dataclass(frozen=True)
class CandidateBound:
    kind: AggregatorKind
    M: tuple[str, ...]
    S: tuple[str, ...]
    observed_min: int
    observed_max: int
    support: int

    def __post_init__(self):
        if self.support < 1:
            raise ValueError("a candidate bound needs at least one observed value")
        if self.observed_min > self.observed_max:
            raise ValueError("observed_min exceeds observed_max")


class Decision(enum.Enum):
    KEEP = "keep"
    DROP_LOWER = "drop-lower"
    DROP_UPPER = "drop-upper"
    DROP_BOTH = "drop-both"


def _subsets(axes: Sequence[int]) -> list[tuple[int, ...]]:
    out = []
    for r in range(1, len(axes) + 1):
        out.extend(itertools.combinations(axes, r))
    return out


def enumerate_candidates(
    schema: DimensionSchema,
    bk: Optional[BackgroundKnowledge] = None,
    kinds: Iterable = DEFAULT_KINDS,
    max_dims: Optional[int] = None,
) -> Iterator[Candidate]:
    """Lazily yield every admissible (kind, M, S) in canonical order.

    M runs over non-empty axis subsets by size then lexicographically, S over
    the non-empty subsets of the remaining axes in the same order.
    """
    if schema.ndim < 2:
        raise SchemaError("learning needs a schema with at least two dimensions")
    kinds = [AggregatorKind.parse(k) for k in kinds]
    bk = bk or BackgroundKnowledge()
    bk.validate(schema)
    cap = schema.ndim if max_dims is None else max_dims
    names = schema.names
    for m_axes in _subsets(range(schema.ndim)):
        rest = [a for a in range(schema.ndim) if a not in m_axes]
        for s_axes in _subsets(rest):
            if len(m_axes) + len(s_axes) > cap:
                continue
            M = tuple(names[a] for a in m_axes)
            S = tuple(names[a] for a in s_axes)
            if bk.excludes(M, S):
                continue
            for kind in kinds:
                if kind.consecutive and (len(M) != 1 or not schema[M[0]].ordered):
                    continue
                yield Candidate(kind, M, S)


def filter_trivial(c: CandidateBound, schema: DimensionSchema) -> Decision:
    drop_lower = c.observed_min == 0
    drop_upper = c.observed_max >= max_attainable(schema, c.kind, c.M)
    if drop_lower and drop_upper:
        return Decision.DROP_BOTH
    if drop_lower:
        return Decision.DROP_LOWER
    if drop_upper:
        return Decision.DROP_UPPER
    return Decision.KEEP


def to_constraint(c: CandidateBound, schema: DimensionSchema) -> Optional[Constraint]:
    decision = filter_trivial(c, schema)
    if decision is Decision.DROP_BOTH:
        return None
    lower = None if decision is Decision.DROP_LOWER else c.observed_min
    upper = None if decision is Decision.DROP_UPPER else c.observed_max
    return Constraint(c.kind, c.M, c.S, lower, upper)


class Profile(NamedTuple):
    """Per-example extremes of every candidate aggregate.

    Arrays are shaped (examples, candidates).  An example where a Min kind
    found no run at all has support 0, min ``_NO_MIN`` and max -1.
    """

    candidates: tuple
    mins: np.ndarray
    maxs: np.ndarray
    support: np.ndarray


def _profile_one(arr, schema, cand):
    values, mask = count_with_batch(arr, schema, cand.M, cand.S, cand.kind)
    flat = values.reshape(len(arr), -1)
    if mask is None:
        return flat.min(axis=1), flat.max(axis=1), np.full(len(arr), flat.shape[1])
    m = mask.reshape(len(arr), -1)
    return (
        np.where(m, flat, _NO_MIN).min(axis=1),
        np.where(m, flat, -1).max(axis=1),
        m.sum(axis=1),
    )


def profile(arr: np.ndarray, schema: DimensionSchema, candidates, n_jobs: int = 1) -> Profile:
    """Aggregate extremes for a stacked batch of schedules, shape (B, *schema.shape)."""
    candidates = tuple(candidates)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(lambda c: _profile_one(arr, schema, c), candidates))
    else:
        parts = [_profile_one(arr, schema, c) for c in candidates]
    B, C = len(arr), len(candidates)
    mins = np.empty((B, C), dtype=np.int64)
    maxs = np.empty((B, C), dtype=np.int64)
    support = np.empty((B, C), dtype=np.int64)
    for j, (lo, hi, n) in enumerate(parts):
        mins[:, j], maxs[:, j], support[:, j] = lo, hi, n
    return Profile(candidates, mins, maxs, support)


def model_from_profile(schema: DimensionSchema, prof: Profile, rows=None) -> ConstraintModel:
    """Pool the extremes over ``rows`` (default all) and keep informative bounds."""
    mins, maxs, support = prof.mins, prof.maxs, prof.support
    if rows is not None:
        mins, maxs, support = mins[rows], maxs[rows], support[rows]
    lo, hi, n = mins.min(axis=0), maxs.max(axis=0), support.sum(axis=0)
    constraints = []
    for j, cand in enumerate(prof.candidates):
        if n[j] == 0:
            continue
        bound = CandidateBound(cand.kind, cand.M, cand.S, int(lo[j]), int(hi[j]), int(n[j]))
        c = to_constraint(bound, schema)
        if c is not None:
            constraints.append(c)
    return ConstraintModel(schema, constraints)


def stack(examples: Sequence[ScheduleTensor]) -> np.ndarray:
    if not examples:
        raise ValueError("need at least one example schedule")
    schema = examples[0].schema
    for i, e in enumerate(examples[1:], 1):
        if not e.schema.compatible(schema):
            raise SchemaError(f"example {i} has dimensions that differ from example 0")
    return np.stack([e.data for e in examples])


def learn(
    examples: Sequence[ScheduleTensor],
    bk: Optional[BackgroundKnowledge] = None,
    kinds: Iterable = DEFAULT_KINDS,
    max_dims: Optional[int] = None,
    n_jobs: int = 1,
) -> ConstraintModel:
    """Learn a model every example satisfies.

    The schema of the first example labels the result.  ``n_jobs`` > 1
    evaluates candidates on a thread pool; the output does not depend on it.
    """
    examples = list(examples)
    arr = stack(examples)
    schema = examples[0].schema
    candidates = list(enumerate_candidates(schema, bk, kinds, max_dims))
    return model_from_profile(schema, profile(arr, schema, candidates, n_jobs))
