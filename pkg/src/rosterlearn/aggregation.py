"""Aggregators that reduce a schedule to quantities of interest.

``nonzero`` and ``sum`` keep the dimensions in ``dims`` and collapse the rest;
``count`` is Sum over the S-cells of Nonzero over M ∪ S.  The four run-length
aggregators collapse exactly one ordered dimension.

Every function has a batched twin (suffix ``_batch``) that works on an array
with a leading example axis, which is what the learner and the evaluation
harness use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from . import _backend
from .errors import OrderingError, RankError, UsageError
from .tensor import DimensionSchema, ScheduleTensor


class AggregatorKind(str, enum.Enum):
    NONZERO = "Nonzero"
    SUM = "Sum"
    MIN_CONS_ZERO = "MinConsZero"
    MIN_CONS_ONE = "MinConsOne"
    MAX_CONS_ZERO = "MaxConsZero"
    MAX_CONS_ONE = "MaxConsOne"

    @property
    def consecutive(self) -> bool:
        return self not in (AggregatorKind.NONZERO, AggregatorKind.SUM)

    @property
    def is_min(self) -> bool:
        return self in (AggregatorKind.MIN_CONS_ZERO, AggregatorKind.MIN_CONS_ONE)

    @property
    def code(self) -> int:
        # Matches the kind codes in the kernels.
        return _CODES[self]

    @classmethod
    def parse(cls, value) -> "AggregatorKind":
        if isinstance(value, cls):
            return value
        for k in cls:
            if value in (k.value, k.name):
                return k
        raise ValueError(f"unknown aggregator kind {value!r}")

    def __str__(self):
        return self.value


_CODES = {k: i for i, k in enumerate(AggregatorKind)}
# run_stats column per consecutive kind
_RUN_COLUMN = {
    AggregatorKind.MIN_CONS_ONE: 0,
    AggregatorKind.MAX_CONS_ONE: 1,
    AggregatorKind.MIN_CONS_ZERO: 2,
    AggregatorKind.MAX_CONS_ZERO: 3,
}


@dataclass(frozen=True, eq=False)
class AggregateTensor:
    """Non-negative integer tensor over the retained dimensions.

    ``mask`` is only set by the Min run-length kinds: False marks a slice that
    had no run of the target symbol, whose value is meaningless.
    """

    schema: DimensionSchema
    data: np.ndarray
    mask: Optional[np.ndarray] = None

    def __eq__(self, other):
        if not isinstance(other, AggregateTensor):
            return NotImplemented
        masks_equal = (self.mask is None and other.mask is None) or (
            self.mask is not None
            and other.mask is not None
            and np.array_equal(self.mask, other.mask)
        )
        return (
            self.schema == other.schema and np.array_equal(self.data, other.data) and masks_equal
        )

    def present(self) -> np.ndarray:
        """Flat array of the values that exist (all of them unless masked)."""
        if self.mask is None:
            return self.data.reshape(-1)
        return self.data[self.mask]

    def tolist(self):
        return self.data.tolist()


Tensorish = Union[ScheduleTensor, AggregateTensor]


def _keep_axes(schema: DimensionSchema, dims: Iterable[str]) -> tuple[int, ...]:
    dims = list(dims)
    if not dims:
        raise UsageError("the retained dimension set must be non-empty")
    return schema.axes(dims)


def _reduced(ndim: int, keep: tuple[int, ...]) -> tuple[int, ...]:
    # +1 skips the batch axis
    return tuple(a + 1 for a in range(ndim) if a not in keep)


def nonzero_batch(arr: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    red = _reduced(arr.ndim - 1, keep)
    if not red:
        return (arr > 0).astype(np.uint8)
    return (arr > 0).any(axis=red).astype(np.uint8)


def sum_batch(arr: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    red = _reduced(arr.ndim - 1, keep)
    if not red:
        return arr.astype(np.int64)
    return arr.sum(axis=red, dtype=np.int64)


def cons_batch(arr: np.ndarray, keep: tuple[int, ...], kind: AggregatorKind):
    """Run-length aggregate over the single axis not in ``keep``.

    Returns ``(values, mask)``; ``mask`` is None for the Max kinds.
    """
    red = _reduced(arr.ndim - 1, keep)
    if len(red) != 1:
        raise RankError(f"{kind} reduces exactly one dimension, got {len(red)}")
    moved = np.moveaxis(arr > 0, red[0], -1)
    out_shape = moved.shape[:-1]
    rows = np.ascontiguousarray(moved.reshape(-1, moved.shape[-1]), dtype=np.uint8)
    stats = _backend.kernels.run_stats(rows)[:, _RUN_COLUMN[kind]].astype(np.int64)
    values = stats.reshape(out_shape)
    if kind.is_min:
        mask = values >= 0
        return np.where(mask, values, 0), mask
    return values, None


def _validate_pair(schema: DimensionSchema, M, S) -> tuple[tuple[str, ...], tuple[str, ...]]:
    M, S = list(M), list(S)
    if not M or not S:
        raise UsageError("M and S must both be non-empty")
    if set(M) & set(S):
        raise UsageError(f"M and S overlap on {sorted(set(M) & set(S))}")
    return schema.canonical(M), schema.canonical(S)


def check_consecutive(schema: DimensionSchema, M, kind: AggregatorKind):
    """Raise unless ``kind`` may traverse the dimensions in M."""
    if not kind.consecutive:
        return
    if len(M) != 1:
        raise RankError(f"{kind} needs exactly one traversed dimension, got {list(M)}")
    if not schema[M[0]].ordered:
        raise OrderingError(f"{kind} cannot traverse unordered dimension {M[0]!r}")


def count_with_batch(arr: np.ndarray, schema: DimensionSchema, M, S, kind=AggregatorKind.SUM):
    """kind(Nonzero(X, M ∪ S), S) over a batch; returns ``(values, mask)``."""
    kind = AggregatorKind.parse(kind)
    M, S = _validate_pair(schema, M, S)
    check_consecutive(schema, M, kind)
    union = schema.axes(M + S)
    inner = nonzero_batch(arr, union)
    sub = schema.sub(M + S)
    keep = sub.axes(S)
    if kind is AggregatorKind.SUM:
        return sum_batch(inner, keep), None
    if kind is AggregatorKind.NONZERO:
        return nonzero_batch(inner, keep).astype(np.int64), None
    return cons_batch(inner, keep, kind)


def _array(t: Tensorish) -> np.ndarray:
    return t.data[np.newaxis]


def nonzero(t: Tensorish, dims: Iterable[str]) -> AggregateTensor:
    keep = _keep_axes(t.schema, dims)
    out = nonzero_batch(_array(t), keep)[0].astype(np.int64)
    return AggregateTensor(t.schema.sub(t.schema.names[a] for a in keep), out)


def sum(t: Tensorish, dims: Iterable[str]) -> AggregateTensor:  # noqa: A001
    keep = _keep_axes(t.schema, dims)
    out = sum_batch(_array(t), keep)[0]
    return AggregateTensor(t.schema.sub(t.schema.names[a] for a in keep), out)


def cons_aggregate(t: Tensorish, kind, dims: Iterable[str]) -> AggregateTensor:
    """Run-length aggregate of ``t`` keeping ``dims``; exactly one axis is traversed."""
    kind = AggregatorKind.parse(kind)
    if not kind.consecutive:
        raise UsageError(f"{kind} is not a run-length aggregator")
    keep = _keep_axes(t.schema, dims)
    traversed = [n for i, n in enumerate(t.schema.names) if i not in keep]
    if len(traversed) != 1:
        raise RankError(f"{kind} reduces exactly one dimension, got {traversed}")
    if not t.schema[traversed[0]].ordered:
        raise OrderingError(f"{kind} cannot traverse unordered dimension {traversed[0]!r}")
    values, mask = cons_batch(_array(t), keep, kind)
    return AggregateTensor(
        t.schema.sub(t.schema.names[a] for a in keep),
        values[0],
        None if mask is None else mask[0],
    )


def count(t: Tensorish, M: Iterable[str], S: Iterable[str]) -> AggregateTensor:
    return count_with(t, M, S, AggregatorKind.SUM)


def count_with(t: Tensorish, M: Iterable[str], S: Iterable[str], kind) -> AggregateTensor:
    kind = AggregatorKind.parse(kind)
    M, S = list(M), list(S)
    for n in M + S:
        t.schema.axis(n)
    values, mask = count_with_batch(_array(t), t.schema, M, S, kind)
    return AggregateTensor(
        t.schema.sub(S), values[0], None if mask is None else mask[0]
    )


def max_attainable(schema: DimensionSchema, kind, M: Iterable[str]) -> int:
    """Largest value ``count_with(·, M, S, kind)`` can take on ``schema``."""
    kind = AggregatorKind.parse(kind)
    M = list(M)
    if kind is AggregatorKind.NONZERO:
        return 1
    if kind.consecutive:
        if len(M) != 1:
            raise RankError(f"{kind} needs exactly one traversed dimension")
        return schema[M[0]].size
    return schema.size_of(M)
