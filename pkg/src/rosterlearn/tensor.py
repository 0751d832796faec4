"""Schedules as dense binary tensors over named dimensions.

Cells are stored in C order: lexicographic over the schema's dimension order
with the last dimension varying fastest.  That order is also the byte order
of the dense ``"data"`` variant of the schedule file format.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ArityError, ParseError, SchemaError

# Dimensions with these names are ordered unless a file says otherwise.
TEMPORAL_NAMES = ("days", "shifts", "weeks", "hours", "slots", "periods", "time")

IndexTuple = Mapping[str, str]


@dataclass(frozen=True)
class Dimension:
    name: str
    values: tuple[str, ...]
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise SchemaError(f"dimension {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise SchemaError(f"dimension {self.name!r} has duplicate value labels")

    @property
    def size(self) -> int:
        return len(self.values)

    def position(self, label: str) -> int:
        try:
            return self.values.index(label)
        except ValueError:
            raise SchemaError(f"{label!r} is not a value of dimension {self.name!r}") from None


@dataclass(frozen=True)
class DimensionSchema:
    dims: tuple[Dimension, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate dimension names in {names}")

    @classmethod
    def of(cls, **sizes_or_labels) -> "DimensionSchema":
        """Shorthand: ``DimensionSchema.of(Nurses=4, Days=7, Shifts=3)``.

        Integer sizes get labels ``Nurse1``..; ordering follows the temporal list.
        """
        dims = []
        for name, labels in sizes_or_labels.items():
            if isinstance(labels, int):
                stem = name[:-1] if name.endswith("s") else name
                labels = [f"{stem}{i + 1}" for i in range(labels)]
            dims.append(Dimension(name, tuple(labels), name.lower() in TEMPORAL_NAMES))
        return cls(tuple(dims))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d.size for d in self.dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, name: str) -> Dimension:
        return self.dims[self.axis(name)]

    def axis(self, name: str) -> int:
        for i, d in enumerate(self.dims):
            if d.name == name:
                return i
        raise SchemaError(f"unknown dimension {name!r}; schema has {list(self.names)}")

    def axes(self, names: Iterable[str]) -> tuple[int, ...]:
        """Axis positions of ``names`` sorted into schema order, duplicates removed."""
        return tuple(sorted({self.axis(n) for n in names}))

    def canonical(self, names: Iterable[str]) -> tuple[str, ...]:
        return tuple(self.dims[a].name for a in self.axes(names))

    def size_of(self, names: Iterable[str]) -> int:
        return int(np.prod([self.dims[a].size for a in self.axes(names)], dtype=np.int64))

    def sub(self, names: Iterable[str]) -> "DimensionSchema":
        return DimensionSchema(tuple(self.dims[a] for a in self.axes(names)))

    def without(self, names: Iterable[str]) -> "DimensionSchema":
        drop = set(self.axes(names))
        return DimensionSchema(tuple(d for i, d in enumerate(self.dims) if i not in drop))

    def compatible(self, other: "DimensionSchema") -> bool:
        """Same dimension names and sizes in the same order; labels may differ."""
        return self.names == other.names and self.shape == other.shape

    def to_dict(self) -> list[dict]:
        return [{"name": d.name, "values": list(d.values), "ordered": d.ordered} for d in self.dims]

    @classmethod
    def from_dict(cls, raw, temporal: Sequence[str] = TEMPORAL_NAMES, where="dimensions"):
        if not isinstance(raw, list) or not raw:
            raise ParseError("expected a non-empty list of dimensions", where)
        temporal = {t.lower() for t in temporal}
        dims = []
        for i, entry in enumerate(raw):
            loc = f"{where}[{i}]"
            if not isinstance(entry, dict) or "name" not in entry or "values" not in entry:
                raise ParseError("dimension needs 'name' and 'values'", loc)
            name, values = entry["name"], entry["values"]
            if not isinstance(name, str) or not isinstance(values, list):
                raise ParseError("'name' must be a string and 'values' a list", loc)
            ordered = entry.get("ordered", name.lower() in temporal)
            if not isinstance(ordered, bool):
                raise ParseError("'ordered' must be a boolean", loc)
            try:
                dims.append(Dimension(name, tuple(values), ordered))
            except SchemaError as exc:
                raise ParseError(str(exc), loc) from None
        try:
            return cls(tuple(dims))
        except SchemaError as exc:
            raise ParseError(str(exc), where) from None


class ScheduleTensor:
    """Immutable binary tensor with one axis per schema dimension."""

    __slots__ = ("schema", "data")

    def __init__(self, schema: DimensionSchema, data):
        arr = np.asarray(data)
        if arr.ndim == 1 and schema.ndim != 1:
            if arr.size != int(np.prod(schema.shape)):
                raise SchemaError(
                    f"data has {arr.size} cells, schema needs {int(np.prod(schema.shape))}"
                )
            arr = arr.reshape(schema.shape)
        if arr.shape != schema.shape:
            raise SchemaError(f"data shape {arr.shape} does not match schema shape {schema.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("schedule cells must be 0 or 1")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        self.schema = schema
        self.data = arr

    @classmethod
    def zeros(cls, schema: DimensionSchema) -> "ScheduleTensor":
        return cls(schema, np.zeros(schema.shape, dtype=np.uint8))

    @classmethod
    def from_cells(cls, schema: DimensionSchema, cells: Iterable[Sequence[int]]):
        arr = np.zeros(schema.shape, dtype=np.uint8)
        for idx in cells:
            idx = tuple(int(i) for i in idx)
            if len(idx) != schema.ndim or any(
                not 0 <= i < n for i, n in zip(idx, schema.shape)
            ):
                raise SchemaError(f"cell index {idx} outside schema shape {schema.shape}")
            arr[idx] = 1
        return cls(schema, arr)

    def __eq__(self, other):
        if not isinstance(other, ScheduleTensor):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.schema, self.data.tobytes()))

    def __repr__(self):
        shape = "x".join(str(n) for n in self.schema.shape)
        return f"ScheduleTensor({', '.join(self.schema.names)}; {shape}; ones={int(self.data.sum())})"

    @property
    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def _positions(self, fix: IndexTuple) -> dict[int, int]:
        return {self.schema.axis(n): self.schema[n].position(v) for n, v in fix.items()}

    def slice(self, fix: IndexTuple) -> "ScheduleTensor":
        """Sub-tensor with the dimensions in ``fix`` held at the given labels."""
        if not fix:
            return self
        pos = self._positions(fix)
        if len(pos) == self.schema.ndim:
            raise ArityError("fixing every dimension selects a single cell; use cell()")
        index = tuple(pos.get(a, slice(None)) for a in range(self.schema.ndim))
        return ScheduleTensor(self.schema.without(fix), self.data[index])

    def cell(self, full: IndexTuple) -> int:
        pos = self._positions(full)
        if len(pos) != self.schema.ndim:
            raise ArityError(
                f"cell() needs all {self.schema.ndim} dimensions fixed, got {sorted(full)}"
            )
        return int(self.data[tuple(pos[a] for a in range(self.schema.ndim))])

    def to_dict(self, dense: bool = False) -> dict:
        out = {"dimensions": self.schema.to_dict()}
        if dense:
            out["data"] = self.flat.tolist()
        else:
            out["cells"] = np.argwhere(self.data).tolist()
        return out

    @classmethod
    def from_dict(cls, raw, temporal: Sequence[str] = TEMPORAL_NAMES) -> "ScheduleTensor":
        if not isinstance(raw, dict) or "dimensions" not in raw:
            raise ParseError("schedule document needs a 'dimensions' key")
        schema = DimensionSchema.from_dict(raw["dimensions"], temporal)
        if "data" in raw:
            data = raw["data"]
            if not isinstance(data, list) or len(data) != int(np.prod(schema.shape)):
                raise ParseError("dense 'data' must list one 0/1 per cell", "data")
            try:
                return cls(schema, np.asarray(data).reshape(schema.shape))
            except ValueError as exc:
                raise ParseError(str(exc), "data") from None
        if "cells" not in raw or not isinstance(raw["cells"], list):
            raise ParseError("schedule document needs 'cells' or 'data'")
        try:
            return cls.from_cells(schema, raw["cells"])
        except (SchemaError, TypeError, ValueError) as exc:
            raise ParseError(str(exc), "cells") from None


def enumerate_product(schema: DimensionSchema, names: Iterable[str]) -> Iterator[dict[str, str]]:
    """Yield every element of the Cartesian product of ``names`` in canonical order."""
    names = list(names)
    if not names:
        raise SchemaError("need at least one dimension to enumerate")
    dims = [schema.dims[a] for a in schema.axes(names)]
    for combo in itertools.product(*(d.values for d in dims)):
        yield {d.name: v for d, v in zip(dims, combo)}


def load_schedule(path, temporal: Sequence[str] = TEMPORAL_NAMES) -> ScheduleTensor:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return ScheduleTensor.from_dict(raw, temporal)


def dump_schedule(t: ScheduleTensor, dense: bool = False) -> str:
    return json.dumps(t.to_dict(dense=dense))
