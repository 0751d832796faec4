"""Random schedules that satisfy a constraint model.

Each sample starts from a random tensor and is repaired by local search:
pick a violated constraint and one of its violated S-cells at random, then
flip the cell of that slice which lowers the constraint's violation while
raising the total violation least.  The sampler is not uniform over the
solution set; estimates built on it are estimates under this sampler.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend
from .aggregation import count_with_batch
from .errors import GenerationError
from .model import Constraint, ConstraintModel
from .tensor import DimensionSchema, ScheduleTensor

log = logging.getLogger(__name__)

_NO_UPPER = np.iinfo(np.int32).max


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    max_repair_steps: int = 10_000
    restarts: int = 50
    initial_density: float = 0.1
    # chance that a step ignores collateral damage and picks any improving flip
    noise: float = 0.1
    # random feasibility-preserving flips after repair; evens out the sampler's bias
    mix_steps: int = 0

    def __post_init__(self):
        if self.max_repair_steps < 1 or self.restarts < 0:
            raise ValueError("max_repair_steps must be positive and restarts non-negative")
        if self.mix_steps < 0:
            raise ValueError("mix_steps must be non-negative")
        if not 0.0 <= self.initial_density <= 1.0 or not 0.0 <= self.noise <= 1.0:
            raise ValueError("initial_density and noise must lie in [0, 1]")


class Layout:
    """Flat index tables the repair kernels run on.

    For constraint k, every cell maps to a slot ``u`` of Nonzero(X, M ∪ S) and
    to an S-cell ``s``; both are numbered globally across constraints.
    ``su_*`` lists each S-cell's slots in M order (CSR form) and ``sc_*``
    lists each S-cell's schedule cells.  ``u_pos`` is a slot's rank within
    its S-cell's list.
    """

    def __init__(self, schema: DimensionSchema, constraints):
        constraints = list(constraints)
        shape = np.array(schema.shape)
        self.schema = schema
        self.K = len(constraints)
        self.n_cells = int(np.prod(shape))
        coords = np.indices(schema.shape).reshape(schema.ndim, -1)

        kind, lo, hi = [], [], []
        u_of_cell, s_of_cell, su_idx, sc_idx, u_pos = [], [], [], [], []
        su_len, sc_len = [], []
        s_off, u_off = [0], 0
        for c in constraints:
            kind.append(c.kind.code)
            lo.append(0 if c.lower is None else c.lower)
            hi.append(_NO_UPPER if c.upper is None else c.upper)
            U, S, M = schema.axes(c.M + c.S), schema.axes(c.S), schema.axes(c.M)
            u = np.ravel_multi_index(coords[list(U)], shape[list(U)])
            s = np.ravel_multi_index(coords[list(S)], shape[list(S)])
            m = np.ravel_multi_index(coords[list(M)], shape[list(M)])
            n_u, n_s = int(np.prod(shape[list(U)])), int(np.prod(shape[list(S)]))
            u_s = np.empty(n_u, dtype=np.int64)
            u_m = np.empty(n_u, dtype=np.int64)
            u_s[u], u_m[u] = s, m
            su_idx.append(np.lexsort((u_m, u_s)) + u_off)
            su_len.append(np.bincount(u_s, minlength=n_s))
            sc_idx.append(np.argsort(s, kind="stable"))
            sc_len.append(np.bincount(s, minlength=n_s))
            u_pos.append(u_m)
            u_of_cell.append(u + u_off)
            s_of_cell.append(s + s_off[-1])
            u_off += n_u
            s_off.append(s_off[-1] + n_s)

        i32 = np.int32

        def cat(parts):
            return np.ascontiguousarray(np.concatenate(parts) if parts else np.zeros(0), dtype=i32)

        def ptr(lengths):
            return np.ascontiguousarray(
                np.concatenate([[0], np.cumsum(np.concatenate(lengths))]) if lengths else [0],
                dtype=i32,
            )

        self.n_u, self.n_s = u_off, s_off[-1]
        self.kind = np.array(kind, dtype=i32)
        self.lo = np.array(lo, dtype=i32)
        self.hi = np.array(hi, dtype=i32)
        self.s_off = np.array(s_off, dtype=i32)
        self.u_of_cell = cat(u_of_cell)
        # position of each slot along M; only meaningful when |M| == 1
        self.u_pos = cat(u_pos)
        self.s_of_cell = cat(s_of_cell)
        self.su_idx, self.su_ptr = cat(su_idx), ptr(su_len)
        self.sc_idx, self.sc_ptr = cat(sc_idx), ptr(sc_len)


def sample_bitgen(seed: int, index: int) -> np.random.PCG64:
    """Independent stream for sample ``index``; no dependence on other samples."""
    return np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))


def generate_one(
    m: ConstraintModel,
    index: int,
    cfg: GeneratorConfig = GeneratorConfig(),
    layout: Optional[Layout] = None,
    backend: Optional[str] = None,
) -> Optional[ScheduleTensor]:
    """Sample number ``index`` of the stream seeded by ``cfg.seed``, or None on failure."""
    layout = layout or Layout(m.schema, m.constraints)
    kernels = _backend.get(backend)
    X = np.zeros(layout.n_cells, dtype=np.uint8)
    ok, _ = kernels.repair(
        X,
        layout,
        sample_bitgen(cfg.seed, index),
        cfg.max_repair_steps,
        cfg.restarts,
        cfg.initial_density,
        cfg.noise,
        cfg.mix_steps,
    )
    if not ok:
        return None
    return ScheduleTensor(m.schema, X.reshape(m.schema.shape))


def generate(
    m: ConstraintModel,
    n: int,
    cfg: GeneratorConfig = GeneratorConfig(),
    backend: Optional[str] = None,
) -> list[ScheduleTensor]:
    """``n`` schedules satisfying ``m``.

    Raises GenerationError carrying the successful samples if any sample
    exhausts its repair budget.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    layout = Layout(m.schema, m.constraints)
    out = []
    for i in range(n):
        t = generate_one(m, i, cfg, layout, backend)
        if t is None:
            log.debug("sample %d exhausted its repair budget", i)
        else:
            out.append(t)
    if len(out) < n:
        raise GenerationError(out, n)
    return out


def violation_magnitude(t: ScheduleTensor, c: Constraint) -> int:
    """Summed distance of each S-cell's value from ``[lower, upper]``."""
    values, mask = count_with_batch(t.data[np.newaxis], t.schema, c.M, c.S, c.kind)
    values = values[0]
    lo = 0 if c.lower is None else c.lower
    hi = np.iinfo(np.int64).max if c.upper is None else c.upper
    dist = np.maximum(lo - values, 0) + np.maximum(values - hi, 0)
    if mask is not None:
        dist = np.where(mask[0], dist, 0)
    return int(dist.sum())
