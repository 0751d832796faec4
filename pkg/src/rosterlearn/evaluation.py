"""Precision/recall of learned models against a target model, by sampling.

Recall is the fraction of target samples the learned model accepts;
precision is the fraction of learned-model samples the target accepts.
Both are estimates under the repair sampler, which is not uniform over
the solution set.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Sequence

import numpy as np

from ._io import atomic_write
from .errors import GenerationError, ParseError, UsageError
from .generator import GeneratorConfig, generate
from .learner import BackgroundKnowledge, Profile, enumerate_candidates, learn, profile, stack
from .model import ConstraintModel, check
from .tensor import ScheduleTensor

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "scenario",
    "train_size",
    "trial",
    "recall",
    "recall_heldout",
    "precision",
    "learn_seconds",
    "n_constraints",
)


@dataclass
class Scenario:
    name: str
    target: ConstraintModel
    background: BackgroundKnowledge = field(default_factory=BackgroundKnowledge)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    @property
    def schema(self):
        return self.target.schema

    @classmethod
    def from_dict(cls, raw) -> "Scenario":
        if not isinstance(raw, dict) or "target" not in raw:
            raise ParseError("scenario needs a 'target' model")
        gen = raw.get("generator", {})
        known = set(GeneratorConfig.__dataclass_fields__) - {"seed"}
        if not isinstance(gen, dict) or set(gen) - known:
            raise ParseError(f"generator settings must be a subset of {sorted(known)}", "generator")
        return cls(
            name=str(raw.get("name", "scenario")),
            target=ConstraintModel.from_dict(raw["target"]),
            background=BackgroundKnowledge.from_dict(raw.get("background", {"exclude": []})),
            generator=GeneratorConfig(**gen),
        )

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
        return cls.from_dict(raw)


def builtin_scenario(name: str) -> Scenario:
    """One of the bundled scenarios: ``small``, ``medium``, ``large``."""
    path = resources.files("rosterlearn") / "scenarios" / f"{name}.json"
    return Scenario.load(path)


@dataclass
class EvalConfig:
    scenario: Scenario
    pool_size: int = 10_000
    train_sizes: Sequence[int] = (1, 5, 10, 20, 50)
    trials: int = 5
    seed: int = 0
    precision_samples: int = 100

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if not self.train_sizes or min(self.train_sizes) < 1:
            raise UsageError("train sizes must be positive")
        if max(self.train_sizes) > self.pool_size:
            raise UsageError("a train size exceeds the pool size")


@dataclass(frozen=True)
class TrialResult:
    train_size: int
    trial: int
    recall: float
    recall_heldout: float
    precision: float
    learn_seconds: float
    n_constraints: int
    precision_samples: int


@dataclass
class EvalReport:
    scenario: str
    rows: list

    def averages(self) -> dict:
        """Per train size: mean of every numeric column (NaN-aware)."""
        out = {}
        for size in sorted({r.train_size for r in self.rows}):
            rows = [r for r in self.rows if r.train_size == size]
            out[size] = {
                name: float(np.nanmean([getattr(r, name) for r in rows]))
                if any(not math.isnan(getattr(r, name)) for r in rows)
                else float("nan")
                for name in ("recall", "recall_heldout", "precision", "learn_seconds", "n_constraints")
            }
        return out

    def write_csv(self, path):
        def fmt(v):
            return "" if isinstance(v, float) and math.isnan(v) else v

        with atomic_write(path) as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow(
                    [self.scenario, r.train_size, r.trial, fmt(r.recall), fmt(r.recall_heldout),
                     fmt(r.precision), f"{r.learn_seconds:.6f}", r.n_constraints]
                )

    def write_svg(self, path):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        avg = self.averages()
        sizes = list(avg)
        fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.5))
        left.plot(sizes, [avg[s]["recall"] for s in sizes], "o-", label="full pool")
        left.plot(sizes, [avg[s]["recall_heldout"] for s in sizes], "s--", label="held out")
        left.set_xlabel("number of examples")
        left.set_ylabel("average recall")
        left.set_ylim(0, 1.05)
        left.legend()
        right.plot(sizes, [avg[s]["learn_seconds"] for s in sizes], "o-")
        right.set_xlabel("number of examples")
        right.set_ylabel("learning time (s)")
        fig.suptitle(self.scenario)
        fig.tight_layout()
        with atomic_write(path) as fh:
            fig.savefig(fh, format="svg")
        plt.close(fig)


def satisfied_rows(prof: Profile, m: ConstraintModel) -> np.ndarray:
    """Boolean per profiled schedule: does it satisfy ``m``?

    Equivalent to ``check`` when every constraint of ``m`` is among the
    profile's candidates.
    """
    index = {c: j for j, c in enumerate(prof.candidates)}
    ok = np.ones(len(prof.mins), dtype=bool)
    for c in m.constraints:
        j = index.get((c.kind, c.M, c.S))
        if j is None:
            raise KeyError(f"constraint {c.kind} M={c.M} S={c.S} was not profiled")
        fine = np.ones_like(ok)
        if c.lower is not None:
            fine &= prof.mins[:, j] >= c.lower
        if c.upper is not None:
            fine &= prof.maxs[:, j] <= c.upper
        ok &= fine | (prof.support[:, j] == 0)
    return ok


def estimate_recall(
    target: ConstraintModel, learned: ConstraintModel, pool: Sequence[ScheduleTensor]
) -> float:
    """Fraction of ``pool`` (samples of the target) accepted by ``learned``."""
    if not pool:
        raise UsageError("recall needs a non-empty pool")
    return sum(check(t, learned).satisfied for t in pool) / len(pool)


def estimate_precision(
    target: ConstraintModel,
    learned: ConstraintModel,
    cfg: GeneratorConfig = GeneratorConfig(),
    n: int = 100,
) -> float:
    """Fraction of samples from ``learned`` accepted by ``target``.

    If the generator cannot produce all ``n`` samples the estimate uses the
    ones it did produce and logs a warning; NaN when there are none.
    """
    try:
        samples = generate(learned, n, cfg)
    except GenerationError as exc:
        log.warning("precision estimate from %d of %d samples", len(exc.samples), n)
        samples = exc.samples
    if not samples:
        return float("nan")
    return sum(check(t, target).satisfied for t in samples) / len(samples)


def _subseed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=key).generate_state(1)[0])


def run_experiment(cfg: EvalConfig, progress=None) -> EvalReport:
    """Pool → repeated seeded subsets → learn (timed) → recall and precision.

    Raises GenerationError when the target pool cannot be generated.
    """
    sc = cfg.scenario
    gen = sc.generator
    pool_cfg = replace(gen, seed=_subseed(cfg.seed, 0))
    pool = generate(sc.target, cfg.pool_size, pool_cfg)
    candidates = list(enumerate_candidates(sc.schema, sc.background))
    prof = profile(stack(pool), sc.schema, candidates)

    rows = []
    for size in cfg.train_sizes:
        for trial in range(cfg.trials):
            rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1, size, trial)))
            idx = np.sort(rng.choice(cfg.pool_size, size=size, replace=False))
            train = [pool[i] for i in idx]
            start = time.perf_counter()
            learned = learn(train, sc.background)
            seconds = time.perf_counter() - start

            accepted = satisfied_rows(prof, learned)
            held = np.ones(cfg.pool_size, dtype=bool)
            held[idx] = False
            recall = float(accepted.mean())
            recall_heldout = float(accepted[held].mean()) if held.any() else float("nan")

            prec_cfg = replace(gen, seed=_subseed(cfg.seed, 2, size, trial))
            try:
                samples = generate(learned, cfg.precision_samples, prec_cfg)
            except GenerationError as exc:
                log.warning(
                    "size %d trial %d: precision from %d of %d samples",
                    size, trial, len(exc.samples), cfg.precision_samples,
                )
                samples = exc.samples
            precision = (
                sum(check(t, sc.target).satisfied for t in samples) / len(samples)
                if samples else float("nan")
            )
            row = TrialResult(size, trial, recall, recall_heldout, precision, seconds,
                              len(learned), len(samples))
            rows.append(row)
            if progress:
                progress(row)
    return EvalReport(sc.name, rows)
