"""Experiment grid: many trials, every requested selector, one CSV.

Each trial derives its own streams from ``SeedSequence(master_seed,
spawn_key=(trial, k))``: k = 0 seeds the instance, k = 1 + position seeds
the oracle of the k-th algorithm. Trials are independent, so they can run
in worker processes and still produce the same rows in the same order.
"""

from __future__ import annotations

import csv
import time
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .distributions import Distribution, HypothesisClass, tv_distance
from .instances import InstanceKind, brute_force_opt, generate_instance
from .logging_config import get_logger
from .sampling import OracleMode, SampleOracle
from .selectors import (
    RefinedParams,
    SelectionTrace,
    basic_select,
    refined_primal_run,
    select,
    yatracos_select,
)
from .validation import ALGORITHMS

logger = get_logger(__name__)

CSV_HEADER = (
    "trial",
    "algorithm",
    "n",
    "domain_size",
    "eps",
    "delta",
    "samples_used",
    "rounds",
    "tv_out",
    "opt",
    "guarantee_ok",
    "status",
    "wall_time_ms",
)

# Approximation factor each algorithm guarantees.
GUARANTEE_FACTORS: dict[str, int] = {"yatracos": 3, "basic": 2, "refined": 2, "select": 2}

# Numeric slack on the guarantee check.
GUARANTEE_SLACK = 1e-6

Selector = Callable[..., Distribution]


def _yatracos(
    Q: HypothesisClass,
    oracle: SampleOracle,
    eps: float,
    delta: float,
    params: RefinedParams,
    trace: SelectionTrace,
) -> Distribution:
    return yatracos_select(Q, oracle, eps, delta, trace)


SELECTORS: dict[str, Selector] = {
    "yatracos": _yatracos,
    "basic": basic_select,
    "refined": refined_primal_run,
    "select": select,
}


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int
    n: int
    domain_size: int
    eps: float
    delta: float
    algorithms: tuple[str, ...] = ("yatracos", "basic", "select")
    trials: int = 10
    instance_kind: InstanceKind = InstanceKind.RANDOM_DIRICHLET
    params: RefinedParams = field(default_factory=RefinedParams)
    oracle_mode: OracleMode = OracleMode.SAMPLED
    workers: int = 1
    record_wall_time: bool = True

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n < 1 or self.domain_size < 2:
            raise ValueError(f"need n >= 1 and domain_size >= 2, got {self.n}, {self.domain_size}")
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be >= 0, got {self.master_seed}")
        unknown = [name for name in self.algorithms if name not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise ValueError(f"unknown algorithms {unknown}; expected some of {list(ALGORITHMS)}")
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "instance_kind", InstanceKind(self.instance_kind))
        object.__setattr__(self, "oracle_mode", OracleMode(self.oracle_mode))

    @classmethod
    def from_config(
        cls, config: Mapping[str, Any], master_seed: int, **overrides: Any
    ) -> ExperimentConfig:
        """Build from a merged app config; ``overrides`` that are None are ignored."""
        settings = {
            "n": config["n"],
            "domain_size": config["domain_size"],
            "eps": config["eps"],
            "delta": config["delta"],
            "algorithms": tuple(config["algorithms"]),
            "trials": config["trials"],
            "instance_kind": config["instance_kind"],
            "oracle_mode": config["oracle_mode"],
            "workers": config["workers"],
            "record_wall_time": config["record_wall_time"],
        }
        settings.update({key: value for key, value in overrides.items() if value is not None})
        return cls(master_seed=master_seed, params=RefinedParams.from_config(config), **settings)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    algorithm: str
    n: int
    domain_size: int
    eps: float
    delta: float
    samples_used: int
    rounds: int
    tv_out: float
    opt: float
    guarantee_ok: bool
    status: str
    wall_time_ms: int

    def as_row(self) -> list[str]:
        return [
            str(self.trial),
            self.algorithm,
            str(self.n),
            str(self.domain_size),
            f"{self.eps:.12g}",
            f"{self.delta:.12g}",
            str(self.samples_used),
            str(self.rounds),
            f"{self.tv_out:.12g}",
            f"{self.opt:.12g}",
            "true" if self.guarantee_ok else "false",
            self.status,
            str(self.wall_time_ms),
        ]


def guarantee_holds(algorithm: str, tv_out: float, opt: float, eps: float) -> bool:
    return tv_out <= GUARANTEE_FACTORS[algorithm] * opt + eps + GUARANTEE_SLACK


def trial_seed(master_seed: int, trial: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(trial, stream))


def run_trial(config: ExperimentConfig, trial: int) -> list[TrialRecord]:
    """Run every configured algorithm on one trial's instance."""
    Q, p = generate_instance(
        trial_seed(config.master_seed, trial, 0),
        config.n,
        config.domain_size,
        config.instance_kind,
    )
    opt = brute_force_opt(p, Q)
    records = []
    for position, algorithm in enumerate(config.algorithms):
        oracle = SampleOracle(
            p, trial_seed(config.master_seed, trial, 1 + position), config.oracle_mode
        )
        trace = SelectionTrace()
        started = time.perf_counter()
        try:
            output = SELECTORS[algorithm](Q, oracle, config.eps, config.delta, config.params, trace)
            tv_out = tv_distance(output, p)
            ok = guarantee_holds(algorithm, tv_out, opt, config.eps)
            status = "ok"
        except Exception as e:
            logger.error(f"Trial {trial} {algorithm} failed: {type(e).__name__}: {e}")
            tv_out, ok = float("nan"), False
            status = f"error: {type(e).__name__}: {e}"
        elapsed = time.perf_counter() - started
        records.append(
            TrialRecord(
                trial=trial,
                algorithm=algorithm,
                n=Q.n,
                domain_size=Q.domain_size,
                eps=config.eps,
                delta=config.delta,
                samples_used=oracle.samples_drawn,
                rounds=trace.rounds,
                tv_out=tv_out,
                opt=opt,
                guarantee_ok=ok,
                status=status,
                wall_time_ms=round(elapsed * 1000) if config.record_wall_time else 0,
            )
        )
    return records


def write_csv(records: Sequence[TrialRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.as_row())


def run_experiment(config: ExperimentConfig, out: str | Path | None = None) -> list[TrialRecord]:
    """Run all trials (in ``config.workers`` processes) and optionally write the CSV."""
    logger.info(
        f"Running {config.trials} trials of {', '.join(config.algorithms)} "
        f"(n={config.n}, |X|={config.domain_size}, eps={config.eps}, mode={config.oracle_mode})"
    )
    trials = range(config.trials)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(run_trial, [config] * config.trials, trials))
    else:
        batches = [run_trial(config, trial) for trial in trials]
    records = [record for batch in batches for record in batch]

    failures = sum(not record.guarantee_ok for record in records)
    logger.info(f"Finished {len(records)} runs; {failures} missed their guarantee")
    if out is not None:
        write_csv(records, out)
        logger.info(f"Wrote {out}")
    return records
