"""Replicate sweeps: bootstrap and regenerated-data "Param" scenarios.

Each replicate ``r`` draws from ``rng.child(r)``, fits a model on the known
DAG and evaluates the requested shifts. Replicates are independent, so they
may run on a thread pool; output order is fixed regardless.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .datagen import OrdinalDataset, RngHandle, bootstrap_resample, sample_ordinal
from .errors import LatentOceError
from .estimation import fit_model
from .graph import Dag
from .io import make_record
from .oce import InterventionQuery, oce
from .sem import LatentDagModel

Shift = tuple  # (i, o, l, l_prime)

SUMMARY_FIELDS = ("i", "o", "l", "l_prime", "k", "mean", "sd", "q025", "q50", "q975", "n")


@dataclass
class SweepResult:
    records: list
    failures: list = field(default_factory=list)
    n_replicates: int = 0

    @property
    def failure_rate(self) -> float:
        return len(self.failures) / self.n_replicates if self.n_replicates else 0.0


def all_shifts(model: LatentDagModel, i: int, o: int) -> list[Shift]:
    L = model.levels[i - 1]
    return [(i, o, l, lp) for l in range(1, L + 1) for lp in range(1, L + 1) if l != lp]


def effect_records(
    model: LatentDagModel,
    shifts: Sequence[Shift],
    method: str = "closed",
    policy: str = "truncnorm",
    **extra,
) -> list[dict]:
    out = []
    for i, o, l, lp in shifts:
        table = oce(model, InterventionQuery(i, o, l, lp, policy, method))
        err = table.diagnostics.get("abs_error") if method != "closed" else None
        for k, val in enumerate(table.values, start=1):
            se = None if err is None else float(np.asarray(err)[k - 1])
            out.append(make_record(i, o, l, lp, k, val, method, se, **extra))
    return out


def _sweep(
    M: int,
    make_data: Callable[[int], OrdinalDataset],
    dag: Dag,
    shifts: Sequence[Shift],
    method: str,
    policy: str,
    workers: int | None,
) -> SweepResult:
    if M < 1:
        raise ValueError(f"need at least one replicate, got {M}")

    def one(r):
        try:
            fitted = fit_model(make_data(r), dag)
            return effect_records(fitted, shifts, method, policy, replicate=r), None
        except LatentOceError as exc:
            return [], (r, f"{type(exc).__name__}: {exc}")

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(M)))
    else:
        results = [one(r) for r in range(M)]
    records = [rec for recs, _ in results for rec in recs]
    failures = [f for _, f in results if f is not None]
    return SweepResult(records=records, failures=failures, n_replicates=M)


def bootstrap_sweep(
    data: OrdinalDataset,
    dag: Dag,
    M: int,
    shifts: Sequence[Shift],
    rng: RngHandle,
    method: str = "closed",
    policy: str = "truncnorm",
    workers: int | None = None,
) -> SweepResult:
    """Resample rows with replacement ``M`` times and refit on ``dag``."""
    return _sweep(M, lambda r: bootstrap_resample(data, rng.child(r)), dag, shifts, method, policy, workers)


def regenerated_sweep(
    model: LatentDagModel,
    N: int,
    M: int,
    shifts: Sequence[Shift],
    rng: RngHandle,
    method: str = "closed",
    policy: str = "truncnorm",
    workers: int | None = None,
) -> SweepResult:
    """Draw ``M`` fresh datasets of size ``N`` from ``model`` and refit on its DAG."""
    return _sweep(M, lambda r: sample_ordinal(model, N, rng.child(r)), model.dag, shifts, method, policy, workers)


def summarize(records: Sequence[dict]) -> list[dict]:
    """Mean, sd and 2.5/50/97.5% quantiles of ``value`` per ``(i, o, l, l', k)``."""
    groups: dict = {}
    for r in records:
        key = (r["i"], r["o"], r["l"], r["l_prime"], r["k"])
        groups.setdefault(key, []).append(r["value"])
    out = []
    for key in sorted(groups):
        vals = np.asarray(groups[key])
        q = np.quantile(vals, [0.025, 0.5, 0.975])
        out.append(
            dict(
                zip(SUMMARY_FIELDS, (*key, float(vals.mean()),
                                     float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
                                     float(q[0]), float(q[1]), float(q[2]), int(vals.size)))
            )
        )
    return out
