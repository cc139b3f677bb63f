"""Synthetic models and ordinal datasets.

The pipeline mirrors a standard simulation design: an Erdos-Renyi DAG over
a random order, edge weights of random sign with magnitude in
``(low, high)``, unit noise, model-level standardisation, and thresholds
cut from symmetric-Dirichlet cell probabilities via the normal quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DataError, ModelError
from .graph import Dag
from .sem import LatentDagModel, make_model, standardize
from .special import std_normal_quantile


@dataclass(frozen=True)
class RngHandle:
    """Seed plus stream id; each ``(seed, stream, path)`` names an independent PCG64 stream.

    ``generator()`` always restarts the stream, so a handle reproduces
    identical draws. Use :meth:`child` to derive independent sub-streams for
    replicates or parallel chunks.
    """

    seed: int
    stream: int = 0
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngHandle":
        return RngHandle(self.seed, self.stream, self.path + (int(index),))


RngLike = Union[RngHandle, np.random.Generator, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngHandle):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngHandle(int(rng)).generator()
    raise TypeError(f"expected RngHandle, Generator or int seed, got {type(rng).__name__}")


@dataclass(frozen=True, eq=False)
class OrdinalDataset:
    """``N x n`` integer levels; column ``m`` takes values in ``0..level_counts[m]-1``."""

    cells: np.ndarray
    level_counts: tuple
    labels: tuple | None = None

    def __post_init__(self):
        cells = np.asarray(self.cells)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise DataError(f"dataset must be a non-empty 2-D table, got shape {cells.shape}")
        if not np.issubdtype(cells.dtype, np.integer):
            if not np.all(np.isfinite(cells)) or not np.all(cells == np.round(cells)):
                raise DataError("dataset cells must be integer levels")
        cells = cells.astype(np.int64)
        counts = tuple(int(c) for c in self.level_counts)
        if len(counts) != cells.shape[1]:
            raise DataError("one level count per column required")
        for m, L in enumerate(counts):
            col = cells[:, m]
            if L < 1 or col.min() < 0 or col.max() >= L:
                raise DataError(f"column {m + 1} has levels outside 0..{L - 1}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "level_counts", counts)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    @property
    def n_cols(self) -> int:
        return self.cells.shape[1]

    def column(self, m: int) -> np.ndarray:
        """1-based column access."""
        return self.cells[:, m - 1]


def random_dag(n: int, expected_neighbors: float, rng: RngLike) -> Dag:
    """Erdos-Renyi DAG: random node order, each forward pair kept with ``p = expected_neighbors / (n - 1)``.

    ``expected_neighbors`` is the expected total (in + out) degree of a node.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ModelError(f"need n >= 2, got {n!r}")
    if not (0.0 < expected_neighbors <= n - 1):
        raise ModelError(f"expected_neighbors must lie in (0, {n - 1}], got {expected_neighbors}")
    gen = as_generator(rng)
    p = expected_neighbors / (n - 1)
    order = gen.permutation(n) + 1
    iu, ju = np.triu_indices(n, k=1)
    keep = gen.random(iu.size) < p
    edges = [(int(order[a]), int(order[b])) for a, b in zip(iu[keep], ju[keep])]
    return Dag(int(n), frozenset(edges))


def random_weights(dag: Dag, low: float = 0.4, high: float = 1.0, rng: RngLike = 0) -> dict:
    """Weights uniform on ``(-high, -low) U (low, high)``, signs equally likely."""
    if not (0.0 < low < high):
        raise ModelError(f"need 0 < low < high, got low={low}, high={high}")
    gen = as_generator(rng)
    edges = dag.sorted_edges()
    mag = gen.uniform(low, high, size=len(edges))
    sign = np.where(gen.random(len(edges)) < 0.5, -1.0, 1.0)
    return {e: float(s * w) for e, s, w in zip(edges, sign, mag)}


def random_thresholds(
    levels: int,
    nu: float = 2.0,
    rng: RngLike = 0,
    probs: Sequence[float] | None = None,
    max_retries: int = 100,
) -> np.ndarray:
    """Thresholds (with sentinels) from cell probabilities ``p ~ Dir(levels, nu)``.

    ``probs`` bypasses the Dirichlet draw. Draws whose cumulative sums come
    within 1e-12 of 0 or 1 are redrawn.
    """
    if not isinstance(levels, (int, np.integer)) or levels < 2:
        raise ModelError(f"need at least 2 levels, got {levels!r}")
    if not nu > 0.0:
        raise ModelError(f"concentration must be positive, got {nu}")
    gen = None if probs is not None else as_generator(rng)
    for _ in range(max_retries):
        if probs is not None:
            p = np.asarray(probs, dtype=np.float64)
            if p.shape != (levels,) or np.any(p < 0):
                raise ModelError("injected probabilities must be a non-negative vector of length levels")
            p = p / p.sum()
        else:
            g = gen.gamma(nu, 1.0, size=levels)
            p = g / g.sum()
        cum = np.cumsum(p)[:-1]
        if np.all(cum > 1e-12) and np.all(cum < 1.0 - 1e-12) and np.all(np.diff(cum) > 0):
            return np.concatenate(([-math.inf], std_normal_quantile(cum), [math.inf]))
        if probs is not None:
            break
    raise ModelError("could not draw thresholds with all cells bounded away from 0")


def random_model(
    n: int = 16,
    expected_neighbors: float = 5.0,
    weight_low: float = 0.4,
    weight_high: float = 1.0,
    level_range: tuple[int, int] = (2, 6),
    nu: float = 2.0,
    rng: RngLike = 0,
) -> LatentDagModel:
    """Random standardised latent model.

    Weights are drawn for unit noise variances and zero means, the model is
    standardised, then thresholds are cut on the unit-variance scale.
    """
    lo_L, hi_L = level_range
    if not (2 <= lo_L <= hi_L):
        raise ModelError(f"level range must satisfy 2 <= low <= high, got {level_range}")
    gen = as_generator(rng)
    dag = random_dag(n, min(expected_neighbors, n - 1), gen)
    b = random_weights(dag, weight_low, weight_high, gen)
    placeholder = [[0.0]] * dag.n
    base = standardize(make_model(dag, b, placeholder))
    levels = gen.integers(lo_L, hi_L + 1, size=dag.n)
    ths = [random_thresholds(int(L), nu, gen) for L in levels]
    return base.replace(thresholds=ths, tau=None)


def sample_latent(model: LatentDagModel, N: int, rng: RngLike) -> np.ndarray:
    """Ancestral sampling of ``N`` latent rows in topological order."""
    if N < 1:
        raise DataError(f"need N >= 1, got {N}")
    gen = as_generator(rng)
    eps = gen.standard_normal((int(N), model.n))
    y = np.empty_like(eps)
    sd = np.sqrt(model.v)
    mu = model.mu
    for m in model.dag.topological_order():
        col = mu[m - 1] + sd[m - 1] * eps[:, m - 1]
        for h in model.dag.parents(m):
            col += model.b[(h, m)] * (y[:, h - 1] - mu[h - 1])
        y[:, m - 1] = col
    return y


def standardize_sample(latent: np.ndarray) -> np.ndarray:
    """Centre and scale each latent column by its empirical moments."""
    latent = np.asarray(latent, dtype=np.float64)
    return (latent - latent.mean(axis=0)) / latent.std(axis=0)


def discretise_column(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Level ``l`` (0-based) such that ``alpha_l <= y < alpha_{l+1}``."""
    inner = np.asarray(thresholds)[1:-1]
    return np.searchsorted(inner, values, side="right")


def discretise(latent: np.ndarray, model: LatentDagModel) -> OrdinalDataset:
    latent = np.asarray(latent, dtype=np.float64)
    if latent.ndim != 2 or latent.shape[1] != model.n:
        raise DataError(f"latent matrix must have {model.n} columns, got shape {latent.shape}")
    if not np.all(np.isfinite(latent)):
        raise DataError("latent values must be finite")
    cells = np.column_stack(
        [discretise_column(latent[:, m], model.thresholds[m]) for m in range(model.n)]
    )
    return OrdinalDataset(cells, model.levels, model.dag.labels)


def sample_ordinal(model: LatentDagModel, N: int, rng: RngLike) -> OrdinalDataset:
    return discretise(sample_latent(model, N, rng), model)


def bootstrap_resample(data: OrdinalDataset, rng: RngLike) -> OrdinalDataset:
    """``N`` rows drawn uniformly with replacement."""
    gen = as_generator(rng)
    idx = gen.integers(0, data.n_rows, size=data.n_rows)
    return OrdinalDataset(data.cells[idx], data.level_counts, data.labels)
