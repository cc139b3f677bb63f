"""Monte Carlo ground truth for ordinal causal effects.

Each arm draws the intervention value from the policy on its band,
overwrites the intervention node, propagates the SEM forward with fresh
noise and tabulates the outcome's discretised level.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datagen import RngHandle, discretise_column
from .errors import DegenerateIntervalError, DegenerateLevelError, QueryError
from .oce import InterventionQuery
from .sem import LatentDagModel, covariance
from .special import TruncatedNormal

CHUNK = 1 << 17


@dataclass(frozen=True)
class OracleEstimate:
    """Per-level effect estimate, its standard error and the draws per arm."""

    value: np.ndarray
    std_err: np.ndarray
    n_samples: int


def _policy_sampler(model: LatentDagModel, i: int, l: int, policy: str):
    t = model.thresholds[i - 1]
    lo, hi = float(t[l - 1]), float(t[l])
    if policy == "truncnorm":
        try:
            tn = TruncatedNormal(float(model.mu[i - 1]), float(covariance(model).d[i - 1]), lo, hi)
        except DegenerateIntervalError as exc:
            raise DegenerateLevelError(f"level {l} of intervention node {i}: {exc}") from exc
        return tn.quantile
    return lambda u: lo + u * (hi - lo)


def _relevant_nodes(model: LatentDagModel, o: int) -> list[int]:
    keep = model.dag.ancestors(o) | {o}
    return [m for m in model.dag.topological_order() if m in keep]


def _simulate_levels(model, nodes, i, o, quantile, eps, u):
    """Outcome levels (0-based) for one chunk of rows."""
    col_of = {m: c for c, m in enumerate(nodes)}
    y = np.empty_like(eps)
    mu = model.mu
    sd = np.sqrt(model.v)
    for m in nodes:
        c = col_of[m]
        if m == i:
            y[:, c] = quantile(u)
            continue
        col = mu[m - 1] + sd[m - 1] * eps[:, c]
        for h in model.dag.parents(m):
            if h in col_of:
                col += model.b[(h, m)] * (y[:, col_of[h]] - mu[h - 1])
        y[:, c] = col
    return discretise_column(y[:, col_of[o]], model.thresholds[o - 1])


def oracle_oce(
    model: LatentDagModel,
    i: int,
    o: int,
    l: int,
    l_prime: int,
    policy: str = "truncnorm",
    N: int = 1_000_000,
    rng: RngHandle | int = 0,
    common_random_numbers: bool = False,
    workers: int | None = None,
    chunk_size: int = CHUNK,
) -> OracleEstimate:
    """Estimate ``OCE(k, l -> l')`` for every outcome level by simulation.

    Rows are generated in fixed-size chunks, chunk ``c`` of arm ``a`` using
    the sub-stream ``rng.child(a).child(c)``; counts are integers, so the
    merged result is identical for any ``workers``. With
    ``common_random_numbers`` both arms share noise and uniforms (the
    intervention values are then quantile-matched) and the standard error
    is computed from the paired differences.
    """
    InterventionQuery(i, o, l, l_prime, policy, "numeric-dist").validate(model)
    if N < 1:
        raise QueryError(f"need N >= 1, got {N}")
    handle = rng if isinstance(rng, RngHandle) else RngHandle(int(rng))
    L_o = model.levels[o - 1]
    nodes = _relevant_nodes(model, o)
    q_from = _policy_sampler(model, i, l, policy)
    q_to = _policy_sampler(model, i, l_prime, policy)
    sizes = [min(chunk_size, N - s) for s in range(0, N, chunk_size)]

    def run_chunk(c):
        size = sizes[c]
        out = []
        for arm, quant in ((0, q_from), (1, q_to)):
            stream = handle.child(0 if common_random_numbers else arm).child(c)
            gen = stream.generator()
            eps = gen.standard_normal((size, len(nodes)))
            u = gen.random(size)
            out.append(_simulate_levels(model, nodes, i, o, quant, eps, u))
        lev0, lev1 = out
        c0 = np.bincount(lev0, minlength=L_o)
        c1 = np.bincount(lev1, minlength=L_o)
        both = np.bincount(lev0[lev0 == lev1], minlength=L_o)
        return c0, c1, both

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(len(sizes))))
    else:
        parts = [run_chunk(c) for c in range(len(sizes))]
    c0 = sum(p[0] for p in parts)
    c1 = sum(p[1] for p in parts)
    both = sum(p[2] for p in parts)
    p0 = c0 / N
    p1 = c1 / N
    value = (c1 - c0) / N
    if common_random_numbers:
        # paired rows: d = 1[arm1 = k] - 1[arm0 = k]
        ed2 = (c0 + c1 - 2 * both) / N
        var = np.maximum(ed2 - value**2, 0.0) / N
    else:
        var = (p0 * (1 - p0) + p1 * (1 - p1)) / N
    return OracleEstimate(value=value, std_err=np.sqrt(var), n_samples=int(N))
