"""Two-step parameter estimation from ordinal data given a known DAG.

1. Marginal thresholds from cumulative level frequencies.
2. Pairwise polychoric correlations with thresholds held fixed.
3. Per-node regression of each latent on its parents in the implied
   correlation matrix.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from . import _kernels
from .datagen import OrdinalDataset
from .errors import DataError, EstimationError, NumericError
from .graph import Dag
from .sem import LatentDagModel
from .special import std_normal_quantile

PROB_FLOOR = 1e-300
EIGEN_FLOOR = 1e-8
RHO_BOUND = 0.9999
RHO_GRID = np.linspace(-0.95, 0.95, 21)


@dataclass
class FittedParams:
    thresholds: list
    corr: np.ndarray
    b_hat: dict
    v_hat: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def estimate_thresholds(column, L: int) -> np.ndarray:
    """``alpha_l = Phi^{-1}(share of observations below level l)``, with sentinels.

    Raises:
        EstimationError: when a level is never observed, which pins a
            cumulative frequency at 0 or 1 (or repeats it).
    """
    col = np.asarray(column)
    if col.size < 1:
        raise DataError("need at least one observation")
    if col.min() < 0 or col.max() >= L:
        raise DataError(f"observed levels must lie in 0..{L - 1}")
    counts = np.bincount(col.astype(np.int64), minlength=L)
    cum = np.cumsum(counts)[:-1] / col.size
    for l, c in enumerate(cum, start=1):
        if c <= 0.0 or c >= 1.0:
            lev = l - 1 if c <= 0.0 else l
            raise EstimationError(
                f"level {lev} is never observed; threshold {l} cannot be estimated"
            )
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise EstimationError(f"level {int(missing[0])} is never observed")
    return np.concatenate(([-np.inf], std_normal_quantile(cum), [np.inf]))


def contingency(col_a, col_b, L_a: int, L_b: int) -> np.ndarray:
    idx = np.asarray(col_a, dtype=np.int64) * L_b + np.asarray(col_b, dtype=np.int64)
    return np.bincount(idx, minlength=L_a * L_b).reshape(L_a, L_b)


def polychoric_loglik(table: np.ndarray, alpha_a: np.ndarray, alpha_b: np.ndarray, rho: float) -> float:
    """Bivariate-probit log-likelihood of a contingency table at correlation ``rho``."""
    h = np.asarray(alpha_a, dtype=np.float64)[:, None]
    k = np.asarray(alpha_b, dtype=np.float64)[None, :]
    corners = _kernels.bvn_cdf(h, k, np.float64(rho))
    cells = np.diff(np.diff(corners, axis=0), axis=1)
    cells = np.maximum(cells, PROB_FLOOR)
    mask = table > 0
    return float(np.sum(table[mask] * np.log(cells[mask])))


def estimate_polychoric(col_a, col_b, alpha_a, alpha_b) -> float:
    """Maximum-likelihood latent correlation with thresholds held fixed.

    A coarse scan over ``rho in {-0.95, ..., 0.95}`` brackets the maximum,
    which is then refined by bounded Brent search to ``|drho| < 1e-6``.
    """
    col_a = np.asarray(col_a)
    col_b = np.asarray(col_b)
    if col_a.shape != col_b.shape:
        raise DataError("columns must have equal length")
    alpha_a = np.asarray(alpha_a, dtype=np.float64)
    alpha_b = np.asarray(alpha_b, dtype=np.float64)
    # fixed argument order, so that swapping the columns is bit-for-bit neutral
    key_a = (alpha_a.size, alpha_a.tobytes(), col_a.tobytes())
    key_b = (alpha_b.size, alpha_b.tobytes(), col_b.tobytes())
    if key_b < key_a:
        col_a, col_b, alpha_a, alpha_b = col_b, col_a, alpha_b, alpha_a
    table = contingency(col_a, col_b, alpha_a.size - 1, alpha_b.size - 1)
    if np.count_nonzero(table.sum(axis=1)) < 2 or np.count_nonzero(table.sum(axis=0)) < 2:
        raise EstimationError("contingency table is concentrated on one row or column; rho is not identifiable")

    def nll(r):
        return -polychoric_loglik(table, alpha_a, alpha_b, r)

    grid = np.concatenate(([-RHO_BOUND], RHO_GRID, [RHO_BOUND]))
    vals = np.array([nll(r) for r in grid])
    best = int(np.argmin(vals))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    res = minimize_scalar(nll, bounds=(lo, hi), method="bounded", options={"xatol": 1e-7})
    rho = float(res.x)
    if nll(rho) > vals[best]:
        rho = float(grid[best])
    return rho


def repair_correlation(corr: np.ndarray, floor: float = EIGEN_FLOOR) -> tuple[np.ndarray, dict]:
    """Clip eigenvalues at ``floor`` and rescale to unit diagonal if needed."""
    corr = 0.5 * (np.asarray(corr, dtype=np.float64) + np.asarray(corr, dtype=np.float64).T)
    evals, evecs = np.linalg.eigh(corr)
    info = {"min_eigenvalue": float(evals.min()), "eigen_floor_applied": False}
    if evals.min() >= floor:
        return corr, info
    fixed = (evecs * np.maximum(evals, floor)) @ evecs.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    fixed = 0.5 * (fixed + fixed.T)
    np.fill_diagonal(fixed, 1.0)
    info["eigen_floor_applied"] = True
    return fixed, info


def fit_given_dag(dag: Dag, corr, diagnostics: dict | None = None) -> tuple[dict, np.ndarray]:
    """Regress each node on its parents within ``corr``.

    Returns ``(b_hat, v_hat)`` with ``b_hat[(h, m)]`` the coefficient of
    parent ``h`` and ``v_hat[m-1] = 1 - R_mP R_PP^{-1} R_Pm``. A non-PD
    ``corr`` is repaired first; ``diagnostics`` (if given) records that.

    Raises:
        NumericError: a parent block is singular (collinear parents) or a
            fitted noise variance is not positive.
    """
    corr = np.asarray(corr, dtype=np.float64)
    if corr.shape != (dag.n, dag.n):
        raise DataError(f"correlation matrix must be {dag.n}x{dag.n}")
    # Collinear parents make the regression meaningless; an indefinite
    # matrix, by contrast, is repaired below.
    for m in range(1, dag.n + 1):
        P = [h - 1 for h in sorted(dag.parents(m))]
        if len(P) > 1:
            block = corr[np.ix_(P, P)]
            if np.abs(np.linalg.eigvalsh(0.5 * (block + block.T))).min() <= EIGEN_FLOOR:
                raise NumericError(f"parent correlation block of node {m} is singular")
    corr, info = repair_correlation(corr)
    if diagnostics is not None:
        diagnostics.update(info)
    b_hat: dict = {}
    v_hat = np.ones(dag.n)
    for m in range(1, dag.n + 1):
        pa = sorted(dag.parents(m))
        if not pa:
            continue
        P = [h - 1 for h in pa]
        r_pp = corr[np.ix_(P, P)]
        r_pm = corr[P, m - 1]
        try:
            coef = scipy.linalg.cho_solve(scipy.linalg.cho_factor(r_pp, lower=True), r_pm)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"parent correlation block of node {m} is singular") from exc
        for h, c in zip(pa, coef):
            b_hat[(h, m)] = float(c)
        v_hat[m - 1] = 1.0 - float(r_pm @ coef)
    if np.any(v_hat <= 0.0):
        bad = int(np.flatnonzero(v_hat <= 0.0)[0]) + 1
        raise NumericError(f"fitted noise variance of node {bad} is not positive")
    return b_hat, v_hat


def polychoric_matrix(data: OrdinalDataset, thresholds, pairs=None, workers: int | None = None) -> np.ndarray:
    """Pairwise polychoric correlations; unlisted pairs (when ``pairs`` given) are left at 0."""
    n = data.n_cols
    if pairs is None:
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]

    def est(pair):
        a, b = pair
        return estimate_polychoric(data.cells[:, a], data.cells[:, b], thresholds[a], thresholds[b])

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rhos = list(pool.map(est, pairs))
    else:
        rhos = [est(p) for p in pairs]
    corr = np.eye(n)
    for (a, b), r in zip(pairs, rhos):
        corr[a, b] = corr[b, a] = r
    return corr


def fit_params(data: OrdinalDataset, dag: Dag, workers: int | None = None) -> FittedParams:
    if data.n_cols != dag.n:
        raise DataError(f"dataset has {data.n_cols} columns but the DAG has {dag.n} nodes")
    ths = [estimate_thresholds(data.cells[:, m], data.level_counts[m]) for m in range(dag.n)]
    corr = polychoric_matrix(data, ths, workers=workers)
    diag: dict = {}
    b_hat, v_hat = fit_given_dag(dag, corr, diag)
    return FittedParams(thresholds=ths, corr=corr, b_hat=b_hat, v_hat=v_hat, diagnostics=diag)


def fit_model(data: OrdinalDataset, dag: Dag, workers: int | None = None) -> LatentDagModel:
    """Standardised :class:`LatentDagModel` fitted to ``data`` on the known ``dag``."""
    fp = fit_params(data, dag, workers=workers)
    labels = data.labels if data.labels is not None else dag.labels
    fitted_dag = dag if labels == dag.labels else Dag(dag.n, dag.edges, labels)
    return LatentDagModel(
        dag=fitted_dag,
        mu=np.zeros(dag.n),
        b=fp.b_hat,
        v=fp.v_hat,
        thresholds=fp.thresholds,
    )
