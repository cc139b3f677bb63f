"""Latent Gaussian DAG model: parameters, implied covariance, standardisation.

Matrix convention: the dense coefficient matrix stores ``B[j, h] = beta_hj``
(row = child, column = parent, 0-based), so that
``Sigma = (I - B)^{-1} V (I - B)^{-T}`` and ``W = (I - B)^{-1}`` with
``W[j, h]`` the total effect of ``h`` on ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import ModelError
from .graph import Dag
from .special import normal_band

SYMMETRY_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _full_thresholds(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64).ravel()
    if t.size and t[0] == -math.inf:
        full = t
    else:
        full = np.concatenate(([-math.inf], t, [math.inf]))
    return full


@dataclass(frozen=True)
class CovarianceBundle:
    """``sigma``: implied covariance; ``w``: total effects ``(I-B)^{-1}``; ``d``: marginal sds."""

    sigma: np.ndarray
    w: np.ndarray
    d: np.ndarray


def total_effect_matrix(dag: Dag, b: Mapping[tuple[int, int], float], skip: int | None = None):
    """Return ``W = (I - B)^{-1}`` by forward substitution along the topological order.

    Row ``j`` satisfies ``W[j] = e_j + sum_h beta_hj W[h]``. Edges into node
    ``skip`` (1-based) are ignored, which yields the mutilated ``W~``.
    """
    n = dag.n
    w = np.zeros((n, n))
    for j in dag.topological_order():
        row = w[j - 1]
        row[j - 1] = 1.0
        if j == skip:
            continue
        for h in dag.parents(j):
            row += b[(h, j)] * w[h - 1]
    return w


@dataclass(frozen=True, eq=False)
class LatentDagModel:
    """Gaussian DAG over latent ``Y`` plus per-node discretisation thresholds.

    Attributes:
        dag: causal skeleton.
        mu: latent means, length ``n`` (node ``m`` at index ``m - 1``).
        b: path coefficients keyed by edge ``(h, j)``.
        v: noise variances, strictly positive.
        thresholds: per node, strictly increasing cut points including the
            ``-inf``/``+inf`` sentinels. Interior-only vectors are accepted
            and padded.
        tau: per-node level labels; defaults to ``0..L_m-1``.
    """

    dag: Dag
    mu: np.ndarray
    b: Mapping[tuple[int, int], float]
    v: np.ndarray
    thresholds: Sequence[np.ndarray]
    tau: tuple | None = field(default=None)

    def __post_init__(self):
        n = self.dag.n
        mu = _frozen(self.mu).ravel()
        v = _frozen(self.v).ravel()
        if mu.shape != (n,) or v.shape != (n,):
            raise ModelError(f"mu and v must have length {n}")
        if not np.all(np.isfinite(mu)):
            raise ModelError("mu must be finite")
        if not np.all(v > 0.0) or not np.all(np.isfinite(v)):
            raise ModelError("noise variances must be strictly positive and finite")
        b = {(int(h), int(j)): float(w) for (h, j), w in dict(self.b).items()}
        if set(b) != set(self.dag.edges):
            extra = sorted(set(b) - set(self.dag.edges))
            missing = sorted(set(self.dag.edges) - set(b))
            raise ModelError(
                f"coefficients must match edges exactly (extra={extra}, missing={missing})"
            )
        if not all(math.isfinite(x) for x in b.values()):
            raise ModelError("coefficients must be finite")
        if len(self.thresholds) != n:
            raise ModelError(f"expected thresholds for {n} nodes, got {len(self.thresholds)}")
        ths = []
        for m, t in enumerate(self.thresholds, start=1):
            full = _full_thresholds(t)
            if full.size < 3:
                raise ModelError(f"node {m}: need at least 2 levels")
            if full[0] != -math.inf or full[-1] != math.inf:
                raise ModelError(f"node {m}: thresholds must end with -inf/+inf sentinels")
            inner = full[1:-1]
            if not np.all(np.isfinite(inner)):
                raise ModelError(f"node {m}: interior thresholds must be finite")
            if not np.all(np.diff(full) > 0.0):
                raise ModelError(f"node {m}: thresholds must be strictly increasing")
            full = full.copy()
            full.setflags(write=False)
            ths.append(full)
        if self.tau is None:
            tau = tuple(tuple(range(len(t) - 1)) for t in ths)
        else:
            tau = tuple(tuple(x) for x in self.tau)
            if len(tau) != n or any(len(tm) != len(t) - 1 for tm, t in zip(tau, ths)):
                raise ModelError("tau must give one label per level for every node")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "thresholds", tuple(ths))
        object.__setattr__(self, "tau", tau)

    @property
    def n(self) -> int:
        return self.dag.n

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(len(t) - 1 for t in self.thresholds)

    def b_matrix(self) -> np.ndarray:
        """Dense ``B`` with ``B[j-1, h-1] = beta_hj``."""
        out = np.zeros((self.n, self.n))
        for (h, j), w in self.b.items():
            out[j - 1, h - 1] = w
        return out

    @cached_property
    def _bundle(self) -> CovarianceBundle:
        w = total_effect_matrix(self.dag, self.b)
        sigma = (w * self.v) @ w.T
        sigma = 0.5 * (sigma + sigma.T)
        d = np.sqrt(np.diag(sigma))
        for a in (w, sigma, d):
            a.setflags(write=False)
        return CovarianceBundle(sigma=sigma, w=w, d=d)

    def replace(self, **changes) -> "LatentDagModel":
        kw = dict(dag=self.dag, mu=self.mu, b=self.b, v=self.v,
                  thresholds=self.thresholds, tau=self.tau)
        kw.update(changes)
        return LatentDagModel(**kw)


def covariance(model: LatentDagModel) -> CovarianceBundle:
    """Implied covariance ``Sigma``, total-effect matrix ``W`` and sds ``d``."""
    return model._bundle


def total_effect(model: LatentDagModel, h: int, j: int) -> float:
    """Total causal effect of ``Y_h`` on ``Y_j``: the path-coefficient sum ``W[j, h]``."""
    model.dag._check(h)
    model.dag._check(j)
    if h == j:
        raise ModelError("total effect needs two distinct nodes")
    return float(covariance(model).w[j - 1, h - 1])


def standardize(model: LatentDagModel) -> LatentDagModel:
    """Rescale to zero means and unit latent variances, keeping the ordinal law.

    ``b'_hj = b_hj d_h / d_j``, ``v'_j = v_j / d_j^2``,
    ``alpha'(m, l) = (alpha(m, l) - mu_m) / d_m``.
    """
    d = covariance(model).d
    b = {(h, j): w * d[h - 1] / d[j - 1] for (h, j), w in model.b.items()}
    v = model.v / d**2
    ths = [(t - model.mu[m]) / d[m] for m, t in enumerate(model.thresholds)]
    # sentinels survive the affine map unchanged
    return model.replace(mu=np.zeros(model.n), b=b, v=v, thresholds=ths)


def marginal_cell_probs(model: LatentDagModel, m: int) -> np.ndarray:
    """Marginal probabilities of the ordinal levels of node ``m``."""
    model.dag._check(m)
    bundle = covariance(model)
    z = (model.thresholds[m - 1] - model.mu[m - 1]) / bundle.d[m - 1]
    return np.asarray(normal_band(z[:-1], z[1:]))


def make_model(
    dag: Dag,
    b: Mapping[tuple[int, int], float],
    thresholds: Sequence,
    mu=None,
    v=None,
    tau=None,
) -> LatentDagModel:
    """Convenience constructor: zero means and unit noise variances by default."""
    n = dag.n
    return LatentDagModel(
        dag=dag,
        mu=np.zeros(n) if mu is None else mu,
        b=b,
        v=np.ones(n) if v is None else v,
        thresholds=thresholds,
        tau=tau,
    )
