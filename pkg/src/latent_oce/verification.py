"""Built-in reference cases with known values.

* Two binary variables ``X1 -> X2`` (b = 0.5, thresholds 0.2 / 0.4, unit
  noise): the latent OCE coincides with the contingency-table risk
  difference, -0.281642 / +0.281642.
* Three binary variables ``X1 -> X2 -> X3, X1 -> X3`` (b = 0.5, 0.8, 0.9;
  thresholds 1.2, 2.4, 3.3): effect of shifting X2 0 -> 1 on X3 is
  -0.2590655 / +0.2590634 on the latent scale, while the back-door risk
  difference from the ordinal table is -0.3617032. A Gaussian latent model
  cannot reproduce an arbitrary three-way binary table, so the two differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import RngHandle, sample_ordinal
from .graph import Dag
from .oce import InterventionQuery, oce_closed_form, oce_numeric
from .sem import LatentDagModel, covariance, make_model
from .special import bvn_cdf, std_normal_cdf

BINARY_OCE = (-0.281642, 0.281642)
BINARY_DIST = (-0.2816425, 0.281642)
BINARY_QUANT = (-0.2816404, 0.2816419)
THREE_BINARY_RISK_I0 = -0.3617032
THREE_BINARY_OCE = (-0.2590655, 0.2590634)

TOL_BINARY = 1e-4
TOL_RISK_MATCH = 1e-6
TOL_THREE_BINARY = 1e-3
TOL_THREE_BINARY_MC = 5e-3
MIN_THREE_BINARY_GAP = 0.05


def binary_model() -> LatentDagModel:
    return make_model(Dag(2, frozenset({(1, 2)}), ("X1", "X2")), {(1, 2): 0.5}, [[0.2], [0.4]])


def three_binary_model() -> LatentDagModel:
    dag = Dag(3, frozenset({(1, 2), (1, 3), (2, 3)}), ("X1", "X2", "X3"))
    b = {(1, 2): 0.5, (1, 3): 0.8, (2, 3): 0.9}
    return make_model(dag, b, [[1.2], [2.4], [3.3]])


def binary_risk_difference(model: LatentDagModel) -> tuple[float, float]:
    """``(I0, I1)`` from the 2x2 table implied by a two-node binary model.

    Cell probabilities come from the bivariate normal CDF at the
    standardised thresholds; with no confounding,
    ``I0 = P(X2=0 | X1=1) - P(X2=0 | X1=0)``.
    """
    sig = covariance(model).sigma
    d = np.sqrt(np.diag(sig))
    rho = sig[0, 1] / (d[0] * d[1])
    h = (model.thresholds[0][1] - model.mu[0]) / d[0]
    k = (model.thresholds[1][1] - model.mu[1]) / d[1]
    delta = bvn_cdf(h, k, rho)  # X1 = 0, X2 = 0
    beta = std_normal_cdf(h) - delta  # X1 = 0, X2 = 1
    upsilon = std_normal_cdf(k) - delta  # X1 = 1, X2 = 0
    theta = 1.0 - delta - beta - upsilon
    i0 = upsilon / (upsilon + theta) - delta / (delta + beta)
    i1 = theta / (upsilon + theta) - beta / (delta + beta)
    return float(i0), float(i1)


def three_binary_risk_difference(
    model: LatentDagModel, N: int = 10_000_000, rng: RngHandle | None = None, chunk: int = 1_000_000
) -> tuple[float, float]:
    """Back-door-adjusted risk difference of X2 on X3 from a simulated 2x2x2 table."""
    rng = rng or RngHandle(20_240_601)
    counts = np.zeros(8, dtype=np.int64)
    for c, start in enumerate(range(0, N, chunk)):
        data = sample_ordinal(model, min(chunk, N - start), rng.child(c))
        x = data.cells
        counts += np.bincount(x[:, 0] * 4 + x[:, 1] * 2 + x[:, 2], minlength=8)
    p = counts.reshape(2, 2, 2) / N
    p_x1 = p[1].sum()

    def p3(x1, x2):
        return p[x1, x2, 1] / p[x1, x2].sum()

    i1 = (p3(0, 1) * (1 - p_x1) + p3(1, 1) * p_x1) - (p3(0, 0) * (1 - p_x1) + p3(1, 0) * p_x1)
    return float(-i1), float(i1)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tol: float
    kind: str = "match"  # "match": |delta| <= tol, "differ": |delta| > tol

    @property
    def delta(self) -> float:
        return self.value - self.expected

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.kind == "differ":
            return abs(self.delta) > self.tol
        return abs(self.delta) <= self.tol

    def line(self) -> str:
        rel = ">" if self.kind == "differ" else "<="
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<42s} value={self.value:+.7f} ref={self.expected:+.7f} "
            f"delta={self.delta:+.2e} (need |delta| {rel} {self.tol:g})"
        )


def binary_checks() -> list[Check]:
    m = binary_model()
    closed = oce_closed_form(m, 1, 2, 1, 2).values
    dist = oce_numeric(m, InterventionQuery(1, 2, 1, 2, approach="numeric-dist")).values
    quant = oce_numeric(m, InterventionQuery(1, 2, 1, 2, approach="numeric-quant")).values
    i0, i1 = binary_risk_difference(m)
    out = []
    for k in range(2):
        out.append(Check(f"binary closed OCE level {k}", closed[k], BINARY_OCE[k], TOL_BINARY))
        out.append(Check(f"binary numeric-dist OCE level {k}", dist[k], BINARY_DIST[k], TOL_BINARY))
        out.append(Check(f"binary numeric-quant OCE level {k}", quant[k], BINARY_QUANT[k], TOL_BINARY))
    out.append(Check("binary risk difference I0 vs closed", i0, closed[0], TOL_RISK_MATCH))
    out.append(Check("binary risk difference I1 vs closed", i1, closed[1], TOL_RISK_MATCH))
    out.append(Check("binary risk difference I0 vs table", i0, BINARY_OCE[0], TOL_BINARY))
    return out


def three_binary_checks(N: int = 10_000_000, rng: RngHandle | None = None) -> list[Check]:
    m = three_binary_model()
    closed = oce_closed_form(m, 2, 3, 1, 2).values
    i0, _ = three_binary_risk_difference(m, N, rng)
    return [
        Check("three-binary closed OCE level 0", closed[0], THREE_BINARY_OCE[0], TOL_THREE_BINARY),
        Check("three-binary closed OCE level 1", closed[1], THREE_BINARY_OCE[1], TOL_THREE_BINARY),
        Check(f"three-binary MC risk difference I0 (N={N:.0e})", i0, THREE_BINARY_RISK_I0, TOL_THREE_BINARY_MC),
        Check("three-binary risk difference vs latent OCE", i0, closed[0], MIN_THREE_BINARY_GAP, kind="differ"),
    ]


def verification_checks(N: int = 10_000_000, rng: RngHandle | None = None) -> list[Check]:
    return binary_checks() + three_binary_checks(N, rng)
