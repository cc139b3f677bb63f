"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (``pytest tests/test_acceptance.py -s``) or directly with
``python tests/test_acceptance.py``. Each criterion function returns a
``Verdict``; tolerances and runtime limits are pinned below.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import integrate

from latent_oce import InterventionQuery, make_model, oce_closed_form, oce_numeric, oce_tensor, oracle_oce
from latent_oce.cli import main
from latent_oce.datagen import RngHandle, random_model
from latent_oce.intervention import post_intervention_adjustment, post_intervention_mutilated
from latent_oce.oce import oce_cumulative
from latent_oce.pipeline import regenerated_sweep, summarize
from latent_oce.sem import standardize
from latent_oce.special import bvn_cdf, owen_t, std_normal_cdf
from latent_oce.verification import (
    BINARY_DIST,
    BINARY_OCE,
    BINARY_QUANT,
    THREE_BINARY_OCE,
    THREE_BINARY_RISK_I0,
    binary_model,
    binary_risk_difference,
    three_binary_model,
    three_binary_risk_difference,
)


@dataclass
class Verdict:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float | None = None

    @property
    def ok(self) -> bool:
        return self.passed and (self.limit is None or self.seconds < self.limit)

    def line(self) -> str:
        limit = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"{'PASS' if self.ok else 'FAIL'}  [{self.number}] {self.title}: {self.detail}; {self.seconds:.2f} s{limit}"


def _timed(fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return passed, detail, time.perf_counter() - t0


def _descendant_query(model, rng):
    pairs = [(i, o) for i in range(1, model.n + 1) for o in sorted(model.dag.descendants(i))]
    i, o = pairs[int(rng.integers(len(pairs)))]
    l, lp = (int(x) for x in rng.choice(np.arange(1, model.levels[i - 1] + 1), 2, replace=False))
    return i, o, l, lp


def _model_with_edges(seed, **kw):
    # skip edgeless draws so every model carries at least one causal pair
    while True:
        m = random_model(rng=RngHandle(seed), **kw)
        if m.dag.edges:
            return m
        seed += 10_000


# -- 1 -------------------------------------------------------------------------


def criterion_1() -> Verdict:
    def run():
        m = binary_model()
        closed = oce_closed_form(m, 1, 2, 1, 2).values
        dist = oce_numeric(m, InterventionQuery(1, 2, 1, 2, approach="numeric-dist")).values
        quant = oce_numeric(m, InterventionQuery(1, 2, 1, 2, approach="numeric-quant")).values
        i0, i1 = binary_risk_difference(m)
        errs = {
            "closed": np.abs(closed - BINARY_OCE).max(),
            "dist": np.abs(dist - BINARY_DIST).max(),
            "quant": np.abs(quant - BINARY_QUANT).max(),
        }
        risk = max(abs(i0 - closed[0]), abs(i1 - closed[1]))
        ok = max(errs.values()) <= 1e-4 and risk <= 1e-6
        detail = (f"OCE(0)={closed[0]:+.7f}; max |err| closed {errs['closed']:.1e}, dist {errs['dist']:.1e}, "
                  f"quant {errs['quant']:.1e} (<= 1e-4); risk-diff gap {risk:.1e} (<= 1e-6)")
        return ok, detail

    return Verdict(1, "binary case", *_timed(run), limit=1.0)


# -- 2 -------------------------------------------------------------------------


def criterion_2() -> Verdict:
    def run():
        m = three_binary_model()
        closed = oce_closed_form(m, 2, 3, 1, 2).values
        i0, _ = three_binary_risk_difference(m, N=10_000_000, rng=RngHandle(20_240_601))
        e_oce = np.abs(closed - THREE_BINARY_OCE).max()
        e_risk = abs(i0 - THREE_BINARY_RISK_I0)
        gap = abs(i0 - closed[0])
        ok = e_oce <= 1e-3 and e_risk <= 5e-3 and gap > 0.05
        detail = (f"OCE=({closed[0]:+.7f}, {closed[1]:+.7f}) |err| {e_oce:.1e} (<= 1e-3); "
                  f"I0={i0:+.7f} |err| {e_risk:.1e} (<= 5e-3); latent vs table gap {gap:.3f} (> 0.05)")
        return ok, detail

    return Verdict(2, "three-binary case", *_timed(run), limit=30.0)


# -- 3 -------------------------------------------------------------------------


def criterion_3() -> Verdict:
    def run():
        rng = np.random.default_rng(3)
        worst = 0.0
        for s in range(100):
            n = int(rng.integers(2, 17))
            m = random_model(n=n, expected_neighbors=min(5.0, n - 1.0), rng=RngHandle(3_000 + s))
            for _ in range(5):
                i, o = (int(x) for x in rng.choice(np.arange(1, n + 1), 2, replace=False))
                y = float(rng.normal(scale=2.0))
                a = post_intervention_adjustment(m, i, o, y)
                b = post_intervention_mutilated(m, i, o, y)
                worst = max(worst, abs(a.mu_do - b.mu_do), abs(a.var_do - b.var_do))
        return worst <= 1e-10, f"500 queries, max |diff| {worst:.1e} (<= 1e-10)"

    return Verdict(3, "adjustment vs mutilated SEM", *_timed(run), limit=10.0)


# -- 4 -------------------------------------------------------------------------


def criterion_4() -> Verdict:
    def run():
        rng = np.random.default_rng(4)
        worst, entries, bad = 0.0, 0, 0
        for s in range(20):
            m = _model_with_edges(4_000 + s, n=int(rng.integers(3, 11)), expected_neighbors=3.0)
            i, o, l, lp = _descendant_query(m, rng)
            closed = oce_closed_form(m, i, o, l, lp).values
            est = oracle_oce(m, i, o, l, lp, N=1_000_000, rng=RngHandle(40_000 + s))
            z = np.abs(closed - est.value) / est.std_err
            worst = max(worst, float(z.max()))
            entries += z.size
            bad += int((z > 3).sum())
        return bad == 0, f"{entries} entries, {bad} beyond 3 SE, max |z| {worst:.2f}"

    return Verdict(4, "closed form vs Monte Carlo oracle", *_timed(run), limit=300.0)


# -- 5 -------------------------------------------------------------------------


def criterion_5() -> Verdict:
    def run():
        rng = np.random.default_rng(5)
        worst_dq = worst_c = 0.0
        for s in range(20):
            m = _model_with_edges(5_000 + s, n=int(rng.integers(3, 11)), expected_neighbors=3.0)
            i, o, l, lp = _descendant_query(m, rng)
            c = oce_closed_form(m, i, o, l, lp).values
            d = oce_numeric(m, InterventionQuery(i, o, l, lp, approach="numeric-dist")).values
            q = oce_numeric(m, InterventionQuery(i, o, l, lp, approach="numeric-quant")).values
            worst_dq = max(worst_dq, np.abs(d - q).max())
            worst_c = max(worst_c, np.abs(d - c).max(), np.abs(q - c).max())
        ok = worst_dq <= 1e-6 and worst_c <= 1e-6
        return ok, f"20 queries, dist vs quant {worst_dq:.1e}, numeric vs closed {worst_c:.1e} (<= 1e-6)"

    return Verdict(5, "distributional = quantile = closed form", *_timed(run))


# -- 6 -------------------------------------------------------------------------


def _unstandardize(m, rng):
    """Same ordinal law under Y'_j = mu_j + s_j Y_j with random location and scale."""
    s = rng.uniform(0.3, 3.0, m.n)
    mu = rng.normal(scale=2.0, size=m.n)
    b = {(h, j): w * s[j - 1] / s[h - 1] for (h, j), w in m.b.items()}
    ths = [mu[j] + s[j] * np.asarray(m.thresholds[j][1:-1]) for j in range(m.n)]
    return make_model(m.dag, b, ths, mu=mu, v=m.v * s**2)


def criterion_6() -> Verdict:
    def run():
        rng = np.random.default_rng(6)
        counts = dict(antisym=0, zerosum=0, null=0, bounds=0, standard=0)
        cells = 0
        for s in range(50):
            m = random_model(n=int(rng.integers(2, 11)), expected_neighbors=3.0, rng=RngHandle(6_000 + s))
            m_raw = _unstandardize(m, rng)
            for _ in range(3):
                i, o = (int(x) for x in rng.choice(np.arange(1, m.n + 1), 2, replace=False))
                T = oce_tensor(m_raw, i, o)
                cells += T.size
                counts["antisym"] += int(np.sum(np.abs(T + T.transpose(1, 0, 2)) > 1e-12))
                counts["zerosum"] += int(np.sum(np.abs(T.sum(axis=2)) > 1e-9))
                counts["bounds"] += int(np.sum(np.abs(T) > 1.0))
                if o not in m.dag.descendants(i):
                    counts["null"] += int(np.sum(np.abs(T) > 1e-10))
                counts["standard"] += int(np.sum(np.abs(oce_tensor(standardize(m_raw), i, o) - T) > 1e-9))
        violations = sum(counts.values())
        detail = f"{cells} cells over 150 pairs, violations " + ", ".join(f"{k} {v}" for k, v in counts.items())
        return violations == 0, detail

    return Verdict(6, "structural invariants", *_timed(run))


# -- 7 -------------------------------------------------------------------------


def _bvn_dblquad(h, k, rho):
    c = 1.0 / (2 * math.pi * math.sqrt(1 - rho * rho))

    def dens(y, x):
        return c * math.exp(-(x * x - 2 * rho * x * y + y * y) / (2 * (1 - rho * rho)))

    val, _ = integrate.dblquad(dens, -9.0, h, -9.0, k, epsabs=1e-11, epsrel=1e-11)
    return val


def criterion_7() -> Verdict:
    def run():
        hs = np.linspace(-8, 8, 33)
        as_ = np.concatenate([np.linspace(-1, 1, 21), [-50.0, -3.0, 3.0, 50.0]])
        H, A = np.meshgrid(hs, as_)
        checks = {
            "T(h,0)": np.abs(owen_t(hs, 0.0)).max(),
            "T(0,a)": np.abs(owen_t(0.0, as_) - np.arctan(as_) / (2 * math.pi)).max(),
            "T(h,1)": np.abs(owen_t(hs, 1.0) - 0.5 * std_normal_cdf(hs) * std_normal_cdf(-hs)).max(),
            "T(-h,a)": np.abs(owen_t(-H, A) - owen_t(H, A)).max(),
            "T(h,-a)": np.abs(owen_t(H, -A) + owen_t(H, A)).max(),
        }
        grid_hk = [-3.0, -1.5, -0.5, 0.0, 0.3, 1.2, 2.7]
        grid_rho = [-0.9, -0.4, 0.0, 0.55, 0.95]
        bvn = max(abs(bvn_cdf(h, k, r) - _bvn_dblquad(h, k, r)) for h in grid_hk for k in grid_hk for r in grid_rho)
        ok = max(checks.values()) <= 1e-12 and bvn <= 1e-8
        detail = ", ".join(f"{k} {v:.1e}" for k, v in checks.items()) + f" (<= 1e-12); bvn 7x7x5 {bvn:.1e} (<= 1e-8)"
        return ok, detail

    return Verdict(7, "special functions", *_timed(run))


# -- 8 -------------------------------------------------------------------------


def criterion_8() -> Verdict:
    def run():
        m = random_model(n=8, rng=RngHandle(101))
        root = next(j for j in range(1, m.n + 1) if not m.dag.parents(j) and m.dag.descendants(j))
        o = min(m.dag.descendants(root))
        shift = (root, o, 1, m.levels[root - 1])
        res = regenerated_sweep(m, 500, 50, [shift], RngHandle(102))
        mean = np.array([s["mean"] for s in summarize(res.records)])
        truth = oce_closed_form(m, *shift).values
        err = float(np.abs(mean - truth).max())
        ok = err <= 0.05 and not res.failures
        return ok, (f"shift {root}->{o} levels 1->{shift[3]}, 50 x N=500, {len(res.failures)} failed fits, "
                    f"max |mean - truth| {err:.3f} (<= 0.05)")

    return Verdict(8, "regenerated-data pipeline", *_timed(run), limit=300.0)


# -- 9 -------------------------------------------------------------------------


def criterion_9() -> Verdict:
    def run():
        import contextlib
        import io as _io

        buf = _io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(["verify"])
        lines = [ln for ln in buf.getvalue().splitlines() if "delta=" in ln]
        ok = code == 0 and len(lines) >= 12 and all(ln.startswith("PASS") for ln in lines)
        return ok, f"exit {code}, {len(lines)} delta lines"

    return Verdict(9, "verify command", *_timed(run))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


@pytest.mark.slow
@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    verdict = criterion()
    print(verdict.line())
    assert verdict.ok, verdict.line()


def test_cumulative_shift_matches_partial_sums():
    m = binary_model()
    assert oce_cumulative(m, 1, 2, 1, 2, 2) == pytest.approx(oce_closed_form(m, 1, 2, 1, 2).values[1], abs=1e-15)


if __name__ == "__main__":
    verdicts = []
    for c in CRITERIA:
        v = c()
        print(v.line(), flush=True)
        verdicts.append(v)
    print(f"{sum(v.ok for v in verdicts)}/{len(verdicts)} criteria passed")
    sys.exit(0 if all(v.ok for v in verdicts) else 1)
