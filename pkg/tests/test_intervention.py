import numpy as np
import pytest

from latent_oce import Dag, make_model
from latent_oce.datagen import random_model
from latent_oce.errors import ModelError, NumericError
from latent_oce.intervention import (
    mutilated_sem,
    post_intervention,
    post_intervention_adjustment,
    post_intervention_mutilated,
)
from latent_oce.sem import covariance


@pytest.mark.parametrize("fn", [post_intervention_adjustment, post_intervention_mutilated])
def test_chain_root_intervention(binary, fn):
    d = fn(binary, 1, 2, 1.0)
    assert d.mu_do == pytest.approx(0.5, abs=1e-15)
    assert d.var_do == pytest.approx(1.0, abs=1e-15)


def test_fork_non_descendant(fork):
    sig = covariance(fork).sigma
    for fn in (post_intervention_adjustment, post_intervention_mutilated):
        d = fn(fork, 2, 3, 0.7)
        assert d.mu_do == pytest.approx(fork.mu[2], abs=1e-12)
        assert d.var_do == pytest.approx(sig[2, 2], abs=1e-12)


def test_root_mutilation_equals_zero_variance(fork):
    v = fork.v.copy()
    v[0] = 1e-300
    ref = covariance(fork.replace(v=v)).sigma
    d = post_intervention_mutilated(fork, 1, 2, 0.0)
    assert d.var_do == pytest.approx(ref[1, 1], abs=1e-12)


def test_mutilated_sem_structure(chain3):
    mut = mutilated_sem(chain3, 2)
    assert set(mut.b_tilde) == {(2, 3)}
    assert mut.v_tilde[1] == 0.0
    np.testing.assert_array_equal(np.delete(mut.v_tilde, 1), np.delete(chain3.v, 1))


@pytest.mark.parametrize("seed", range(25))
def test_routes_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 17))
    m = random_model(n=n, expected_neighbors=min(5, n - 1), rng=seed)
    m = m.replace(mu=rng.normal(size=n), v=rng.uniform(0.2, 3, n))
    for _ in range(5):
        i, o = rng.choice(np.arange(1, n + 1), 2, replace=False)
        y = rng.normal(scale=2)
        a = post_intervention_adjustment(m, int(i), int(o), y)
        b = post_intervention_mutilated(m, int(i), int(o), y)
        assert abs(a.mu_do - b.mu_do) <= 1e-10
        assert abs(a.var_do - b.var_do) <= 1e-10
        c = post_intervention(m, int(i), int(o), y, method="checked")
        assert c == b


@pytest.mark.parametrize("seed", range(5))
def test_affine_and_y_free_variance(seed):
    m = random_model(n=10, expected_neighbors=4, rng=seed)
    w = covariance(m).w
    for i in range(1, 11):
        for o in m.dag.descendants(i):
            d1 = post_intervention_mutilated(m, i, o, -0.7)
            d2 = post_intervention_mutilated(m, i, o, 1.9)
            assert d2.mu_do - d1.mu_do == pytest.approx(w[o - 1, i - 1] * 2.6, abs=1e-13)
            assert d1.var_do == d2.var_do
        for o in set(range(1, 11)) - m.dag.descendants(i) - {i}:
            d = post_intervention_mutilated(m, i, o, 3.0)
            assert d.mu_do == pytest.approx(m.mu[o - 1], abs=1e-12)
            assert d.var_do == pytest.approx(covariance(m).sigma[o - 1, o - 1], abs=1e-12)


def test_mutilated_monte_carlo():
    m = random_model(n=12, expected_neighbors=4, rng=77)
    i = m.dag.topological_order()[1]
    desc = sorted(m.dag.descendants(i))
    o = desc[-1] if desc else m.dag.topological_order()[-1]
    y = 0.8
    N = 1_000_000
    gen = np.random.default_rng(5)
    vals = np.empty((N, m.n))
    for j in m.dag.topological_order():
        if j == i:
            vals[:, j - 1] = y
            continue
        col = m.mu[j - 1] + np.sqrt(m.v[j - 1]) * gen.standard_normal(N)
        for h in m.dag.parents(j):
            col += m.b[(h, j)] * (vals[:, h - 1] - m.mu[h - 1])
        vals[:, j - 1] = col
    d = post_intervention_mutilated(m, i, o, y)
    x = vals[:, o - 1]
    assert abs(x.mean() - d.mu_do) < 4 * np.sqrt(d.var_do / N)
    se_var = d.var_do * np.sqrt(2 / (N - 1))
    assert abs(x.var(ddof=1) - d.var_do) < 4 * se_var


def test_errors(binary):
    with pytest.raises(ModelError):
        post_intervention_mutilated(binary, 1, 1, 0.0)
    with pytest.raises(ValueError):
        post_intervention(binary, 1, 2, 0.0, method="nope")


def test_adjustment_rejects_non_pd():
    dag = Dag(3, frozenset({(1, 2), (2, 3)}))
    # a near-collinear parent block: Sigma_aa numerically singular
    m = make_model(dag, {(1, 2): 1e9, (2, 3): 1.0}, [[0.0]] * 3, v=[1.0, 1e-300, 1.0])
    with pytest.raises(NumericError):
        post_intervention_adjustment(m, 2, 3, 0.0)


def test_checked_mode_detects_disagreement(binary, monkeypatch):
    import latent_oce.intervention as iv

    real = iv.post_intervention_adjustment
    monkeypatch.setattr(iv, "post_intervention_adjustment",
                        lambda *a: iv.PostInterventionDist(real(*a).mu_do + 1e-6, real(*a).var_do))
    with pytest.raises(NumericError):
        iv.post_intervention(binary, 1, 2, 0.3, method="checked")
