import json

import numpy as np
import pytest

from latent_oce import io
from latent_oce.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, SEED_ENV, main
from latent_oce.datagen import OrdinalDataset, RngHandle, random_model, sample_ordinal
from latent_oce.estimation import fit_model
from latent_oce.oce import oce_closed_form
from latent_oce.verification import BINARY_OCE


@pytest.fixture
def binary_file(tmp_path, binary):
    path = tmp_path / "binary.json"
    io.write_model(path, binary)
    return str(path)


def _generate(tmp_path, tag, *extra):
    model, data = tmp_path / f"{tag}.json", tmp_path / f"{tag}.csv"
    code = main(["generate", "--model-out", str(model), "--data-out", str(data), *extra])
    assert code == EXIT_OK
    return model, data


def test_generate_defaults(tmp_path, capsys):
    model_path, data_path = _generate(tmp_path, "d", "--seed", "3")
    assert "seed 3" in capsys.readouterr().out
    m = io.read_model(model_path)
    d = io.read_dataset(data_path)
    assert d.cells.shape == (500, 16) and m.n == 16
    assert d.level_counts == m.levels
    assert all(2 <= L <= 6 for L in m.levels)
    assert np.all(d.cells < np.array(m.levels))


def test_generate_is_deterministic(tmp_path):
    a = _generate(tmp_path, "a", "--seed", "11", "--n", "6", "--N", "50")
    b = _generate(tmp_path, "b", "--seed", "11", "--n", "6", "--N", "50")
    assert a[0].read_bytes() == b[0].read_bytes()
    assert a[1].read_bytes() == b[1].read_bytes()


def test_generate_seed_from_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(SEED_ENV, "42")
    a = _generate(tmp_path, "a", "--n", "4", "--N", "20")
    assert "seed 42" in capsys.readouterr().out
    b = _generate(tmp_path, "b", "--seed", "42", "--n", "4", "--N", "20")
    assert a[1].read_bytes() == b[1].read_bytes()
    monkeypatch.setenv(SEED_ENV, "abc")
    assert main(["generate", "--model-out", str(tmp_path / "x.json"), "--data-out", str(tmp_path / "x.csv")]) \
        == EXIT_USAGE


def test_generate_all_binary(tmp_path):
    model_path, data_path = _generate(tmp_path, "b", "--seed", "5", "--level-range", "2", "2", "--N", "100")
    d = io.read_dataset(data_path)
    assert set(d.level_counts) == {2}
    assert set(np.unique(d.cells)) <= {0, 1}


def test_generate_invalid_parameters(tmp_path):
    out = ["--model-out", str(tmp_path / "m.json"), "--data-out", str(tmp_path / "d.csv")]
    assert main(["generate", "--n", "0", *out]) != EXIT_OK
    assert main(["generate", "--level-range", "4", "2", *out]) != EXIT_OK


def test_oce_binary_matches_table(binary_file, capsys):
    code = main(["oce", binary_file, "-i", "1", "-o", "2", "--from-level", "1", "--to-level", "2"])
    assert code == EXIT_OK
    recs = io.read_records_csv(capsys.readouterr().out)
    assert [r["k"] for r in recs] == [1, 2]
    for r, ref in zip(recs, BINARY_OCE):
        assert r["method"] == "closed"
        assert r["value"] == pytest.approx(ref, abs=1e-4)


@pytest.mark.parametrize("method", ["numeric-dist", "numeric-quant"])
def test_oce_numeric_methods(binary_file, capsys, method):
    code = main(["oce", binary_file, "-i", "1", "-o", "2", "--from-level", "1", "--to-level", "2",
                 "--method", method, "--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in doc["records"]] == [method] * 2
    assert doc["records"][0]["value"] == pytest.approx(BINARY_OCE[0], abs=1e-4)


def test_oce_same_node_is_usage_error(binary_file):
    assert main(["oce", binary_file, "-i", "1", "-o", "1", "--from-level", "1", "--to-level", "2"]) == EXIT_USAGE


def test_oce_missing_levels_is_usage_error(binary_file):
    assert main(["oce", binary_file, "-i", "1", "-o", "2"]) == EXIT_USAGE


def test_oce_invalid_node(binary_file):
    code = main(["oce", binary_file, "-i", "1", "-o", "9", "--from-level", "1", "--to-level", "2"])
    assert code == EXIT_VALIDATION


def test_oce_all_shifts_count(tmp_path, capsys):
    m = random_model(n=5, level_range=(3, 5), rng=RngHandle(70))
    path = tmp_path / "m.json"
    io.write_model(path, m)
    i, o = m.dag.sorted_edges()[0]
    assert main(["oce", str(path), "-i", str(i), "-o", str(o), "--all-shifts"]) == EXIT_OK
    recs = io.read_records_csv(capsys.readouterr().out)
    Li, Lo = m.levels[i - 1], m.levels[o - 1]
    assert len(recs) == Li * (Li - 1) * Lo


def test_oce_cumulative(binary_file, capsys):
    code = main(["oce", binary_file, "-i", "1", "-o", "2", "--from-level", "1", "--to-level", "2",
                 "--cumulative", "2"])
    assert code == EXIT_OK
    (rec,) = io.read_records_csv(capsys.readouterr().out)
    assert rec["value"] == pytest.approx(BINARY_OCE[1], abs=1e-4)
    assert main(["oce", binary_file, "-i", "1", "-o", "2", "--from-level", "1", "--to-level", "2",
                 "--cumulative", "2", "--method", "numeric-dist"]) == EXIT_USAGE


def test_oce_writes_output_file(binary_file, tmp_path):
    out = tmp_path / "r.csv"
    main(["oce", binary_file, "-i", "1", "-o", "2", "--from-level", "2", "--to-level", "1", "--output", str(out)])
    recs = io.read_records_csv(out.read_text())
    assert recs[0]["value"] == pytest.approx(-BINARY_OCE[0], abs=1e-4)


def test_oracle_command(binary_file, capsys):
    args = ["oracle", binary_file, "-i", "1", "-o", "2", "--from-level", "1", "--to-level", "2", "--N", "200000",
            "--seed", "9", "--format", "json"]
    assert main(args) == EXIT_OK
    first = capsys.readouterr().out
    doc = json.loads(first)
    assert doc["seed"] == 9 and doc["n_samples"] == 200_000
    for r, ref in zip(doc["records"], BINARY_OCE):
        assert r["method"] == "oracle"
        assert abs(r["value"] - ref) < 4 * r["std_err"]
    assert main(args) == EXIT_OK
    again = json.loads(capsys.readouterr().out)
    assert again["records"] == doc["records"]


def test_estimate_command(tmp_path, chain3):
    d = sample_ordinal(chain3, 2_000, RngHandle(12))
    io.write_dataset(tmp_path / "d.csv", d)
    io.write_dag(tmp_path / "g.json", chain3.dag)
    out = tmp_path / "fit.json"
    assert main(["estimate", str(tmp_path / "d.csv"), str(tmp_path / "g.json"), "--output", str(out)]) == EXIT_OK
    fitted = io.read_model(out)
    direct = fit_model(d, chain3.dag)
    assert fitted.b == direct.b


def test_estimate_failure_exit_code(tmp_path, chain3):
    d = sample_ordinal(chain3, 2_000, RngHandle(12))
    cells = d.cells.copy()
    cells[:, 2] = 0  # outcome column never leaves level 0
    path = tmp_path / "d.csv"
    io.write_dataset(path, OrdinalDataset(cells, d.level_counts))
    io.write_dag(tmp_path / "g.json", chain3.dag)
    assert main(["estimate", str(path), str(tmp_path / "g.json"), "--output", str(tmp_path / "f.json")]) == 5


def test_bootstrap_single_replicate_is_param_estimate(tmp_path, capsys):
    m = random_model(n=4, level_range=(2, 3), rng=RngHandle(80))
    d = sample_ordinal(m, 500, RngHandle(81))
    io.write_dataset(tmp_path / "d.csv", d)
    io.write_model(tmp_path / "m.json", m)
    i, o = m.dag.sorted_edges()[0]
    code = main(["bootstrap", str(tmp_path / "d.csv"), str(tmp_path / "m.json"), "-i", str(i), "-o", str(o),
                 "--from-level", "1", "--to-level", "2", "--M", "1", "--seed", "4", "--format", "json"])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["n_replicates"] == 1 and doc["n_failures"] == 0
    boot = np.array([r["value"] for r in doc["records"]])
    param = oce_closed_form(fit_model(d, m.dag), i, o, 1, 2).values
    # one resample of the same data: same estimator, perturbed by resampling noise
    np.testing.assert_allclose(boot, param, atol=0.15)
    assert [s["n"] for s in doc["summary"]] == [1] * m.levels[o - 1]


def test_bootstrap_reports_and_summary(tmp_path, capsys):
    m = random_model(n=4, level_range=(2, 3), rng=RngHandle(82))
    d = sample_ordinal(m, 400, RngHandle(83))
    io.write_dataset(tmp_path / "d.csv", d)
    io.write_dag(tmp_path / "g.json", m.dag)
    i, o = m.dag.sorted_edges()[0]
    base = ["bootstrap", str(tmp_path / "d.csv"), str(tmp_path / "g.json"), "-i", str(i), "-o", str(o),
            "--all-shifts", "--M", "5", "--seed", "6"]
    assert main([*base, "--summary", str(tmp_path / "s.csv")]) == EXIT_OK
    recs = io.read_records_csv(capsys.readouterr().out)
    Li, Lo = m.levels[i - 1], m.levels[o - 1]
    assert len(recs) == 5 * Li * (Li - 1) * Lo
    keys = [(r["replicate"], r["i"], r["o"], r["l"], r["l_prime"], r["k"]) for r in recs]
    assert keys == sorted(keys)
    summary = (tmp_path / "s.csv").read_text().splitlines()
    assert summary[0] == "i,o,l,l_prime,k,mean,sd,q025,q50,q975,n"
    assert len(summary) == 1 + Li * (Li - 1) * Lo
    assert main([*base, "--workers", "3"]) == EXIT_OK
    assert io.read_records_csv(capsys.readouterr().out) == recs


def test_bootstrap_rejects_zero_replicates(tmp_path, chain3):
    io.write_dataset(tmp_path / "d.csv", sample_ordinal(chain3, 50, RngHandle(1)))
    io.write_dag(tmp_path / "g.json", chain3.dag)
    code = main(["bootstrap", str(tmp_path / "d.csv"), str(tmp_path / "g.json"), "-i", "1", "-o", "2",
                 "--from-level", "1", "--to-level", "2", "--M", "0"])
    assert code == EXIT_USAGE


def test_bootstrap_failure_threshold(tmp_path, capsys):
    # two rows: most resamples lose a level and fail to fit
    from latent_oce import Dag

    path = tmp_path / "d.csv"
    path.write_text("# level_counts: 2,2\nX1,X2\n0,0\n1,1\n")
    io.write_dag(tmp_path / "g.json", Dag(2, frozenset({(1, 2)})))
    code = main(["bootstrap", str(path), str(tmp_path / "g.json"), "-i", "1", "-o", "2", "--from-level", "1",
                 "--to-level", "2", "--M", "20", "--seed", "1", "--format", "json"])
    out = capsys.readouterr()
    doc = json.loads(out.out)
    assert doc["n_failures"] > 10
    assert code == 5
    assert "replicates failed" in out.err


def test_missing_file_is_validation_error(tmp_path):
    assert main(["oce", str(tmp_path / "nope.json"), "-i", "1", "-o", "2", "--from-level", "1",
                 "--to-level", "2"]) == EXIT_VALIDATION


def test_unknown_command_is_usage_error():
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_verify_passes(capsys):
    assert main(["verify", "--N", "2000000"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "delta=" in out
    assert "FAIL" not in out
