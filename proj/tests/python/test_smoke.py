import json
import math
import os
import subprocess

import numpy as np
import pytest

import quantgan as qg


def write_prices(path, n=900, seed=0):
    r = qg.garch_simulate({"omega": 1e-5, "alpha": 0.1, "beta": 0.85, "mu": 0.0}, n, seed)
    prices = qg.prices_from_returns(r, 100.0)
    days = np.datetime64("2001-01-01") + np.arange(len(prices))
    with open(path, "w") as f:
        f.write("date,close\n")
        for d, p in zip(days, prices):
            f.write(f"{d},{p!r}\n")
    return prices


def tiny_config(tmp_path, data):
    return {
        "seed": 3,
        "data": str(data),
        "out": str(tmp_path / "run"),
        "generator": {"hidden": 6, "levels": 2},
        "discriminator": {"hidden": 6, "levels": 2},
        "gan": {"batch_size": 8, "generator_updates": 5},
        "metrics": {"lags": [1, 5], "max_lag": 10, "num_paths": 4, "path_length": 200},
        "generate": {"paths": 2, "length": 30},
    }


def test_lambert_round_trip():
    x = np.linspace(-4, 4, 101)
    y = qg.lambert_forward(x, 0.1, 1.3, 0.2)
    back = qg.lambert_inverse(y, 0.1, 1.3, 0.2)
    assert np.max(np.abs(np.array(back) - x)) < 1e-9
    assert qg.lambert_w0(math.e) == pytest.approx(1.0)


def test_metrics_and_garch():
    rng = np.random.default_rng(1)
    a = rng.standard_normal(20000)
    assert qg.emd(a, a) == 0.0
    assert qg.emd(a, a + 0.5) == pytest.approx(0.5)
    assert len(qg.acf(a, 5)) == 5
    assert qg.receptive_field(80, 6) == 127
    sim = qg.garch_simulate({"omega": 1e-5, "alpha": 0.1, "beta": 0.85, "mu": 0.0}, 20000, 2)
    fit = qg.garch_fit(sim)
    assert 0.0 < fit["params"]["alpha"] < 0.3
    assert 0.6 < fit["params"]["beta"] < 1.0


def test_load_csv_reports_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("date,close\n2020-01-02,0\n")
    with pytest.raises(qg.DataError, match=":2"):
        qg.load_csv(p)


def test_pipeline_end_to_end(tmp_path):
    data = tmp_path / "prices.csv"
    prices = write_prices(data)
    dates, closes = qg.load_csv(data)
    assert closes == prices

    pre = qg.preprocess_prices(closes)
    back = qg.pipeline_invert(pre["pipeline"], pre["values"])
    assert np.max(np.abs(np.array(back) - np.array(pre["log_returns"]))) < 1e-10

    cfg = tiny_config(tmp_path, data)
    qg.run_preprocess(cfg)
    assert qg.run_train(cfg) == 5
    qg.run_generate(cfg)
    report = qg.run_evaluate(cfg)
    assert set(report["emd"]) == {"1", "5"}
    garch = qg.run_garch(cfg)
    assert garch["model"] == "garch"

    paths = qg.sample_log_returns(tmp_path / "run" / "checkpoint.bin", 3, 40, 9)
    again = qg.sample_log_returns(tmp_path / "run" / "checkpoint.bin", 3, 40, 9, threads=2)
    assert paths == again
    assert all(len(p) == 40 for p in paths)
    echo = json.loads((tmp_path / "run" / "config.json").read_text())
    assert echo["gan"]["batch_size"] == 8
    assert echo["gan"]["r1_weight"] == 1.0


@pytest.mark.skipif("QUANTGAN_CLI" not in os.environ, reason="CLI binary not built")
def test_cli_zero_paths(tmp_path):
    data = tmp_path / "prices.csv"
    write_prices(data, n=400)
    cfg = tiny_config(tmp_path, data)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    cli = os.environ["QUANTGAN_CLI"]
    subprocess.run([cli, "train", "--config", str(cfg_path)], check=True, capture_output=True)
    subprocess.run([cli, "generate", "--config", str(cfg_path), "--paths", "0"], check=True, capture_output=True)
    assert (tmp_path / "run" / "returns.csv").read_text() == "path_id,t,log_return\n"
    bad = subprocess.run([cli, "train"], capture_output=True, text=True)
    assert bad.returncode != 0
    assert "seed" in bad.stderr
