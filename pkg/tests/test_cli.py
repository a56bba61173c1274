import importlib.util
import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from eval.runner import collect_scores

_SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "srcomp.py"
_spec = importlib.util.spec_from_file_location("srcomp", _SCRIPT)
srcomp = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(srcomp)


def _gen(out: Path, seed: int = 0) -> str:
    code = srcomp.main([
        "gen", "--task", "ExactRediscovery", "--difficulty", "Easier", "--seed", str(seed),
        "--n-train", "200", "--n-test", "200", "--out", str(out),
    ])
    assert code == srcomp.EXIT_OK
    return f"ExactRediscovery-Easier-s{seed}"


def test_gen_fit_score_rank(tmp_path, capsys):
    data = tmp_path / "data"
    runs = tmp_path / "runs"
    dataset_id = _gen(data)
    train = data / f"{dataset_id}_train.tsv"
    test = data / f"{dataset_id}_test.tsv"
    assert train.exists() and test.exists()
    assert json.loads(capsys.readouterr().out)["dataset"] == dataset_id

    for algo in ("linear", "constant"):
        model = runs / f"{algo}-{dataset_id}"
        assert srcomp.main(["fit", "--dataset", str(train), "--algo", algo, "--out", str(model)]) == 0
        model_file = runs / f"{algo}-{dataset_id}.model.json"
        assert model_file.exists()
        assert srcomp.main(["score", "--model", str(model_file), "--dataset", str(test)]) == 0
        assert (runs / f"{algo}-{dataset_id}.score.json").exists()

    records = collect_scores(runs)
    assert sorted(r.algorithm for r in records) == ["constant", "linear"]

    out = tmp_path / "rank"
    assert srcomp.main(["rank", "--runs-dir", str(runs), "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"rank.json", "rank.md", "cd.csv"}
    assert "winner" in capsys.readouterr().out


def test_fit_with_explicit_json_name(tmp_path):
    dataset_id = _gen(tmp_path)
    train = tmp_path / f"{dataset_id}_train.tsv"
    out = tmp_path / "ols.json"
    code = srcomp.main(["fit", "--dataset", str(train), "--algo", "linear", "--name", "ols", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text(encoding="utf-8"))["algorithm"] == "ols"


def test_unknown_algorithm_is_a_config_error(tmp_path):
    dataset_id = _gen(tmp_path)
    train = tmp_path / f"{dataset_id}_train.tsv"
    code = srcomp.main(["fit", "--dataset", str(train), "--algo", "magic", "--out", str(tmp_path / "m")])
    assert code == srcomp.EXIT_CONFIG


def test_rank_exit_codes(tmp_path):
    assert srcomp.main(["rank", "--runs-dir", str(tmp_path / "nowhere"), "--out", str(tmp_path)]) == srcomp.EXIT_ERROR
    empty = tmp_path / "empty"
    empty.mkdir()
    assert srcomp.main(["rank", "--runs-dir", str(empty), "--out", str(tmp_path)]) == srcomp.EXIT_MISSING


def test_track_config_errors(tmp_path):
    assert srcomp.main(["track", "synthetic", "--config", str(tmp_path / "none.json")]) == srcomp.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert srcomp.main(["track", "synthetic", "--config", str(bad)]) == srcomp.EXIT_CONFIG
    mismatch = tmp_path / "mismatch.json"
    mismatch.write_text(json.dumps({"track": "realworld"}), encoding="utf-8")
    with pytest.raises(srcomp.ConfigurationError):
        srcomp.load_track_config(str(mismatch), srcomp.TrackKind.SYNTHETIC)


def test_covid_prep_writes_train_and_test(tmp_path):
    rng = np.random.default_rng(3)
    n = 120
    frame = pd.DataFrame({
        "date": pd.date_range("2021-01-01", periods=n, freq="D").strftime("%Y-%m-%d"),
        "cases": rng.poisson(400, n),
        "hospitalizations": rng.poisson(60, n),
        "deaths": rng.poisson(8, n),
    })
    series = tmp_path / "series.csv"
    frame.to_csv(series, index=False)
    out = tmp_path / "covid"
    assert srcomp.main(["covid", "prep", "--series", str(series), "--out", str(out), "--targets", "cases"]) == 0
    assert (out / "covid-cases_train.tsv").exists()
    assert (out / "covid-cases_test.tsv").exists()
    assert not (out / "covid-deaths_train.tsv").exists()
