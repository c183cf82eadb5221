import json

from blendkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_ingest(capsys, fixture_registry_path, fixture_dataset_path):
    code, out, _ = run(capsys, "--config", fixture_registry_path,
                       "ingest", fixture_dataset_path)
    assert code == 0
    assert "100 records" in out


def test_ingest_bad_dataset(capsys, tmp_path, fixture_registry_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{nope\n")
    code, _, err = run(capsys, "--config", fixture_registry_path,
                       "ingest", str(bad))
    assert code == 1
    assert "error" in err


def test_cost_table(capsys, fixture_registry_path):
    code, out, _ = run(capsys, "--config", fixture_registry_path,
                       "cost", "hello world, how are you?")
    assert code == 0
    assert "toy-tiny" in out and "total baseline cost" in out


def test_cost_csv(capsys, fixture_registry_path):
    code, out, _ = run(capsys, "--config", fixture_registry_path,
                       "--format", "csv", "cost", "hello")
    assert code == 0
    assert out.splitlines()[0] == "model,tokens,cost_flops"
    assert len(out.splitlines()) == 5


def test_select_subcommand(capsys, tmp_path):
    cand = tmp_path / "cands.csv"
    cand.write_text(
        "model,quality,cost\nm1,-2.0,30\nm2,-3.0,40\nm3,-4.0,50\n"
    )
    code, out, _ = run(capsys, "--grid", "70", "select", str(cand),
                       "--epsilon", "70")
    assert code == 0
    assert "m1" in out and "m2" in out and "m3" not in out.split("total")[0]


def test_select_structured(capsys, tmp_path):
    cand = tmp_path / "cands.csv"
    cand.write_text("model,quality,cost\nm1,-2.0,10\nm2,-3.0,20\n")
    code, out, _ = run(capsys, "--format", "structured", "select", str(cand),
                       "--budget-fraction", "1.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["selected"] == ["m1", "m2"]
    assert doc["feasible"]


def test_train_sweep_predict_pipeline(capsys, tmp_path, fixture_registry_path,
                                      fixture_dataset_path):
    head_path = str(tmp_path / "head.json")
    code, out, _ = run(
        capsys, "--config", fixture_registry_path,
        "train-predictor", fixture_dataset_path,
        "--out", head_path, "--dim", "32", "--hidden", "16", "--gate", "8",
        "--epochs", "1",
    )
    assert code == 0
    assert "epoch 1" in out and "saved checkpoint" in out

    code, out, _ = run(capsys, "--config", fixture_registry_path,
                       "predict", "how do birds migrate?",
                       "--head", head_path)
    assert code == 0
    assert len(out.strip().splitlines()) == 4

    report = tmp_path / "report.csv"
    figure = tmp_path / "report.png"
    code, out, _ = run(
        capsys, "--config", fixture_registry_path,
        "sweep", fixture_dataset_path,
        "--fractions", "0.2,1.0", "--scores", "predictor",
        "--head", head_path, "--out", str(report), "--figure", str(figure),
    )
    assert code == 0
    assert report.exists() and figure.stat().st_size > 0
    assert report.read_text().startswith("fraction,")


def test_compare_subcommand(capsys, fixture_registry_path, fixture_dataset_path):
    code, out, _ = run(
        capsys, "--config", fixture_registry_path, "--format", "structured",
        "compare", fixture_dataset_path, "--fraction", "0.2", "--trials", "2",
    )
    assert code == 0
    doc = json.loads(out)
    assert "knapsack_oracle" in doc["means"]


def test_missing_config_errors(capsys, monkeypatch, fixture_dataset_path):
    monkeypatch.delenv("BLENDKIT_CONFIG", raising=False)
    code, _, err = run(capsys, "ingest", fixture_dataset_path)
    assert code == 1
    assert "BLENDKIT_CONFIG" in err


def test_config_env_var(capsys, monkeypatch, fixture_registry_path,
                        fixture_dataset_path):
    monkeypatch.setenv("BLENDKIT_CONFIG", fixture_registry_path)
    code, out, _ = run(capsys, "ingest", fixture_dataset_path)
    assert code == 0
