import json

from autorater.cli import main
from autorater.corpus.processed import load_processed


def test_corpus_synth_then_build_then_split(tmp_path, capsys):
    synth_dir = tmp_path / "synth"
    assert main(["corpus", "synth", "--seed", "3", "--out", str(synth_dir),
                 "--spec", str(_spec_file(tmp_path))]) == 0
    manifest = synth_dir / "manifest.json"
    assert manifest.exists()
    assert (synth_dir / "truth.json").exists()

    cache_dir = tmp_path / "cache"
    assert main(["corpus", "build", "--manifest", str(manifest), "--out", str(cache_dir)]) == 0
    corpus = load_processed(cache_dir)
    assert len(corpus) == 30
    out = capsys.readouterr().out
    assert "30 records retained" in out

    assert main(["corpus", "split", "--corpus", str(synth_dir), "--score", "total", "--seed", "1"]) == 0
    split_file = synth_dir / "split_total_1.json"
    data = json.loads(split_file.read_text())
    assert len(data["train_ids"]) + len(data["val_ids"]) + len(data["test_ids"]) == 30


def _spec_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"n": 30, "tile_hw": [32, 48]}))
    return p


def test_corpus_build_reports_exclusions(tmp_path, capsys):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(
        json.dumps(
            {
                "schema_taxonomy": [],
                "records": [
                    {"id": "ok", "year": 2015, "parametric": {"a": 1}, "text_segments": {"review": "x"},
                     "labels": {"total": 5.0}},
                    {"id": "bad", "year": 2015, "parametric": {"a": 2}, "text_segments": {"review": "y"},
                     "labels": {}},
                ],
            }
        )
    )
    assert main(["corpus", "build", "--manifest", str(manifest), "--out", str(tmp_path / "cache")]) == 0
    captured = capsys.readouterr()
    assert "excluded bad" in captured.err
    assert "1 records retained, 1 excluded" in captured.out


def test_train_cli_small(tmp_path, capsys):
    code = main([
        "train", "--model", "par", "--score", "total", "--repeats", "2",
        "--corpus-size", "80", "--max-epochs", "4", "--out", str(tmp_path / "runs"),
    ])
    assert code == 0
    report = json.loads((tmp_path / "runs" / "report_parametric.json").read_text())
    assert report["n_repeats"] == 2
    assert len(report["runs"]) == 2
    # best checkpoint landed in the registry
    bundle_dir = tmp_path / "runs" / "registry" / "total-par"
    assert (bundle_dir / "config.json").exists()
    assert (bundle_dir / "weights.bin").exists()
    assert (bundle_dir / "metrics.json").exists()


def test_explain_cli_artifacts(tmp_path):
    code = main([
        "train", "--model", "par", "--score", "total", "--repeats", "1",
        "--corpus-size", "80", "--max-epochs", "4", "--out", str(tmp_path / "runs"),
    ])
    assert code == 0
    out = tmp_path / "explain"
    code = main([
        "explain", "--bundle", "total-par", "--registry", str(tmp_path / "runs" / "registry"),
        "--limit", "3", "--samples", "200", "--out", str(out),
    ])
    assert code == 0
    assert (out / "aggregate_category.csv").exists()
    assert (out / "aggregate_subcategory.csv").exists()
    phis = list(out.glob("phi_*.json"))
    assert len(phis) == 3
    payload = json.loads(phis[0].read_text())
    assert abs(sum(payload["phi"]) - (payload["prediction"] - payload["expected_value"])) <= 0.01 * max(
        1.0, abs(payload["prediction"])
    )
