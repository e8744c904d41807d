"""End-to-end CLI tests on a small synthetic dataset."""

import json

import numpy as np
import pytest

from aid.cli import main
from aid.data import load_features


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    main([
        "synth",
        "--out-dir", str(out),
        "--topics", "3",
        "--per-topic", "40",
        "--dim", "8",
        "--seed", "1",
    ])
    return out


class TestSynth:
    def test_files_written(self, dataset_dir):
        store = load_features(dataset_dir / "features.aidf")
        assert store.n == 120 and store.d == 8
        labels = json.loads((dataset_dir / "labels.json").read_text())
        assert len(labels["assignments"]) == 120


class TestPca:
    def test_reduce_and_reload(self, dataset_dir, tmp_path):
        out = tmp_path / "reduced.aidf"
        model = tmp_path / "model.npz"
        main([
            "pca",
            "--features", str(dataset_dir / "features.aidf"),
            "--dims", "4",
            "--out", str(out),
            "--model", str(model),
        ])
        reduced = load_features(out)
        assert reduced.n == 120 and reduced.d == 4
        assert model.exists()
        # applying the saved model reproduces the same projection
        out2 = tmp_path / "reduced2.aidf"
        main([
            "pca",
            "--features", str(dataset_dir / "features.aidf"),
            "--load-model", str(model),
            "--dims", "4",
            "--out", str(out2),
        ])
        np.testing.assert_array_equal(load_features(out2).vectors, reduced.vectors)


class TestQuery:
    def test_query_with_selection_and_diagnostics(self, dataset_dir, tmp_path):
        out = tmp_path / "query.json"
        diag = tmp_path / "diag.json"
        main([
            "query",
            "--features", str(dataset_dir / "features.aidf"),
            "--item-index", "0",
            "--m", "30",
            "--r", "5",
            "--select", "0",
            "--top", "10",
            "--dump-diagnostics", str(diag),
            "--out", str(out),
        ])
        body = json.loads(out.read_text())
        assert body["k"] >= 1
        assert len(body["results"]) == 10
        deltas = [item["delta_tilde"] for item in body["results"]]
        assert deltas == sorted(deltas)
        diag_body = json.loads(diag.read_text())
        assert diag_body["chosen_k"] == body["k"]

    def test_query_by_vector_file(self, dataset_dir, tmp_path):
        vec_file = tmp_path / "vec.json"
        vec_file.write_text(json.dumps([0.1] * 8))
        out = tmp_path / "query.json"
        main([
            "query",
            "--features", str(dataset_dir / "features.aidf"),
            "--vector-file", str(vec_file),
            "--m", "20",
            "--out", str(out),
        ])
        assert json.loads(out.read_text())["k"] >= 1

    def test_rejects_missing_query_form(self, dataset_dir):
        with pytest.raises(SystemExit):
            main(["query", "--features", str(dataset_dir / "features.aidf")])


class TestEvalAndReport:
    def test_eval_then_report(self, dataset_dir, tmp_path, capsys):
        report_json = tmp_path / "report.json"
        report_csv = tmp_path / "report.csv"
        main([
            "eval",
            "--features", str(dataset_dir / "features.aidf"),
            "--labels", str(dataset_dir / "labels.json"),
            "--m", "30",
            "--reps", "2",
            "--max-cases", "10",
            "--feedback", "single",
            "--out", str(report_json),
            "--csv", str(report_csv),
        ])
        captured = capsys.readouterr()
        assert "mAP=" in captured.out
        blob = json.loads(report_json.read_text())
        assert set(blob["methods"]) == {"baseline", "hard", "aid"}
        assert report_csv.read_text().startswith("method,metric,kappa,value")

        out_dir = tmp_path / "rendered"
        main(["report", str(report_json), "--out-dir", str(out_dir)])
        assert (out_dir / "report.csv").exists()
        assert (out_dir / "precision_at.png").stat().st_size > 0
        assert (out_dir / "map.png").stat().st_size > 0
