import numpy as np
import pytest
from conftest import gaussian_blobs

from cascadeforest import load_features, write_features
from cascadeforest.cli import main, parse_config_file

FAST_FLAGS = ["--folds", "2", "--max-layers", "2"]


def fast_config_file(tmp_path, **extra):
    lines = [
        "random_forest.n_trees=10",
        "extra_trees.n_trees=10",
        "boosted.n_rounds=5",
        "logistic.max_iterations=50",
    ]
    lines += [f"{k}={v}" for k, v in extra.items()]
    path = tmp_path / "fast.cfg"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture()
def blob_csv(tmp_path):
    X, y = gaussian_blobs(12, 3, 6, separation=10.0, seed=0)
    path = tmp_path / "blobs.csv"
    write_features(path, X, y, fmt="csv")
    return str(path)


class TestTrain:
    def test_writes_model_and_prints_layers(self, blob_csv, tmp_path, capsys):
        model_path = tmp_path / "m.gcfm"
        rc = main(["train", "--features", blob_csv, "--out", str(model_path),
                   "--seed", "3", "--config", fast_config_file(tmp_path)] + FAST_FLAGS)
        assert rc == 0
        assert model_path.exists()
        out = capsys.readouterr().out
        assert "layer 0" in out and "model written" in out

    def test_labels_required(self, tmp_path, capsys):
        X = np.random.default_rng(0).normal(size=(8, 3))
        feat = tmp_path / "x.csv"
        write_features(feat, X, fmt="csv")
        rc = main(["train", "--features", str(feat), "--out", str(tmp_path / "m.gcfm")])
        assert rc == 1
        assert "labels required" in capsys.readouterr().err

    def test_unwritable_output_no_residue(self, blob_csv, tmp_path, capsys):
        bad = tmp_path / "no_such_dir" / "m.gcfm"
        rc = main(["train", "--features", blob_csv, "--out", str(bad),
                   "--config", fast_config_file(tmp_path)] + FAST_FLAGS)
        assert rc == 1
        assert not (tmp_path / "no_such_dir").exists()
        leftovers = [p for p in tmp_path.iterdir() if "tmp" in p.name]
        assert leftovers == []

    def test_determinism_byte_identical(self, blob_csv, tmp_path):
        cfg = fast_config_file(tmp_path)
        args = ["--features", blob_csv, "--seed", "11", "--config", cfg] + FAST_FLAGS
        assert main(["train", "--out", str(tmp_path / "a.gcfm")] + args) == 0
        assert main(["train", "--out", str(tmp_path / "b.gcfm")] + args) == 0
        assert (tmp_path / "a.gcfm").read_bytes() == (tmp_path / "b.gcfm").read_bytes()

    def test_threads_do_not_change_bytes(self, blob_csv, tmp_path):
        cfg = fast_config_file(tmp_path)
        base = ["--features", blob_csv, "--seed", "5", "--config", cfg] + FAST_FLAGS
        assert main(["train", "--out", str(tmp_path / "t1.gcfm"), "--threads", "1"] + base) == 0
        assert main(["train", "--out", str(tmp_path / "t4.gcfm"), "--threads", "4"] + base) == 0
        assert (tmp_path / "t1.gcfm").read_bytes() == (tmp_path / "t4.gcfm").read_bytes()


class TestPredict:
    @pytest.fixture()
    def trained(self, blob_csv, tmp_path):
        model_path = tmp_path / "m.gcfm"
        assert main(["train", "--features", blob_csv, "--out", str(model_path),
                     "--seed", "3", "--config", fast_config_file(tmp_path)] + FAST_FLAGS) == 0
        return str(model_path)

    def test_output_shape_and_simplex(self, trained, blob_csv, tmp_path, capsys):
        out = tmp_path / "pred.csv"
        assert main(["predict", "--model", trained, "--features", blob_csv,
                     "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "id,predicted_label,p0,p1,p2"
        assert len(lines) == 37  # header + 36 rows
        probs = np.array([[float(v) for v in l.split(",")[2:]] for l in lines[1:]])
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9

    def test_round_trip_byte_identical(self, trained, blob_csv, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["predict", "--model", trained, "--features", blob_csv, "--out", str(a)])
        main(["predict", "--model", trained, "--features", blob_csv, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_dimension_mismatch(self, trained, tmp_path, capsys):
        X = np.random.default_rng(0).normal(size=(4, 10))
        wrong = tmp_path / "wrong.csv"
        write_features(wrong, X, fmt="csv")
        rc = main(["predict", "--model", trained, "--features", str(wrong),
                   "--out", str(tmp_path / "p.csv")])
        assert rc == 1
        assert "6" in capsys.readouterr().err  # names the expected dimension


class TestEvaluateAndCv:
    def test_evaluate_reports(self, blob_csv, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        rc = main(["evaluate", "--features", blob_csv, "--seed", "2",
                   "--test-fraction", "0.25", "--config", fast_config_file(tmp_path),
                   "--out", str(report_path)] + FAST_FLAGS)
        assert rc == 0
        out = capsys.readouterr().out
        assert "test accuracy" in out
        import json

        payload = json.loads(report_path.read_text())
        assert payload["config"]["k_folds"] == 2
        assert payload["seed"] == 2

    def test_missing_labels(self, tmp_path, capsys):
        X = np.random.default_rng(0).normal(size=(8, 3))
        feat = tmp_path / "x.gcfv"
        write_features(feat, X, fmt="binary")
        rc = main(["evaluate", "--features", str(feat)])
        assert rc == 1
        assert "labels required" in capsys.readouterr().err

    def test_cv_summary(self, blob_csv, tmp_path, capsys):
        rc = main(["cv", "--features", blob_csv, "--outer-folds", "2", "--seed", "4",
                   "--config", fast_config_file(tmp_path)] + FAST_FLAGS)
        assert rc == 0
        out = capsys.readouterr().out
        assert "fold 0" in out and "mean test accuracy" in out

    def test_flag_overrides_config_file(self, blob_csv, tmp_path, capsys):
        cfg = fast_config_file(tmp_path, k_folds=3)
        report_path = tmp_path / "r.json"
        rc = main(["evaluate", "--features", blob_csv, "--config", cfg,
                   "--folds", "2", "--max-layers", "1", "--out", str(report_path)])
        assert rc == 0
        import json

        assert json.loads(report_path.read_text())["config"]["k_folds"] == 2


class TestInspect:
    def test_prints_metadata(self, blob_csv, tmp_path, capsys):
        model_path = tmp_path / "m.gcfm"
        main(["train", "--features", blob_csv, "--out", str(model_path),
              "--seed", "1", "--config", fast_config_file(tmp_path)] + FAST_FLAGS)
        capsys.readouterr()
        assert main(["inspect", "--model", str(model_path)]) == 0
        out = capsys.readouterr().out
        assert "base feature dimension: 6" in out
        assert "best layer" in out and "layer 0" in out

    def test_missing_model(self, capsys):
        assert main(["inspect", "--model", "/no/such/model.gcfm"]) == 1


class TestConvert:
    def test_csv_binary_csv_six_significant_digits(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(5, 3))
        y = np.array([0, 1, 2, 1, 0])
        src = tmp_path / "src.csv"
        write_features(src, X, y, fmt="csv")
        binary = tmp_path / "mid.gcfv"
        back = tmp_path / "back.csv"
        assert main(["convert", "--features", str(src), "--out", str(binary), "--to", "binary"]) == 0
        assert main(["convert", "--features", str(binary), "--out", str(back), "--to", "csv"]) == 0
        X2, y2 = load_features(back)
        assert np.allclose(X2, X, rtol=5e-6)
        assert np.array_equal(y, y2)

    def test_binary_csv_binary_byte_identical(self, tmp_path):
        X = np.random.default_rng(1).normal(size=(6, 4)).astype(np.float32).astype(np.float64)
        b1 = tmp_path / "one.gcfv"
        write_features(b1, X, np.arange(6) % 2, fmt="binary")
        mid = tmp_path / "mid.csv"
        b2 = tmp_path / "two.gcfv"
        assert main(["convert", "--features", str(b1), "--out", str(mid), "--to", "csv"]) == 0
        assert main(["convert", "--features", str(mid), "--out", str(b2), "--to", "binary"]) == 0
        assert b1.read_bytes() == b2.read_bytes()

    def test_empty_file(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        rc = main(["convert", "--features", str(empty), "--out",
                   str(tmp_path / "o.gcfv"), "--to", "binary"])
        assert rc == 1

    def test_malformed_row_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,f0\na,1.0\nb,oops\n")
        rc = main(["convert", "--features", str(bad), "--out",
                   str(tmp_path / "o.gcfv"), "--to", "binary"])
        assert rc == 1
        assert "row 2" in capsys.readouterr().err


class TestConfigFile:
    def test_parse_types(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text(
            "k_folds=3\nseed=9\nimprovement_epsilon=0.01\n"
            "random_forest.max_depth=none\nboosted.learning_rate=0.2  # comment\n"
            "extra_trees.bootstrap=false\n"
        )
        values = parse_config_file(p)
        assert values["k_folds"] == 3
        assert values["improvement_epsilon"] == 0.01
        assert values["random_forest.max_depth"] is None
        assert values["boosted.learning_rate"] == 0.2
        assert values["extra_trees.bootstrap"] is False

    def test_unknown_key_rejected(self, blob_csv, tmp_path, capsys):
        p = tmp_path / "c.cfg"
        p.write_text("mystery_knob=1\n")
        rc = main(["evaluate", "--features", blob_csv, "--config", str(p)])
        assert rc == 1
        assert "mystery_knob" in capsys.readouterr().err

    def test_bad_line_rejected(self, blob_csv, tmp_path, capsys):
        p = tmp_path / "c.cfg"
        p.write_text("this is not a key value pair\n")
        rc = main(["evaluate", "--features", blob_csv, "--config", str(p)])
        assert rc == 1
