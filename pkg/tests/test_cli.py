import json

import pytest

from dsplan.cli import main
from dsplan.model import load_dataset, save_dataset
from conftest import make_tower


@pytest.fixture(scope="module")
def dataset_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "tower.json"
    save_dataset(make_tower(2, 1, seed=7), path)
    return path


class TestExitCodes:
    def test_validate_ok(self, dataset_file, capsys):
        assert main(["validate", "--dataset", str(dataset_file)]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_usage_error_missing_dataset(self):
        assert main(["plan"]) == 1

    def test_usage_error_unknown_flag(self, dataset_file):
        assert main(["validate", "--dataset", str(dataset_file),
                     "--bogus"]) == 1

    def test_usage_error_bad_rates(self, dataset_file):
        assert main(["plan", "--dataset", str(dataset_file),
                     "--rates", "0.5,0.5"]) == 1

    def test_dataset_error_missing_file(self, tmp_path):
        assert main(["validate", "--dataset", str(tmp_path / "no.json")]) == 2

    def test_dataset_error_invalid_content(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"version": 1}')
        assert main(["validate", "--dataset", str(bad)]) == 2

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 1


class TestGenSynthetic:
    def test_writes_valid_dataset(self, tmp_path):
        out = tmp_path / "gen.json"
        code = main(["gen-synthetic", "--layers", "2", "--screws", "1",
                     "--seed", "3", "--dataset-out", str(out)])
        assert code == 0
        ds = load_dataset(out)
        assert len(ds.catalog) == 5

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"layers": 1, "screws": 0}))
        out = tmp_path / "gen.json"
        code = main(["gen-synthetic", "--config", str(cfg),
                     "--layers", "2", "--seed", "0",
                     "--dataset-out", str(out)])
        assert code == 0
        assert len(load_dataset(out).catalog) == 3  # layers overridden to 2


class TestPlan:
    def test_outputs_and_determinism(self, dataset_file, tmp_path):
        args = ["plan", "--dataset", str(dataset_file), "--pop", "16",
                "--generations", "5", "--iterations", "1", "--seed", "42"]
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        assert main(args + ["--out", str(d1)]) == 0
        assert main(args + ["--out", str(d2)]) == 0
        for name in ("plan_result.txt", "plan_result.json", "history.csv"):
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_result_text_shows_removal_order(self, dataset_file, tmp_path,
                                             capsys):
        out = tmp_path / "r"
        main(["plan", "--dataset", str(dataset_file), "--pop", "12",
              "--generations", "2", "--iterations", "1", "--seed", "1",
              "--out", str(out)])
        text = (out / "plan_result.txt").read_text()
        assert "removal_order:" in text
        assert "position 1" in text          # convention header
        assert "seed: 1" in text
        captured = capsys.readouterr().out
        assert "removal_order:" in captured

    def test_objective_subset_flag(self, dataset_file, tmp_path):
        out = tmp_path / "r"
        code = main(["plan", "--dataset", str(dataset_file), "--pop", "12",
                     "--generations", "2", "--iterations", "1",
                     "--seed", "2", "--objectives", "d,e",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads((out / "plan_result.json").read_text())
        assert doc["config"]["objectives"] == ["d", "e"]


class TestBenchCommands:
    def test_init_bench_csv(self, dataset_file, tmp_path, capsys):
        code = main(["init-bench", "--dataset", str(dataset_file),
                     "--trials", "40", "--seed", "5",
                     "--methods", "ri,ccgi", "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("method,trials,feasible_rate")
        csv = (tmp_path / "init-bench_summary.csv").read_text()
        assert "ccgi,40," in csv

    def test_init_bench_rejects_bad_method(self, dataset_file, tmp_path):
        assert main(["init-bench", "--dataset", str(dataset_file),
                     "--methods", "nope", "--out", str(tmp_path)]) == 1

    def test_ablate_and_single_obj(self, dataset_file, tmp_path):
        common = ["--dataset", str(dataset_file), "--pop", "12",
                  "--generations", "3", "--iterations", "2",
                  "--divisions", "3", "--seed", "3"]
        assert main(["ablate", *common, "--out", str(tmp_path / "a")]) == 0
        assert (tmp_path / "a" / "ablation_summary.csv").exists()
        assert main(["single-obj", *common, "--objective", "p",
                     "--out", str(tmp_path / "s")]) == 0
        csv = (tmp_path / "s" / "single-objective_summary.csv").read_text()
        assert "w_p," in csv

    def test_out_dir_env_default(self, dataset_file, tmp_path, monkeypatch):
        monkeypatch.setenv("DSPLAN_OUT_DIR", str(tmp_path / "env_out"))
        assert main(["init-bench", "--dataset", str(dataset_file),
                     "--trials", "10", "--seed", "0",
                     "--methods", "ccgi"]) == 0
        assert (tmp_path / "env_out" / "init-bench_summary.csv").exists()
