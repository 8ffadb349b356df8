import json
from dataclasses import replace

import numpy as np
import pytest

from rnnelm.cli import main, parse_seeds
from rnnelm.elm import AdaptConfig, predict_labels, save_model, load_model
from rnnelm.errors import InvalidInputError
from rnnelm.experiments import (
    DatasetSpec,
    ExperimentConfig,
    compare_activations,
    load_dataset_pair,
    preset_config,
    results_csv,
    results_document,
    results_json_bytes,
    run_experiment,
    sweep,
)

BLOBS = DatasetSpec(kind="blobs", blobs_seed=11, blobs_train=120, blobs_test=60,
                    blobs_classes=3, blobs_dim=6, blobs_spread=0.15)


def blobs_config(**overrides):
    base = dict(
        dataset=BLOBS,
        activation="rnn",
        n_hidden=40,
        seeds=(1, 2),
        adapt=AdaptConfig(step=5.0, max_iters=5, train_acc_cap=0.99),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_separable_blobs_reach_full_accuracy(self):
        spec = replace(BLOBS, blobs_spread=0.01)
        result = run_experiment(blobs_config(dataset=spec))
        assert result.mean_test == 1.0
        assert result.mean_train == 1.0

    def test_zero_iterations_equals_noop_adaptation(self):
        cfg_a = blobs_config(adapt=AdaptConfig(step=5.0, max_iters=0, train_acc_cap=0.99))
        cfg_b = blobs_config(adapt=AdaptConfig(step=123.0, max_iters=0, train_acc_cap=0.5))
        res_a = run_experiment(cfg_a)
        res_b = run_experiment(cfg_b)
        assert res_a.test_acc == res_b.test_acc
        assert res_a.train_acc == res_b.train_acc

    def test_deterministic_given_config_and_seeds(self):
        cfg = blobs_config(pca_m=4)
        doc_a = results_document("run", [run_experiment(cfg)], include_timings=False)
        doc_b = results_document("run", [run_experiment(cfg)], include_timings=False)
        assert results_json_bytes(doc_a) == results_json_bytes(doc_b)

    def test_history_respects_budget(self):
        cfg = blobs_config(adapt=AdaptConfig(step=5.0, max_iters=7, train_acc_cap=1.0))
        result = run_experiment(cfg)
        assert all(len(h) <= 7 for h in result.history)

    def test_pca_pipeline_with_cluster_activation(self):
        # projections go negative; the shift keeps zeta's domain valid
        cfg = blobs_config(pca_m=3, shift_mode="min")
        result = run_experiment(cfg)
        assert result.mean_test > 0.5

    def test_shift_mode_none_fails_under_negative_projections(self):
        cfg = blobs_config(pca_m=3, shift_mode="none")
        with pytest.raises(InvalidInputError, match="stage"):
            run_experiment(cfg)

    def test_stage_is_named_on_error(self):
        cfg = blobs_config(pca_m=50)  # more components than features
        with pytest.raises(InvalidInputError, match="stage 'pca'"):
            run_experiment(cfg)

    def test_saved_model_reproduces_test_predictions(self, tmp_path):
        cfg = blobs_config(pca_m=3)
        result = run_experiment(cfg, keep_models=True)
        train, test = load_dataset_pair(cfg.dataset)
        model = result.models[0]
        preds = predict_labels(model, test.features)
        acc = float(np.mean(preds == test.labels))
        assert acc == result.test_acc[0]
        save_model(model, tmp_path / "m.bin")
        loaded = load_model(tmp_path / "m.bin")
        np.testing.assert_array_equal(predict_labels(loaded, test.features), preds)

    def test_timing_fields_recorded(self):
        result = run_experiment(blobs_config())
        assert len(result.train_time) == 2
        assert all(t >= 0 for t in result.train_time + result.test_time)


class TestCompareActivations:
    def test_six_rows_same_seeds(self):
        rows = compare_activations(blobs_config())
        assert [kind for kind, _ in rows] == ["sigmoid", "sine", "hardlim", "tribas", "radbas", "rnn"]
        seed_lists = {tuple(res.seeds) for _, res in rows}
        assert seed_lists == {(1, 2)}

    def test_document_structure(self):
        rows = compare_activations(blobs_config(seeds=(3,)))
        doc = results_document("compare", rows, include_timings=False)
        assert doc["format_version"] == 1
        assert len(doc["rows"]) == 6
        assert all("train_seconds" not in row for row in doc["rows"])
        assert {row["activation"] for row in doc["rows"]} == set(
            ("sigmoid", "sine", "hardlim", "tribas", "radbas", "rnn")
        )


class TestSweep:
    def test_single_cell_reduces_to_run_experiment(self):
        cfg = blobs_config()
        cells = sweep(cfg, (3,), (40,))
        direct = run_experiment(replace(cfg, pca_m=3, n_hidden=40))
        assert len(cells) == 1
        m, n_hidden, res = cells[0]
        assert (m, n_hidden) == (3, 40)
        assert res.test_acc == direct.test_acc
        assert res.train_acc == direct.train_acc

    def test_cell_count_is_grid_product(self):
        cells = sweep(blobs_config(seeds=(1,)), (2, 3), (10, 20, 30))
        assert len(cells) == 6
        assert [(m, nh) for m, nh, _ in cells] == [
            (2, 10), (2, 20), (2, 30), (3, 10), (3, 20), (3, 30)
        ]

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidInputError):
            sweep(blobs_config(), (), (10,))


class TestResultsFiles:
    def test_csv_one_line_per_seed(self):
        doc = results_document("run", [run_experiment(blobs_config())])
        csv = results_csv(doc)
        lines = csv.strip().split("\n")
        assert lines[0].startswith("pca_m,n_hidden,activation,seed")
        assert len(lines) == 1 + 2  # header + one per seed

    def test_json_round_trips(self):
        doc = results_document("run", [run_experiment(blobs_config(seeds=(5,)))], include_timings=False)
        parsed = json.loads(results_json_bytes(doc))
        assert parsed["rows"][0]["config"]["n_hidden"] == 40
        assert parsed["rows"][0]["seeds"] == [5]


class TestPresets:
    def test_preset_configs(self, tmp_path):
        cfg, grid = preset_config("table1", str(tmp_path))
        assert cfg.activation == "rnn" and cfg.n_hidden == 1000 and grid is None
        assert cfg.dataset.scale == "raw"
        assert cfg.adapt.max_iters == 0
        cfg, grid = preset_config("fig1", str(tmp_path))
        assert grid == ((5, 10, 20, 50, 100, 200), (100, 200, 500, 1000))
        assert cfg.adapt == AdaptConfig(step=5.0, max_iters=30, train_acc_cap=0.985)
        cfg, grid = preset_config("table3", str(tmp_path))
        assert grid == ((2, 5, 10, 20, 30, 40, 50), (500,))
        assert cfg.adapt.train_acc_cap == 0.99
        with pytest.raises(InvalidInputError):
            preset_config("table9", str(tmp_path))

    def test_preset_seed_override(self, tmp_path):
        cfg, _ = preset_config("table1", str(tmp_path), seeds=(7, 8))
        assert cfg.seeds == (7, 8)


class TestCli:
    def test_parse_seeds(self):
        assert parse_seeds("1-5") == (1, 2, 3, 4, 5)
        assert parse_seeds("1..3") == (1, 2, 3)
        assert parse_seeds("2,9,4") == (2, 9, 4)
        assert parse_seeds("7") == (7,)

    def test_run_blobs_end_to_end(self, tmp_path, capsys):
        out = tmp_path / "results"
        code = main(
            [
                "run", "--dataset", "blobs", "--blobs-spread", "0.01",
                "--blobs-classes", "2", "--n-hidden", "30", "--seeds", "1-2",
                "--iters", "2", "--out", str(out), "--no-timing",
            ]
        )
        assert code == 0
        doc = json.loads((out / "results.json").read_text())
        assert doc["rows"][0]["mean_test_accuracy"] == 1.0
        assert (out / "results.csv").exists()
        assert "test acc" in capsys.readouterr().out

    def test_cli_determinism_byte_identical(self, tmp_path):
        args = [
            "run", "--dataset", "blobs", "--n-hidden", "25", "--seeds", "1-3",
            "--iters", "3", "--no-timing",
        ]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        assert (tmp_path / "a/results.json").read_bytes() == (tmp_path / "b/results.json").read_bytes()
        assert (tmp_path / "a/results.csv").read_bytes() == (tmp_path / "b/results.csv").read_bytes()

    def test_missing_data_reports_cleanly(self, tmp_path, capsys):
        code = main(
            ["run", "--dataset", "mnist", "--data-dir", str(tmp_path / "nope"), "--out", str(tmp_path / "o")]
        )
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_sweep_cli(self, tmp_path):
        out = tmp_path / "sw"
        code = main(
            [
                "sweep", "--dataset", "blobs", "--pca-grid", "2,3", "--hidden-grid", "15",
                "--seeds", "1", "--iters", "1", "--out", str(out), "--no-timing",
            ]
        )
        assert code == 0
        doc = json.loads((out / "results.json").read_text())
        assert len(doc["rows"]) == 2
        assert doc["rows"][0]["pca_m"] == 2
