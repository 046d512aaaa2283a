import json

import pytest

from eegselect.cli import cli_main


def run_cli(*args):
    return cli_main([str(a) for a in args])


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "s01.eegt"
    code = run_cli(
        "synth", "--out", path, "--montage", "bciiv2a22",
        "--channels", "C3,C4", "--trials", "40", "--erd-depth", "0.5",
        "--snr", "3.0", "--seed", "7",
    )
    assert code == 0
    return path


class TestSynthCommand:
    def test_deterministic_output(self, tmp_path, synth_file):
        other = tmp_path / "again.eegt"
        assert run_cli(
            "synth", "--out", other, "--montage", "bciiv2a22",
            "--channels", "C3,C4", "--trials", "40", "--erd-depth", "0.5",
            "--snr", "3.0", "--seed", "7",
        ) == 0
        assert other.read_bytes() == synth_file.read_bytes()

    def test_unknown_channel_is_config_error(self, tmp_path):
        assert run_cli(
            "synth", "--out", tmp_path / "x.eegt", "--montage", "bciiv2a22",
            "--channels", "BOGUS", "--trials", "10",
        ) == 1


class TestConvertCheck:
    def test_valid_file(self, synth_file, capsys):
        assert run_cli("convert-check", synth_file) == 0
        out = capsys.readouterr().out
        assert "40 trials x 22 channels" in out
        assert "ok" in out

    def test_corrupt_file(self, tmp_path, synth_file):
        bad = tmp_path / "bad.eegt"
        bad.write_bytes(synth_file.read_bytes()[:-5])
        assert run_cli("convert-check", bad) == 2

    def test_missing_file(self, tmp_path):
        assert run_cli("convert-check", tmp_path / "nope.eegt") == 2


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, synth_file):
    out = tmp_path_factory.mktemp("run_out")
    cfg = tmp_path_factory.mktemp("cfg") / "cfg.json"
    cfg.write_text(json.dumps({
        "datasets": [str(synth_file)],
        "out_dir": str(out),
        "montage": "bciiv2a22",
        "algorithms": ["nsga2", "greedy"],
        "seeds": [0],
        "max_channels": 6,
        "n_candidates": 4,
        "nsga2": {"pop_size": 10, "generations": 10},
    }))
    assert run_cli("run", "--config", cfg) == 0
    return out


class TestRunCommand:
    def test_output_files(self, run_dir):
        assert (run_dir / "results.csv").exists()
        lines = (run_dir / "results.csv").read_text().splitlines()
        assert lines[0] == "subject,algorithm,acc_all,acc_sel,pr"
        assert len(lines) == 3  # two algorithms, one subject, one seed
        assert (run_dir / "frontiers.csv").exists()
        assert (run_dir / "chosen_subsets.csv").exists()
        assert (run_dir / "selection_frequency_nsga2.csv").exists()
        assert (run_dir / "topomap_nsga2.svg").exists()
        assert (run_dir / "trace_s01_nsga2_s0.csv").exists()
        assert (run_dir / "greedy_trace_s01_greedy_s0.csv").exists()

    def test_report_command(self, run_dir):
        assert run_cli("report", "--results", run_dir) == 0
        lines = (run_dir / "report.csv").read_text().splitlines()
        assert lines[0] == "algorithm,all,sel,pr"
        assert len(lines) == 3

    def test_frontier_command(self, run_dir):
        assert run_cli("frontier", "--results", run_dir) == 0
        lines = (run_dir / "frontier_avg.csv").read_text().splitlines()
        assert lines[0] == "algorithm,k,f1,f2"
        assert len(lines) == 5  # nsga2 only (greedy has no objectives), k=1..4

    def test_anova_command(self, tmp_path, capsys):
        rows = ["subject,algorithm,acc_all,acc_sel,pr"]
        for s in range(6):
            rows.append(f"s{s},nsga2,0.7,{0.80 + 0.01 * s:.2f},8")
            rows.append(f"s{s},greedy,0.7,{0.60 + 0.01 * s:.2f},5")
        (tmp_path / "results.csv").write_text("\n".join(rows) + "\n")
        assert run_cli("anova", "--results", tmp_path) == 0
        out = capsys.readouterr().out
        assert "F=" in out and "p=" in out

    def test_anova_needs_two_algorithms(self, run_dir, tmp_path):
        rows = ["subject,algorithm,acc_all,acc_sel,pr", "s0,nsga2,0.7,0.8,8"]
        (tmp_path / "results.csv").write_text("\n".join(rows) + "\n")
        assert run_cli("anova", "--results", tmp_path) == 2

    def test_anova_degenerate_results_are_data_error(self, tmp_path):
        rows = ["subject,algorithm,acc_all,acc_sel,pr"]
        for s in range(4):
            rows.append(f"s{s},nsga2,1.0,1.0,8")
            rows.append(f"s{s},greedy,1.0,1.0,5")
        (tmp_path / "results.csv").write_text("\n".join(rows) + "\n")
        assert run_cli("anova", "--results", tmp_path) == 2

    def test_missing_dataset_is_data_error(self, tmp_path, run_dir):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "datasets": [str(tmp_path / "ghost.eegt")],
            "out_dir": str(tmp_path / "o"),
        }))
        assert run_cli("run", "--config", cfg) == 2

    def test_bad_flag_is_config_error(self):
        assert run_cli("run", "--bogus-flag") == 1

    def test_missing_config_is_config_error(self, tmp_path):
        assert run_cli("run", "--config", tmp_path / "none.toml") == 1

    def test_worker_pool_matches_serial(self, tmp_path, synth_file, monkeypatch):
        def run_once(out_dir, workers):
            monkeypatch.setenv("EEGSELECT_WORKERS", workers)
            cfg = tmp_path / f"{out_dir.name}.json"
            cfg.write_text(json.dumps({
                "datasets": [str(synth_file)],
                "out_dir": str(out_dir),
                "montage": "bciiv2a22",
                "algorithms": ["nsga2"],
                "seeds": [0, 1],
                "max_channels": 6,
                "n_candidates": 3,
                "nsga2": {"pop_size": 10, "generations": 5},
            }))
            assert run_cli("run", "--config", cfg) == 0
            return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}

        serial = run_once(tmp_path / "serial", "1")
        parallel = run_once(tmp_path / "parallel", "2")
        assert serial.keys() == parallel.keys()
        assert all(serial[k] == parallel[k] for k in serial)
