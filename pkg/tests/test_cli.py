"""Command line behavior: subcommands, overrides, exit codes."""

import json

import pytest

from isoqec.cli import main


def write_config(tmp_path, **overrides):
    data = {"code_list": [[3, 1]], "sigma_grid": [0.0, 0.5],
            "n_samples": 2000, "seed": 11}
    data.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestSweepCommand:
    def test_writes_outputs_and_succeeds(self, tmp_path, capsys):
        csv_path = tmp_path / "rows.csv"
        json_path = tmp_path / "report.json"
        rc = main(["sweep", "--config", write_config(tmp_path),
                   "--csv", str(csv_path), "--json", str(json_path)])
        assert rc == 0
        assert csv_path.exists() and json_path.exists()
        out = capsys.readouterr().out
        assert "2 cells evaluated" in out
        assert "ordering holds" in out

    def test_missing_config_file_exits_2(self, tmp_path, capsys):
        rc = main(["sweep", "--config", str(tmp_path / "absent.json")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_invalid_override_exits_2(self, tmp_path, capsys):
        rc = main(["sweep", "--config", write_config(tmp_path),
                   "--samples", "10"])
        assert rc == 2
        assert "n_samples" in capsys.readouterr().err

    def test_seed_override_changes_estimates(self, tmp_path):
        config = write_config(tmp_path)
        outputs = []
        for seed in ("21", "21", "22"):
            csv_path = tmp_path / f"rows{len(outputs)}.csv"
            assert main(["sweep", "--config", config, "--seed", seed,
                         "--csv", str(csv_path)]) == 0
            outputs.append(csv_path.read_bytes())
        assert outputs[0] == outputs[1]
        assert outputs[0] != outputs[2]

    def test_worker_override_keeps_output(self, tmp_path):
        config = write_config(tmp_path)
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(["sweep", "--config", config, "--csv", str(a)]) == 0
        assert main(["sweep", "--config", config, "--csv", str(b),
                     "--workers", "4"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestVerifyCommands:
    def test_appendix_passes(self, capsys):
        rc = main(["verify", "appendix"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["name"] == "appendix" and report["passed"] is True

    def test_appendix_tolerance_flag(self, capsys):
        rc = main(["verify", "appendix", "--rel-tol", "1e-16"])
        assert rc == 1
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is False

    def test_appendix_bad_tolerance_exits_2(self, capsys):
        rc = main(["verify", "appendix", "--rel-tol", "0"])
        assert rc == 2
        assert "rel_tol" in capsys.readouterr().err

    def test_theorems_reports_erratum(self, capsys):
        rc = main(["verify", "theorems"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        statuses = {c["name"]: c["status"] for c in report["checks"]}
        assert statuses["corrected-upper-bound-printed"] \
            == "erratum-confirmed"


class TestFigureCommand:
    def test_writes_svg(self, tmp_path, capsys):
        out = tmp_path / "fig.svg"
        rc = main(["figure2", "--out", str(out)])
        assert rc == 0
        assert out.read_text().startswith("<svg")
        assert "wrote" in capsys.readouterr().out

    def test_unwritable_path_exits_2(self, tmp_path, capsys):
        rc = main(["figure2", "--out", str(tmp_path / "no_dir" / "f.svg")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestArgumentErrors:
    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_figure_out_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["figure2"])
        assert exc.value.code == 2
