"""
Tests for the eigenrand command line and its reports
"""
import csv
import json
import math
import os

import pytest

from eigenrand import main, spectral
from eigenrand.errors import DomainError
from eigenrand.main import RunConfig, _jsonable, create_filename, run


class TestFilenames:
    def test_safe_names(self):
        assert create_filename("verify", "All Suites!") == "verify-all-suites.json"
        assert create_filename("plp-sweep", "highest", "csv") == "plp-sweep-highest.csv"

    def test_long_labels_are_truncated(self):
        name = create_filename("series-mc", "x" * 80)
        assert name == "series-mc-" + "x" * 50 + ".json"


class TestRunConfig:
    def test_execution_fields_stay_out_of_the_report(self):
        config = RunConfig(subcommand="randmat-moments", d=[4], ensemble=["haar-o"], seed=1, threads=3, out="x.json")
        dumped = config.report_config()
        assert "threads" not in dumped and "out" not in dumped
        assert dumped["seed"] == 1

    def test_verify_scale_is_part_of_the_report_and_the_name(self):
        config = RunConfig(subcommand="verify", seed=42, scale="acceptance")
        assert config.report_config()["scale"] == "acceptance"
        assert main._output_path(config).endswith("verify-all-acceptance-seed42.json")
        assert main._output_path(RunConfig(subcommand="verify", seed=42)).endswith("verify-all-seed42.json")

    def test_hermite_sweep_is_stochastic(self):
        assert RunConfig(subcommand="plp-sweep", family="hermite", d=[2], p=4.0, seed=0).stochastic
        assert not RunConfig(subcommand="plp-sweep", family="highest", d=[2], p=6.0).stochastic

    @pytest.mark.parametrize(
        "fields",
        [
            {"subcommand": "series-mc", "family": "zonal", "d": [2], "p": 4.0, "N": 5},
            {"subcommand": "verify"},
            {"subcommand": "spectral-table", "d": [2]},
            {"subcommand": "randmat-moments", "d": [4], "ensemble": ["haar-o"], "seed": 1, "format": "csv"},
            {"subcommand": "plp-sweep", "family": "bessel", "d": [2], "p": 6.0},
            {"subcommand": "verify", "seed": 1, "scale": "huge"},
            {"subcommand": "verify", "seed": 1, "suite": "physics"},
            {"subcommand": "randmat-moments", "d": [0], "ensemble": ["haar-o"], "seed": 1},
        ],
    )
    def test_invalid_configurations(self, fields):
        with pytest.raises(ValueError):
            RunConfig(**fields)


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["randmat-moments", "--ensemble", "haar-o", "--d", "4"],
            ["series-mc", "--family", "bessel", "--d", "2", "--p", "4", "--N", "4", "--seed", "1"],
            ["transform"],
            ["spectral-table", "--d", "2"],
            ["randmat-moments", "--ensemble", "ginibre", "--d", "4", "--seed", "1"],
            ["plp-sweep", "--family", "zonal", "--d", "2", "--p", "3"],
            ["verify", "--suite", "physics", "--seed", "1"],
            ["verify", "--scale", "huge", "--seed", "1"],
        ],
    )
    def test_usage_errors_exit_with_two(self, argv, capsys):
        assert run(argv) == 2
        assert "error" in capsys.readouterr().err

    def test_version(self):
        assert run(["--version"]) == 0

    def test_numerical_domain_errors_give_a_failed_report(self, tmp_path, monkeypatch):
        def broken(config, path):
            raise DomainError("quadrature weights must be strictly positive")

        monkeypatch.setitem(main.EXPERIMENTS, "randmat-moments", broken)
        out = tmp_path / "broken.json"
        assert run(["randmat-moments", "--ensemble", "haar-o", "--d", "4", "--seed", "1", "--out", str(out)]) == 1
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["passed"] is False
        assert report["flags"] == ["DomainError: quadrature weights must be strictly positive"]


class TestReports:
    def test_spectral_table_csv_in_the_output_directory(self):
        code = run(["spectral-table", "--d", "2", "--n", "4,10", "--r-points", "11"])
        assert code == 0
        path = os.path.join(os.environ["EIGENRAND_OUTPUT_DIR"], "spectral-table-table.csv")
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.DictReader(handle))
        assert tuple(rows[0].keys()) == spectral.SPECTRAL_TABLE_COLUMNS
        assert len(rows) == 22
        assert {row["n"] for row in rows} == {"4", "10"}

    def test_spectral_table_json(self, tmp_path):
        out = tmp_path / "table.json"
        assert run(["spectral-table", "--d", "3", "--n", "2", "--r-points", "5", "--format", "json",
                    "--out", str(out)]) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["schema_version"] == main.SCHEMA_VERSION
        assert report["experiment"] == "spectral-table"
        assert len(report["rows"]) == 5
        assert report["passed"] is True

    def test_reports_do_not_depend_on_the_thread_count(self, tmp_path):
        argv = ["randmat-moments", "--ensemble", "iid-gaussian,haar-o", "--d", "4,8", "--samples", "100",
                "--seed", "11"]
        payloads, codes = [], []
        for threads in (1, 4):
            out = tmp_path / f"report-{threads}.json"
            codes.append(run(argv + ["--threads", str(threads), "--out", str(out)]))
            payloads.append(out.read_bytes())
        assert payloads[0] == payloads[1]
        assert codes[0] == codes[1]
        report = json.loads(payloads[0])
        assert "threads" not in report["config"] and "out" not in report["config"]
        assert report["config"]["seed"] == 11

    def test_sweep_json_spells_out_infinite_bands(self, tmp_path):
        out = tmp_path / "sweep.json"
        code = run(["plp-sweep", "--family", "highest", "--d", "2", "--p", "6", "--n-max", "256",
                    "--format", "json", "--out", str(out)])
        report = json.loads(out.read_text(encoding="utf-8"))
        assert len(report["rows"]) == 10
        assert all("pass" in row for row in report["rows"])
        assert any(row["band_hi"] == "inf" for row in report["rows"])
        assert code == (0 if report["passed"] and not report["flags"] else 1)

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        run(["plp-sweep", "--family", "zonal", "--d", "2", "--p", "6", "--n-max", "256", "--out", str(out)])
        with open(out, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 11
        assert rows[1][0] == "zonal"


def test_non_finite_values_become_strings():
    value = {"a": math.inf, "b": [-math.inf, math.nan, 1.5], 3: None}
    assert _jsonable(value) == {"a": "inf", "b": ["-inf", "nan", 1.5], "3": None}
