import json

import pytest

from gossip_search.analysis import CSV_COLUMNS
from gossip_search.cli import build_parser, main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCli:
    def test_analytic_blind_sweep(self, capsys):
        code, out, _ = _run(capsys, "analytic-blind", "--nodes", "50", "10", "--fanout", "1", "3")
        lines = out.splitlines()
        assert code == 0 and tuple(lines[0].split(",")) == CSV_COLUMNS and len(lines) == 5
        assert [line.split(",")[2] for line in lines[1:]] == ["10", "10", "50", "50"]

    def test_json_output(self, capsys):
        code, out, _ = _run(capsys, "analytic-smart", "-N", "12", "--format", "json")
        assert code == 0 and json.loads(out)[0]["model"] == "analytic-smart"

    def test_simulate_writes_file_and_manifest(self, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        code, _, _ = _run(capsys, "simulate", "-N", "10", "--instances", "3", "--runs", "4", "--seed", "5", "--out", str(out))
        assert code == 0
        meta = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
        assert meta["seeds"] == [5] and meta["command"] == "simulate"
        assert out.read_text().count("\n") == 2

    def test_identical_seeds_give_identical_bytes(self, tmp_path, capsys):
        paths = [tmp_path / f"{i}.csv" for i in range(2)]
        for p in paths:
            _run(capsys, "simulate", "-N", "20", "-c", "0.5", "--variant", "smart", "--instances", "4", "--runs", "5", "--out", str(p))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_config_error_exit_code(self, capsys):
        code, _, err = _run(capsys, "analytic-blind", "-N", "5", "-k", "9")
        assert code == 2 and "fanout" in err

    def test_size_budget_exit_code(self, capsys):
        code, _, _ = _run(capsys, "exact-blind", "-N", "250")
        assert code == 4

    def test_accuracy_table_text(self, capsys):
        code, out, _ = _run(capsys, "accuracy-table", "-N", "10", "20", "--text")
        assert code == 0 and "mean number of rounds" in out

    def test_compare_analytic_skips_missing_model(self, capsys):
        code, out, err = _run(capsys, "compare", "--source", "analytic", "-N", "30")
        assert code == 0 and "skipping" in err and len(out.splitlines()) == 7

    def test_fit_json(self, capsys):
        code, out, _ = _run(capsys, "fit", "--grid", "10", "100", "1000", "--format", "json")
        result = json.loads(out)
        assert code == 0 and len(result["rounds_log"]) == 3

    def test_bench(self, capsys):
        code, out, err = _run(capsys, "bench", "--grid", "10", "20", "30", "--round", "4")
        assert code == 0 and "exponent" in err and out.startswith("N,r,")

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args(["plot"])
        assert info.value.code == 2
