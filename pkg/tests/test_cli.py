"""End-to-end CLI flows: every command, determinism, and exit codes."""

import json

import pytest

from selsample.cli import main
from selsample.sampling import load_sample
from selsample.stats import load_stats
from selsample.tables import read_csv


def run(argv):
    return main(argv)


@pytest.fixture()
def uniform_csv(tmp_path):
    out = tmp_path / "t.csv"
    code = run(
        [
            "gen-data", "--kind", "uniform", "--rows", "400", "--cols", "2",
            "--domain-lo", "0", "--domain-hi", "100", "--seed", "3",
            "--out", str(out), "--name", "T",
        ]
    )
    assert code == 0
    return out


class TestGenData:
    def test_uniform(self, uniform_csv):
        t = read_csv(uniform_csv)
        assert t.row_count == 400
        assert t.column_names == ("C1", "C2")

    def test_correlated(self, tmp_path):
        out = tmp_path / "c.csv"
        code = run(
            [
                "gen-data", "--kind", "correlated", "--rows", "200",
                "--mu", "50", "--cov", "100,90,100",
                "--domain-lo", "0", "--domain-hi", "100", "--seed", "1",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert read_csv(out).row_count == 200

    def test_correlated_rejects_extra_cols(self, tmp_path):
        code = run(
            [
                "gen-data", "--kind", "correlated", "--rows", "10", "--cols", "3",
                "--out", str(tmp_path / "x.csv"),
            ]
        )
        assert code == 2

    def test_deterministic_bytes(self, tmp_path):
        args = [
            "gen-data", "--kind", "uniform", "--rows", "100", "--cols", "2",
            "--seed", "9", "--name", "T",
        ]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert run(args + ["--out", str(a)]) == 0
        assert run(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestBuildSample:
    def test_fixed_size(self, tmp_path, uniform_csv):
        out = tmp_path / "sample"
        code = run(
            ["build-sample", "--table", str(uniform_csv), "--size", "50", "--seed", "4",
             "--out", str(out)]
        )
        assert code == 0
        sdb = load_sample(out / "manifest.json")
        assert sdb.size == 50
        assert sdb.base_names == ("t",)

    def test_auto_size_from_bound(self, tmp_path, uniform_csv):
        out = tmp_path / "sample"
        code = run(
            ["build-sample", "--table", str(uniform_csv), "--auto",
             "--d-override", "2", "--epsilon", "0.05", "--delta", "0.05",
             "--seed", "4", "--out", str(out)]
        )
        assert code == 0
        assert load_sample(out / "manifest.json").size == 1000

    def test_needs_size_or_auto(self, tmp_path, uniform_csv):
        assert run(["build-sample", "--table", str(uniform_csv), "--out", str(tmp_path / "s")]) == 2


class TestBuildStats:
    def test_writes_catalog(self, tmp_path, uniform_csv):
        out = tmp_path / "stats.txt"
        code = run(["build-stats", "--table", str(uniform_csv), "--buckets", "10",
                    "--mcv", "5", "--out", str(out)])
        assert code == 0
        cat = load_stats(out)
        assert ("t", "C1") in cat and ("t", "C2") in cat


class TestBoundsAndSampleSize:
    def test_bounds_json(self, capsys):
        assert run(["bounds", "--u", "2", "--m", "1", "--b", "1", "--json"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["dimension"] == 441
        assert record["formula"] == "general"

    def test_bounds_text_deterministic(self, capsys):
        assert run(["bounds", "--m", "2", "--b", "3"]) == 0
        first = capsys.readouterr().out
        assert run(["bounds", "--m", "2", "--b", "3"]) == 0
        assert capsys.readouterr().out == first
        assert "bound:" in first

    def test_sample_size_with_override(self, capsys):
        assert run(["sample-size", "--d-override", "2", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["sample_size"] == 1000

    def test_sample_size_relative(self, capsys):
        assert run(["sample-size", "--d-override", "2", "--p", "0.5", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["sample_size"] == 1753

    def test_sample_size_from_class(self, capsys):
        assert run(["sample-size", "--u", "1", "--m", "1", "--b", "1", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["d"] == 2

    def test_sample_size_needs_inputs(self):
        assert run(["sample-size"]) == 2


class TestEstimate:
    def test_stdout_csv(self, tmp_path, uniform_csv, capsys):
        sample_dir = tmp_path / "sample"
        run(["build-sample", "--table", str(uniform_csv), "--size", "64", "--seed", "1",
             "--out", str(sample_dir)])
        capsys.readouterr()
        code = run(
            ["estimate", "--query", "SELECT * FROM t WHERE t.C1 >= 50",
             "--sample", str(sample_dir / "manifest.json")]
        )
        assert code == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].startswith("query_id,node_id,node_kind")
        assert lines[1].startswith("0,0,select,")

    def test_with_exact(self, tmp_path, uniform_csv):
        sample_dir = tmp_path / "sample"
        run(["build-sample", "--table", str(uniform_csv), "--size", "64", "--seed", "1",
             "--out", str(sample_dir)])
        out = tmp_path / "est.csv"
        code = run(
            ["estimate", "--query", "SELECT * FROM t WHERE t.C1 >= 50",
             "--sample", str(sample_dir / "manifest.json"),
             "--exact-against", str(uniform_csv), "--out", str(out)]
        )
        assert code == 0
        line = out.read_text().splitlines()[1]
        exact_field = line.split(",")[3]
        assert exact_field != ""

    def test_bad_query_exits_2(self, tmp_path, uniform_csv):
        sample_dir = tmp_path / "sample"
        run(["build-sample", "--table", str(uniform_csv), "--size", "8", "--seed", "1",
             "--out", str(sample_dir)])
        code = run(
            ["estimate", "--query", "SELECT * FROM nope",
             "--sample", str(sample_dir / "manifest.json")]
        )
        assert code == 2


class TestExperiment:
    def _args(self, uniform_csv, out_dir):
        return [
            "experiment", "--table", str(uniform_csv),
            "--workload-m", "1", "--workload-b", "2", "--count", "5",
            "--sizes", "20,40", "--epsilon", "0.1", "--seed", "6",
            "--methods", "indexed,histogram",
            "--out-dir", str(out_dir),
        ]

    def test_outputs(self, tmp_path, uniform_csv):
        out_dir = tmp_path / "exp"
        assert run(self._args(uniform_csv, out_dir)) == 0
        summary = (out_dir / "summary.csv").read_text().splitlines()
        assert summary[0] == "method,sample_size,mean_pct_error,stddev_pct_error,frac_within_eps,excluded"
        assert len(summary) == 1 + 2 + 1  # indexed x 2 sizes + histogram
        per_query = (out_dir / "per_query.csv").read_text().splitlines()
        assert len(per_query) == 1 + 5 * 2  # one node per select query per size

    def test_byte_identical_rerun(self, tmp_path, uniform_csv):
        d1 = tmp_path / "e1"
        d2 = tmp_path / "e2"
        assert run(self._args(uniform_csv, d1)) == 0
        assert run(self._args(uniform_csv, d2)) == 0
        assert (d1 / "summary.csv").read_bytes() == (d2 / "summary.csv").read_bytes()
        assert (d1 / "per_query.csv").read_bytes() == (d2 / "per_query.csv").read_bytes()

    def test_missing_table_exits_2(self, tmp_path):
        code = run(
            ["experiment", "--table", str(tmp_path / "nope.csv"),
             "--workload-m", "1", "--workload-b", "1", "--out-dir", str(tmp_path / "e")]
        )
        assert code == 2
