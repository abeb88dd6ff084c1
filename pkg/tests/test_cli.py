import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from metricindex import Item, brute_knn, get_metric
from metricindex.cli import main
from metricindex.datasets import load_strings


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_self_check(capsys):
    code, out, _ = run(["self-check", "--seed", "1", "--n", "150"], capsys)
    assert code == 0
    assert "FAIL" not in out and out.count("ok") == 21


def test_interleave_bench_one_row_per_k(capsys):
    code, out, _ = run(["interleave-bench", "--index", "vp-mv", "--metric", "euclidean",
                        "--rw", "100:1", "--synthetic", "n=4000,d=10,k=4", "--seed", "3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["k"] for r in rows] == ["1", "5", "25", "100"]
    assert all(r["mode"] == "interleaved" and r["seed"] == "3" for r in rows)


def test_knn_matches_brute(tmp_path, capsys):
    titles = tmp_path / "titles.txt"
    titles.write_text("casablanca\ncasa blanca\nbatman\nthe godfather\nblade runner\n"
                      "casablanka\nalien\naliens\nheat\nup\n")
    code, out, _ = run(["knn", "--index", "cover", "--metric", "levenshtein", "--data",
                        str(titles), "--query", "casablanca", "--k", "5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    items = load_strings(titles)
    want = brute_knn(items, get_metric("levenshtein"), Item(-1, b"casablanca"), 5)
    assert [float(r["distance"]) for r in rows] == [nb.distance for nb in want]
    assert rows[0]["item"] == "casablanca"


def test_knn_vectors(tmp_path, capsys):
    p = tmp_path / "v.txt"
    p.write_text("0 0\n1 1\n5 5\n")
    code, out, _ = run(["knn", "--index", "vp-mv,rbc-imp", "--data", str(p), "--query", "1,0.9",
                        "--k", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["index"], r["id"]) for r in rows] == [("vp-mv", "1"), ("rbc-imp", "1")]


def test_bench_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["query-bench", "--index", "rbc-imp,cover-b", "--synthetic", "n=300,d=3",
                      "--k", "1,5", "--queries", "20", "--seed", "0,1", "--output", str(out)],
                     capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 * 2 * 2
    meta = json.loads((tmp_path / "r.csv.json").read_text())
    assert meta["seeds"] == [0, 1]


def test_build_bench_strings(capsys):
    code, out, _ = run(["build-bench", "--index", "vp-median", "--metric", "lz-jaccard",
                        "--synthetic", "n=100,len=64", "--mode", "half-batch"], capsys)
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert row["mode"] == "half-batch" and int(row["construction_dists"]) > 0


def test_jobs_match_serial(capsys):
    argv = ["query-bench", "--index", "vp-mv,brute", "--synthetic", "n=200,d=2", "--k", "3",
            "--queries", "10", "--seed", "0,1"]
    _, serial, _ = run(argv, capsys)
    _, parallel, _ = run(argv + ["--jobs", "2"], capsys)
    assert serial == parallel


@pytest.mark.parametrize("argv", [
    ["query-bench", "--bogus"],
    ["query-bench", "--index", "kd-tree"],
    ["knn", "--index", "vp-mv"],
    ["query-bench", "--synthetic", "n=10,zz=1"],
])
def test_bad_flags_exit_nonzero(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code != 0


def test_unreadable_data_is_one_line_error(tmp_path, capsys):
    code, _, err = run(["query-bench", "--data", str(tmp_path / "missing.txt")], capsys)
    assert code != 0
    assert err.startswith("error:") and err.count("\n") == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "metricindex", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "self-check" in proc.stdout
