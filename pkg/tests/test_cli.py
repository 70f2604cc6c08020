import json

import numpy as np
import pytest

from powerkernel.cli import main
from powerkernel.gram import load_embeddings, read_gram_svm

from .conftest import write_tu

SYN = ["--synthetic", "15,0.3,8"]


def test_gram_synthetic(tmp_path, capsys):
    assert main(["gram", *SYN, "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["m"] == 8 and report["psd"]["pass"]
    for ext in ("csv", "json", "svm", "report.json"):
        assert (tmp_path / f"er_n15_p0.3.{ext}").exists()


def test_gram_single_format_and_cache(tmp_path):
    cache = tmp_path / "emb.json"
    argv = ["gram", *SYN, "--out", str(tmp_path), "--format", "svm", "--cache", str(cache)]
    assert main(argv) == 0
    first = read_gram_svm(tmp_path / "er_n15_p0.3.svm")[0]
    assert not (tmp_path / "er_n15_p0.3.csv").exists()
    assert main(argv) == 0
    assert np.array_equal(first, read_gram_svm(tmp_path / "er_n15_p0.3.svm")[0])
    assert load_embeddings(cache, 5, 1e-6) is not None


def test_gram_from_tu_directory(tmp_path, monkeypatch):
    write_tu(tmp_path / "data", "TOY", [(1, 2), (2, 1), (2, 3), (3, 2), (4, 5), (5, 4)], [1, 1, 1, 2, 2], [1, -1])
    monkeypatch.setenv("POWERKERNEL_DATASET_ROOT", str(tmp_path / "data"))
    assert main(["gram", "--name", "TOY", "--out", str(tmp_path / "out"), "--k", "2"]) == 0
    vals, labels = read_gram_svm(tmp_path / "out" / "TOY.svm")
    assert vals.shape == (2, 2) and list(labels) == [1, -1]


def test_perturb(tmp_path):
    out = tmp_path / "trace.csv"
    assert main(["perturb", "--synthetic", "20,0.2,10", "--sample", "10", "--flips", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "flips,mean_kernel,stderr" and len(lines) == 5


def test_invariance_pass_and_fail(tmp_path):
    out = tmp_path / "inv.json"
    assert main(["invariance", "--trials", "10", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True
    assert main(["invariance", "--trials", "3", "--family", "regular", "--ridge", "0", "--out", str(out)]) == 3
    assert json.loads(out.read_text())["embedding_failures"] == 3


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--sizes", "100,200", "--repeats", "5", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "E,n,wall_time"
    assert main(["bench", "--sizes", "200,100"]) == 1


def test_embed_dump(tmp_path, capsys):
    out = tmp_path / "emb.json"
    sdir = tmp_path / "summ"
    assert main(["embed-dump", *SYN, "--k", "3", "--out", str(out), "--summary-dir", str(sdir)]) == 0
    assert len(load_embeddings(out, 3, 1e-6)) == 8
    assert len(list(sdir.glob("*.csv"))) == 8
    assert main(["embed-dump", *SYN, "--k", "2"]) == 0
    assert len(json.loads(capsys.readouterr().out)["records"]) == 8


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        [],
        ["gram"],
        ["gram", "--synthetic", "bad"],
        ["gram", *SYN, "--k", "0"],
        ["gram", *SYN, "--dataset", "x", "--name", "y"],
    ],
)
def test_usage_errors(argv, monkeypatch):
    monkeypatch.delenv("POWERKERNEL_DATASET_ROOT", raising=False)
    assert main(argv) == 1


def test_data_errors(tmp_path):
    assert main(["gram", "--dataset", str(tmp_path), "--name", "MISSING", "--out", str(tmp_path)]) == 2
    write_tu(tmp_path, "BAD", [(1, 2), (2, 1)], [1, 1, 1], [0])
    assert main(["gram", "--dataset", str(tmp_path), "--name", "BAD", "--k", "2", "--ridge", "0", "--out", str(tmp_path)]) == 2
