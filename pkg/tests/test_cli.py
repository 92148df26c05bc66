from __future__ import annotations

import json

import pytest

from ragstack.cli import main


@pytest.fixture
def corpus_env(tmp_path):
    docs = tmp_path / "docs"
    docs.mkdir()
    (docs / "a.txt").write_text("alpha trade report " + " ".join(f"w{i}" for i in range(60)))
    (docs / "b.txt").write_text("beta tariff survey " + " ".join(f"v{i}" for i in range(60)))
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text(
        json.dumps({"id": "a", "path": "docs/a.txt", "year": 2020})
        + "\n"
        + json.dumps({"id": "b", "path": "docs/b.txt", "year": 2021})
        + "\n"
    )
    data_dir = tmp_path / "data"
    return tmp_path, manifest, data_dir


def test_ingest_vectorize_query_roundtrip(corpus_env, capsys):
    tmp_path, manifest, data_dir = corpus_env
    assert (
        main(
            [
                "ingest",
                "--corpus",
                "trade",
                "--manifest",
                str(manifest),
                "--data-dir",
                str(data_dir),
            ]
        )
        == 0
    )
    out = capsys.readouterr().out
    assert "added 2 document(s)" in out

    assert (
        main(
            [
                "vectorize",
                "--corpus",
                "trade",
                "--data-dir",
                str(data_dir),
                "--chunk-size",
                "16",
                "--overlap",
                "4",
            ]
        )
        == 0
    )
    out = capsys.readouterr().out
    assert "vectorized corpus 'trade'" in out

    assert (
        main(
            [
                "query",
                "--corpus",
                "trade",
                "--text",
                "alpha trade report",
                "--top-n",
                "2",
                "--data-dir",
                str(data_dir),
            ]
        )
        == 0
    )
    out = capsys.readouterr().out
    # Answer first, then the sources block.
    assert out.startswith("Based on ")
    assert "Sources:" in out
    assert "score=" in out
    assert '"year": 2020' in out


def test_ingest_reports_failures_nonzero_exit(corpus_env, capsys):
    tmp_path, manifest, data_dir = corpus_env
    manifest.write_text(json.dumps({"id": "x", "path": "docs/missing.txt"}) + "\n")
    code = main(
        ["ingest", "--corpus", "trade", "--manifest", str(manifest), "--data-dir", str(data_dir)]
    )
    assert code == 1
    assert "error: x" in capsys.readouterr().out


def test_query_before_vectorize_fails_cleanly(corpus_env, capsys):
    tmp_path, manifest, data_dir = corpus_env
    main(["ingest", "--corpus", "t", "--manifest", str(manifest), "--data-dir", str(data_dir)])
    capsys.readouterr()
    code = main(["query", "--corpus", "t", "--text", "hi", "--data-dir", str(data_dir)])
    assert code == 2
    assert "vectorize" in capsys.readouterr().err


def test_eval_writes_reports(tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code = main(
        [
            "eval",
            "--docs",
            "6",
            "--doc-tokens",
            "80",
            "--needles",
            "4",
            "--chunk-sizes",
            "24,48",
            "--overlaps",
            "0,6",
            "--top-ns",
            "1,2",
            "--seed",
            "9",
            "--embed-dim",
            "256",
            "--out",
            str(out_csv),
        ]
    )
    assert code == 0
    assert out_csv.exists()
    assert out_csv.with_suffix(".json").exists()
    stdout = capsys.readouterr().out
    assert "wrote 8 row(s)" in stdout
    assert "best recall@n" in stdout


def test_eval_rejects_bad_grid(tmp_path, capsys):
    code = main(
        [
            "eval",
            "--chunk-sizes",
            "16",
            "--overlaps",
            "16",
            "--out",
            str(tmp_path / "r.csv"),
        ]
    )
    assert code != 0
