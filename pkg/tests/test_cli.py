import json

import numpy as np
import pytest

from alignscope.cli import run
from alignscope.store import ActivationSet

from conftest import DATA_DIR


@pytest.fixture
def fixture_dir(tmp_path):
    rc = run(
        [
            "fixture",
            "--out-dir", str(tmp_path / "fx"),
            "--samples", "2",
            "--layers", "2",
            "--dim", "16",
            "--text-len", "4",
            "--speech-len", "4",
            "--seed", "5",
        ]
    )
    assert rc == 0
    return tmp_path / "fx"


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 2


def test_missing_manifest_exits_1(tmp_path, capsys):
    assert run(["validate", "--manifest", str(tmp_path / "none.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_validate_ok(fixture_dir, capsys):
    assert run(["validate", "--manifest", str(fixture_dir / "manifest.json")]) == 0
    assert "ok: 2 sample(s)" in capsys.readouterr().out


def test_coarse_noise_free_fixture_all_ones(fixture_dir, tmp_path, capsys):
    out = tmp_path / "prof.csv"
    rc = run(
        [
            "coarse",
            "--manifest", str(fixture_dir / "manifest.json"),
            "--metric", "cos",
            "--out", str(out),
        ]
    )
    assert rc == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "sample_id,metric,layer,value"
    agg = [r for r in rows[1:] if r.startswith("AGGREGATE,cos")]
    assert len(agg) == 2
    assert all(r.endswith(",1.0") for r in agg)


def test_paths_and_dump(fixture_dir, tmp_path, capsys):
    stats = tmp_path / "stats.csv"
    dump = tmp_path / "paths.csv"
    rc = run(
        [
            "paths",
            "--manifest", str(fixture_dir / "manifest.json"),
            "--out", str(stats),
            "--dump-paths", str(dump),
        ]
    )
    assert rc == 0
    assert stats.read_text().splitlines()[0] == "sample_id,layer,metric,statistic,value"
    dump_rows = dump.read_text().splitlines()
    assert dump_rows[0] == "sample_id,layer,metric,j,i,value"
    # 2 samples x 2 layers x 2 metrics x 4 tokens
    assert len(dump_rows) == 1 + 2 * 2 * 2 * 4


def test_aps_fixture_accuracy(fixture_dir, capsys):
    rc = run(
        [
            "aps",
            "--manifest", str(fixture_dir / "manifest.json"),
            "--fixture-accuracy",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "aps_cos = 1.0" in out
    assert "path_accuracy_cos = 1.0" in out


def test_regress_prints_r_squared(tmp_path, capsys):
    scores = tmp_path / "s.csv"
    preds = tmp_path / "p.csv"
    scores.write_text(
        "checkpoint_id,group,text_score,speech_score\n"
        "c1,g,80.0,60.0\nc2,g,80.0,65.0\nc3,g,80.0,70.0\nc4,g,80.0,75.0\n"
    )
    # gap = 20,15,10,5; predictor chosen so gap = -10*x + 30 exactly
    preds.write_text(
        "checkpoint_id,predictor,value\nc1,fbar,1.0\nc2,fbar,1.5\nc3,fbar,2.0\nc4,fbar,2.5\n"
    )
    out = tmp_path / "fits.csv"
    rc = run(["regress", "--scores", str(scores), "--predictors", str(preds), "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "r_squared=1.0" in printed
    assert "slope=-10.0" in printed
    header = out.read_text().splitlines()[0]
    assert header == "predictor,group,slope,intercept,r_squared,n"


def test_regress_on_transcribed_table(tmp_path, capsys):
    preds = tmp_path / "p.csv"
    rows = ["checkpoint_id,predictor,value"]
    # synthetic predictor collinear with the stored gaps
    import csv as _csv

    with open(DATA_DIR / "alignment_experiment_scores.csv", newline="") as fh:
        for row in _csv.DictReader(fh):
            gap = float(row["gap"])
            rows.append(f"{row['checkpoint_id']},probe,{(30.0 - gap) / 10.0!r}")
    preds.write_text("\n".join(rows) + "\n")
    rc = run(
        [
            "regress",
            "--scores", str(DATA_DIR / "alignment_experiment_scores.csv"),
            "--predictors", str(preds),
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    for line in out.splitlines():
        assert "r_squared=1.0" in line or "r_squared=0.99999999" in line


def test_intervene_cli(fixture_dir, tmp_path, capsys):
    out_dir = tmp_path / "patched"
    plans = tmp_path / "plans.json"
    rc = run(
        [
            "intervene",
            "--manifest", str(fixture_dir / "manifest.json"),
            "--strategy", "bottom3",
            "--operator", "angle",
            "--out-dir", str(out_dir),
            "--plans", str(plans),
        ]
    )
    assert rc == 0
    new_set = ActivationSet.open(out_dir / "manifest.json")
    assert len(new_set) == 2
    assert all(new_set.manifest.entry(sid).stale for sid in new_set.ids())
    plan_doc = json.loads(plans.read_text())
    assert len(plan_doc) == 2
    assert all(p["strategy"] == "bottom3" for p in plan_doc)


def test_report_end_to_end(fixture_dir, tmp_path, capsys):
    out_dir = tmp_path / "report"
    rc = run(
        [
            "report",
            "--manifest", str(fixture_dir / "manifest.json"),
            "--out-dir", str(out_dir),
        ]
    )
    assert rc == 0
    names = {p.name for p in out_dir.iterdir()}
    assert {"coarse_profiles.csv", "alignment_stats.csv", "report.json",
            "profile_cos.svg", "profile_dist.svg"} <= names
    doc = json.loads((out_dir / "report.json").read_text())
    assert doc["alignment"]["aggregate"]["rho_cos"] == 1.0
    assert doc["metadata"]["profile_estimator"]


def test_pipeline_deterministic(tmp_path):
    def run_pipeline(root):
        fx = root / "fx"
        rep = root / "report"
        assert run(["fixture", "--out-dir", str(fx), "--samples", "3", "--layers", "2",
                    "--dim", "8", "--text-len", "3", "--speech-len", "6",
                    "--noise-sigma", "0.02", "--seed", "42"]) == 0
        assert run(["report", "--manifest", str(fx / "manifest.json"),
                    "--out-dir", str(rep), "--per-sample"]) == 0
        return {
            p.name: p.read_bytes() for p in sorted(rep.iterdir())
        }

    a = run_pipeline(tmp_path / "a")
    b = run_pipeline(tmp_path / "b")
    assert a == b


def test_threads_env_does_not_change_output(fixture_dir, tmp_path, monkeypatch):
    def run_report(threads, out):
        monkeypatch.setenv("ALIGNSCOPE_THREADS", threads)
        assert run(["report", "--manifest", str(fixture_dir / "manifest.json"),
                    "--out-dir", str(out), "--per-sample"]) == 0
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}

    serial = run_report("1", tmp_path / "serial")
    pooled = run_report("4", tmp_path / "pooled")
    assert serial == pooled
