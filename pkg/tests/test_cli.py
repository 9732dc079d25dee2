import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import DATA
from floorvec.cli import main, sample_seed
from floorvec.formats import read_fpt1, read_png, write_fpt1, write_png
from floorvec.svgio import load_model, serialize_model
from floorvec.synth import SynthConfig, generate


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "timing_ms"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _tree(root: Path):
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name.endswith("manifest.json"):
                data = _strip_timing(json.loads(data))
            out[str(p.relative_to(root))] = data
    return out


def _manifest(path):
    return json.loads(Path(path).read_text())


def test_vectorize_all_zero_inputs(tmp_path):
    write_png(tmp_path / "r.png", np.zeros((32, 40), np.uint8))
    write_png(tmp_path / "i.png", np.zeros((32, 40), np.uint8))
    write_fpt1(tmp_path / "h.fpt", np.zeros((21, 32, 40), np.float32))
    out = tmp_path / "m.json"
    code = main(["vectorize", "--rooms", str(tmp_path / "r.png"), "--icons",
                 str(tmp_path / "i.png"), "--heatmaps", str(tmp_path / "h.fpt"),
                 "--out", str(out)])
    assert code == 0
    m = load_model(out)
    assert m.image_size == (40, 32)
    assert not (m.walls or m.rooms or m.icons or m.openings)
    man = _manifest(f"{out}.manifest.json")
    assert man["command"] == "vectorize" and man["entries"][0]["status"] == "ok"


def test_synth_twice_identical(tmp_path):
    import shutil
    out = tmp_path / "dir"
    assert main(["synth", "--seed", "7", "--count", "3", "--out", str(out)]) == 0
    a = _tree(out)
    shutil.rmtree(out)
    assert main(["synth", "--seed", "7", "--count", "3", "--out", str(out)]) == 0
    b = _tree(out)
    assert len(a) == 3 * 5 + 1
    assert a == b


def test_synth_outputs_round_trip(tmp_path):
    assert main(["synth", "--seed", "3", "--count", "2", "--out", str(tmp_path / "s"),
                 "--jobs", "1"]) == 0
    m = load_model(tmp_path / "s" / "sample_0001.json")
    assert m == generate(SynthConfig(seed=sample_seed(3, 1)))
    assert load_model(tmp_path / "s" / "sample_0001.svg") == m
    vec = tmp_path / "v"
    assert main(["vectorize", "--input-dir", str(tmp_path / "s"), "--out", str(vec),
                 "--jobs", "2"]) == 0
    for k in range(2):
        assert load_model(vec / f"sample_{k:04d}.json") == load_model(
            tmp_path / "s" / f"sample_{k:04d}.json")
    man = _manifest(vec / "manifest.json")
    assert [Path(e["input"]).name for e in man["entries"]] == [
        "sample_0000.heatmaps.fpt", "sample_0001.heatmaps.fpt"]


def test_eval_segmentation_fixture(tmp_path):
    write_png(tmp_path / "p.png", np.array([[0, 0], [1, 1]], np.uint8))
    write_png(tmp_path / "g.png", np.array([[0, 1], [1, 1]], np.uint8))
    code = main(["eval-segmentation", "--pred", str(tmp_path / "p.png"), "--gt",
                 str(tmp_path / "g.png"), "--classes", "12", "--csv", str(tmp_path / "c.csv")])
    assert code == 0
    doc = json.loads((tmp_path / "p.segmentation.json").read_text())
    assert doc["overall_acc"] == 0.75
    assert abs(doc["mean_iou"] - 0.5833) < 1e-4
    assert doc["per_class_iou"][2] is None
    assert (tmp_path / "c.csv").read_text().splitlines()[1].startswith("Background,0.500000")


def test_eval_detection(tmp_path):
    gt = generate(SynthConfig(seed=4))
    (tmp_path / "gt.json").write_text(serialize_model(gt))
    (tmp_path / "empty.json").write_text(serialize_model(type(gt)(gt.image_size)))
    code = main(["eval-detection", "--pred", str(tmp_path / "gt.json"), str(tmp_path / "empty.json"),
                 "--gt", str(tmp_path / "gt.json"), str(tmp_path / "gt.json"),
                 "--out", str(tmp_path / "d.json"), "--csv", str(tmp_path / "d.csv")])
    assert code == 0
    doc = json.loads((tmp_path / "d.json").read_text())
    assert doc["summary"]["room"]["recall"] == 0.5 and doc["summary"]["room"]["acc"] == 1.0
    assert len(doc["files"]) == 2
    assert (tmp_path / "d.csv").read_text().startswith("category,acc,recall\n")


def test_parse_and_render(tmp_path):
    out = tmp_path / "g.json"
    assert main(["parse", "--input", os.path.join(DATA, "golden.svg"), "--out", str(out)]) == 0
    assert out.read_bytes() == Path(DATA, "golden.json").read_bytes()
    assert main(["render", "--model", str(out), "--out", str(tmp_path / "r"), "--jobs", "1"]) == 0
    assert (read_fpt1(tmp_path / "r" / "g.heatmaps.fpt").tobytes()
            == read_fpt1(os.path.join(DATA, "golden.heatmaps.fpt")).tobytes())
    assert np.array_equal(read_png(tmp_path / "r" / "g.rooms.png"),
                          read_png(os.path.join(DATA, "golden.rooms.png")))
    assert (tmp_path / "r" / "manifest.json").exists()


def test_partial_failure_continues(tmp_path):
    bad = tmp_path / "bad.svg"
    bad.write_text("<svg")
    outdir = tmp_path / "o"
    code = main(["parse", "--input", os.path.join(DATA, "golden.svg"), str(bad),
                 "--out", str(outdir), "--jobs", "1"])
    assert code == 1
    assert (outdir / "golden.json").exists()
    entries = _manifest(outdir / "manifest.json")["entries"]
    assert [e["status"] for e in entries] == ["ok", "error"]
    assert entries[1]["message"]


def test_missing_input_exit_1(tmp_path):
    assert main(["render", "--model", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1
    assert (tmp_path / "manifest.json").exists()


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["synth"], ["synth", "--out", "x", "--seed", "abc"],
    ["synth", "--out", "x", "--jobs", "0"], ["vectorize", "--out", "m.json"],
    ["eval-detection", "--pred", "a", "b", "--gt", "a"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("jobs = 1\n[synth]\nseed = 7\ncount = 2\n")
    assert main(["--config", str(cfg), "synth", "--out", str(tmp_path / "a")]) == 0
    man = _manifest(tmp_path / "a" / "manifest.json")
    assert man["config"]["seed"] == 7 and man["config"]["count"] == 2
    assert man["config_file_values"]["seed"] == 7
    # flags win over the file
    assert main(["synth", "--config", str(cfg), "--count", "1", "--out", str(tmp_path / "b")]) == 0
    assert len(_manifest(tmp_path / "b" / "manifest.json")["entries"]) == 1
    assert (tmp_path / "b" / "sample_0000.json").read_bytes() == (
        tmp_path / "a" / "sample_0000.json").read_bytes()


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[synth]\nbogus = 1\n")
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 2
    cfg.write_text("not toml [")
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 2


def test_stats(tmp_path):
    files = sorted(str(p) for p in Path(DATA, "corpus").glob("*.json"))
    assert main(["stats", "--input", *files, "--out", str(tmp_path / "s")]) == 0
    doc = json.loads((tmp_path / "s" / "stats.json").read_text())
    assert doc["totals"] == {"images": 5, "walls": 70, "rooms": 24, "icons": 11, "openings": 8}
    for name in ("totals", "room_classes", "icon_classes", "opening_classes", "histograms",
                 "resolutions"):
        assert (tmp_path / "s" / f"{name}.csv").exists()


def test_classes(tmp_path):
    out = tmp_path / "classes.json"
    assert main(["classes", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["rooms"]) == 12 and len(doc["icons"]) == 11 and len(doc["channels"]) == 21
    assert doc["rooms"][0] == {"code": 0, "name": "Background"}
    assert Path(f"{out}.manifest.json").exists()


def test_loss_check(tmp_path, capsys):
    out = tmp_path / "lc.json"
    assert main(["loss-check", "--instances", "10", "--out", str(out)]) == 0
    checks = json.loads(out.read_text())
    assert checks and all(c["pass"] for c in checks)
    assert "PASS" in capsys.readouterr().err


def test_loss_check_with_tensors(tmp_path):
    rng = np.random.default_rng(0)
    write_fpt1(tmp_path / "p.fpt", rng.random((21, 16, 16)).astype(np.float32))
    write_fpt1(tmp_path / "t.fpt", rng.random((21, 16, 16)).astype(np.float32))
    out = tmp_path / "lc.json"
    assert main(["loss-check", "--instances", "2", "--pred", str(tmp_path / "p.fpt"),
                 "--target", str(tmp_path / "t.fpt"), "--out", str(out)]) == 0
    names = [c["check"] for c in json.loads(out.read_text())]
    assert "directional check on input tensors" in names


def test_entry_point_subprocess(tmp_path):
    r = subprocess.run([sys.executable, "-m", "floorvec.cli", "classes", "--out",
                        str(tmp_path / "c.json")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "floorvec.cli", "nope"], capture_output=True,
                       text=True)
    assert r.returncode == 2 and "invalid choice" in r.stderr
