import json
import os

import numpy as np
import pytest
from PIL import Image

from palmroi import cli, imagecore, synth
from palmroi.pipeline import STAGES, PipelineConfig


def _tree(root):
    """Relative path -> bytes for every file under root."""
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = os.path.join(dirpath, f)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    assert cli.main(["synth", "--out", str(d), "--seed", "4", "--count", "1"]) == cli.EXIT_OK
    return d


def test_synth_writes_manifest_and_truth(corpus):
    manifest = json.loads((corpus / "manifest.json").read_text())
    assert manifest["seed"] == 4
    names = [c["name"] for c in manifest["cases"]]
    assert names == ["open_000", "closed_000", "thumb_000"]
    for c in manifest["cases"]:
        truth = json.loads((corpus / c["truth"]).read_text())
        p = synth.HandParams.from_dict(truth["params"])
        img, _ = synth.generate_hand(p, manifest["width"], manifest["height"])
        assert np.array_equal(imagecore.read_image(corpus / c["image"]), img)


def test_extract_writes_every_output(corpus, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["extract", str(corpus), "--out", str(out)]) == cli.EXIT_OK
    for stem in ("open_000", "closed_000", "thumb_000"):
        report = json.loads((out / f"{stem}.report.json").read_text())
        assert report["status"] == "ok" and len(report["keypoints"]) == 3
        assert report["config"] == PipelineConfig().to_dict()
        assert "timings_ms" not in report
        assert imagecore.read_image(out / f"{stem}.roi.png").shape == (128, 128)
        assert (out / f"{stem}.lines.png").exists() and (out / f"{stem}.roi.json").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["images"] == 3 and summary["ok"] == 3 and summary["failed"] == []


def test_failed_image_gives_exit_2(tmp_path):
    imagecore.write_png(tmp_path / "blank.png", np.zeros((60, 80), dtype=np.uint8))
    (tmp_path / "junk.png").write_bytes(b"not a png")
    out = tmp_path / "out"
    assert cli.main(["extract", str(tmp_path / "blank.png"), str(tmp_path / "junk.png"),
                     "--out", str(out)]) == cli.EXIT_FAILED
    blank = json.loads((out / "blank.report.json").read_text())
    assert blank["stage"] == "binarize" and blank["error_code"] == "ConstantImage"
    assert not (out / "blank.roi.png").exists()
    junk = json.loads((out / "junk.report.json").read_text())
    assert junk["stage"] == "read"


def test_bad_config_gives_exit_3(corpus, tmp_path, monkeypatch):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"beta": -1}))
    out = str(tmp_path / "out")
    img = str(corpus / "open_000.png")
    assert cli.main(["extract", img, "--out", out, "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["extract", img, "--out", out, "--delta", "-2"]) == cli.EXIT_CONFIG
    assert cli.main(["extract", img, "--out", out, "--workers", "0"]) == cli.EXIT_CONFIG
    assert cli.main(["consistency", img, "--out", out, "--group-by", "("]) == cli.EXIT_CONFIG
    monkeypatch.setenv(cli.CONFIG_ENV, str(bad))
    assert cli.main(["extract", img, "--out", out]) == cli.EXIT_CONFIG


def test_env_config_and_flag_override(corpus, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"out_side": 64, "beta": 1.0}))
    monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
    out = tmp_path / "out"
    img = str(corpus / "open_000.png")
    assert cli.main(["extract", img, "--out", str(out), "--beta", "1.1"]) == cli.EXIT_OK
    report = json.loads((out / "open_000.report.json").read_text())
    assert report["config"]["out_side"] == 64 and report["config"]["beta"] == 1.1
    assert imagecore.read_image(out / "open_000.roi.png").shape == (64, 64)


def test_runs_are_byte_identical_and_worker_count_free(corpus, tmp_path):
    runs = []
    for name, workers in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / name
        cli.main(["extract", str(corpus), "--out", str(out), "--workers", workers])
        runs.append(_tree(out))
    assert runs[0] == runs[1] == runs[2]


def test_debug_writes_stage_overlays(corpus, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["debug", str(corpus / "thumb_000.png"), "--out", str(out)]) == cli.EXIT_OK
    ddir = out / "thumb_000.debug"
    pngs = {p.stem for p in ddir.glob("*.png")}
    assert {"binarize", "pair_parallel", "form_vshapes", "build_frame", "thin"} <= pngs
    assert pngs <= set(STAGES)
    geometry = json.loads((ddir / "geometry.json").read_text())
    assert len(geometry["key_points"]) == 4


def test_timings_flag(corpus, tmp_path):
    out = tmp_path / "out"
    cli.main(["extract", str(corpus / "open_000.png"), "--out", str(out), "--timings"])
    timings = json.loads((out / "open_000.report.json").read_text())["timings_ms"]
    assert set(timings) == set(STAGES) and min(timings.values()) >= 0


def test_consistency_groups_rst_variants(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    base = synth.HandParams(texture_seed=5)
    poses = [dict(), dict(rotation=60.0, scale=0.9), dict(rotation=200.0, translation=(20.0, 10.0))]
    for k, pose in enumerate(poses):
        img, _ = synth.generate_hand(synth.HandParams(texture_seed=5, **pose), strict=False)
        imagecore.write_png(src / f"hand5_{k}.png", img)
    img, _ = synth.generate_hand(base)
    imagecore.write_png(src / "other_0.png", img)
    out = tmp_path / "out"
    assert cli.main(["consistency", str(src), "--out", str(out)]) == cli.EXIT_OK
    report = json.loads((out / "consistency.json").read_text())
    assert set(report["groups"]) == {"hand5", "other"}
    g = report["groups"]["hand5"]
    assert len(g["pairs"]) == 3 and g["min"] >= 0.9
    assert report["groups"]["other"]["pairs"] == [] and report["groups"]["other"]["min"] is None


def test_list_file_and_pgm_input(corpus, tmp_path):
    img = imagecore.read_image(corpus / "open_000.png")
    Image.fromarray(img).save(tmp_path / "hand.pgm")
    listing = tmp_path / "inputs.txt"
    listing.write_text(f"{tmp_path / 'hand.pgm'}\n\n{corpus / 'open_000.png'}\n")
    out = tmp_path / "out"
    assert cli.main(["extract", f"@{listing}", "--out", str(out)]) == cli.EXIT_OK
    a = json.loads((out / "hand.report.json").read_text())
    b = json.loads((out / "open_000.report.json").read_text())
    assert a["keypoints"] == b["keypoints"]


def test_collect_inputs_sorts_and_dedupes(tmp_path):
    for n in ("b.png", "a.pgm", "c.txt"):
        (tmp_path / n).write_bytes(b"")
    got = cli.collect_inputs([str(tmp_path), str(tmp_path / "b.png")])
    assert [p.name for p in got] == ["a.pgm", "b.png"]
