"""Generate a synthetic corpus with ground truth, then run the batch driver on it.

Run: python3 demos/05_corpus_and_cli.py [out_dir]
"""
import json
import sys
from pathlib import Path

import numpy as np

from palmroi import cli
from palmroi.pipeline import keypoint_error

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "05"

# %%
# Same as: palmroi synth --out <dir>/corpus --seed 1 --count 3
cli.main(["synth", "--out", str(out / "corpus"), "--seed", "1", "--count", "3"])
manifest = json.loads((out / "corpus" / "manifest.json").read_text())
print("cases", [c["name"] for c in manifest["cases"]])

# %%
# Same as: palmroi extract <dir>/corpus --out <dir>/results --workers 2
code = cli.main(["extract", str(out / "corpus"), "--out", str(out / "results"), "--workers", "2"])
print("exit code", code)

# %%
# Compare each report with the stored ground truth.
for c in manifest["cases"]:
    report = json.loads((out / "results" / f"{c['name']}.report.json").read_text())
    truth = json.loads((out / "corpus" / c["truth"]).read_text())["truth"]
    if report["status"] != "ok":
        print(c["name"], "failed at", report["stage"], report["error_code"])
        continue
    err = keypoint_error(report["keypoints"], truth["main_keypoints"])
    print(f"{c['name']}: key point error {err:.2f} px (hand scale {truth['hand_scale']:.0f})")

# %%
# Consistency mode groups files by a regex on the name and scores every pair.
cli.main(["consistency", str(out / "corpus"), "--out", str(out / "consistency"),
          "--group-by", r"^(open|closed|thumb)"])
report = json.loads((out / "consistency" / "consistency.json").read_text())
for key, g in report["groups"].items():
    # different hands, so these are low; the same hand in different poses scores near 1
    print(key, "pairs", len(g["pairs"]), "median similarity", np.round(g["median"], 3))
