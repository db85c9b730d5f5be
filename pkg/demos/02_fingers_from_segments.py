"""From a boundary chain to finger edge pairs and valley key points.

Run: python3 demos/02_fingers_from_segments.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from palmroi import overlay, synth
from palmroi.pipeline import run_stages

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %%
# A five-finger hand, rotated and shrunk, so the thumb adds a fourth valley.
p = synth.HandParams(fingers=(synth.DEFAULT_THUMB,) + synth.DEFAULT_FINGERS,
                     rotation=35.0, scale=0.9)
img, gt = synth.generate_hand(p)
res = run_stages(img)
print("status", res.report.status)

# %%
# Greedy strip fitting turns the chain into segments, close collinear pieces
# are merged, and short ones dropped; what survives is mostly finger edges.
print("segments: fitted", len(res.raw_segments), "merged", len(res.segments),
      "long", len(res.long_segments))

# %%
# Anti-parallel edges with the hand between them at a finger-like width pair up.
for k, pair in enumerate(res.pairs):
    print(f"finger {k}: width {pair.separation:5.1f} px, axis {np.round(pair.axis, 3)}")

# %%
# Neighbouring fingers form V shapes; each one's center line meets the contour
# at a valley. Closed fingers (parallel edges) use the midline instead.
for v in res.vshapes:
    print("v-shape", v.kind)
for k in res.valleys:
    print("valley", k.valley_index, np.round(k.position, 1))

# %%
# With four valleys the flatter triangle drops the thumb valley.
print("main key points", np.round([k.position for k in res.main], 1).tolist())
print("truth          ", np.round(gt.main_keypoints, 1).tolist())

for stage in ("fit_polyline", "pair_parallel", "form_vshapes", "select_main_keypoints"):
    overlay.stage_images(img, res)[stage].save(out / f"02_{stage}.png")
print("wrote overlays to", out)
