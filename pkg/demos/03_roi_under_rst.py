"""The palm frame makes the ROI independent of rotation, scale and translation.

Run: python3 demos/03_roi_under_rst.py [out_dir]
"""
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from palmroi import imagecore, synth
from palmroi.pipeline import PipelineConfig, run_pipeline
from palmroi.roi import roi_similarity

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %%
# One hand, four poses.
base = synth.HandParams(texture_seed=11)
poses = [dict(), dict(rotation=90.0), dict(rotation=210.0, scale=0.7, translation=(40.0, -20.0)),
         dict(rotation=-30.0, scale=1.3, translation=(-30.0, 10.0))]
rois = []
for k, pose in enumerate(poses):
    img, _ = synth.generate_hand(replace(base, **pose), strict=False)
    roi, _, report = run_pipeline(img)
    f = report.frame
    print(f"pose {k}: origin {np.round(f['origin'], 1)}, x axis {np.round(f['x_axis'], 3)}, "
          f"scale {f['scale']:.1f}")
    imagecore.write_png(out / f"03_roi_{k}.png", roi.data)
    rois.append(roi)

# %%
# Normalised cross-correlation against the first pose.
for k, roi in enumerate(rois[1:], 1):
    print(f"pose 0 vs pose {k}: similarity {roi_similarity(rois[0], roi):.3f}")

# %%
# beta sets the window side, delta pushes it into the palm; both are in units of |K1K3|.
img, _ = synth.generate_hand(base)
for beta, delta in ((1.0, 0.6), (1.2, 0.8), (1.4, 1.0)):
    roi, _, report = run_pipeline(img, PipelineConfig(beta=beta, delta=delta))
    side = beta * report.frame["scale"]
    print(f"beta {beta} delta {delta}: window side {side:.1f} px, mean intensity {roi.data.mean():.1f}")
