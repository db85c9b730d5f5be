"""Principal-line map from a palm ROI.

Run: python3 demos/04_line_features.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from palmroi import imagecore, synth
from palmroi.features import (AMBIGUOUS, DIAGONAL_NEG, DIAGONAL_POS, HORIZONTAL, VERTICAL,
                              line_response, smooth, thin, threshold_map)
from palmroi.pipeline import run_pipeline

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

roi, lines, _ = run_pipeline(synth.generate_hand(synth.HandParams(texture_seed=2))[0])

# %%
# Creases are darker than skin, so after a 3x3 box blur they give strong
# responses to the line mask along their direction.
blurred = smooth(roi.data)
resp = line_response(255 - blurred.astype(np.int32))
names = {HORIZONTAL: "horizontal", VERTICAL: "vertical", DIAGONAL_POS: "diagonal /",
         DIAGONAL_NEG: "diagonal \\", AMBIGUOUS: "ambiguous"}
for k, name in names.items():
    print(f"{name:11s} {np.mean(resp.orientation == k):6.1%}")

# %%
# Keep the top 5% of the positive responses and thin them to one-pixel curves.
binary = threshold_map(resp, percentile=95.0, positive_only=True)
skeleton = thin(binary).data
print("thresholded pixels", int(binary.sum()), "after thinning", int(skeleton.sum()))

# %%
# The pipeline does the same in one call; its map is what the CLI writes as <stem>.lines.png.
print("pipeline line map pixels", int(lines.data.sum()), "threshold", lines.threshold_used,
      "same as above:", bool(np.array_equal(lines.data, skeleton)))
imagecore.write_png(out / "04_roi.png", roi.data)
imagecore.write_png(out / "04_lines.png", lines.data.astype(np.uint8) * 255)
print("wrote", out / "04_roi.png", "and", out / "04_lines.png")
