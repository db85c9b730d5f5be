import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from palmroi import synth  # noqa: E402
from palmroi.pipeline import run_stages  # noqa: E402


@pytest.fixture(scope="session")
def default_hand():
    """Default four-finger hand at the identity pose: (params, image, truth, stages)."""
    p = synth.HandParams()
    img, gt = synth.generate_hand(p)
    return p, img, gt, run_stages(img)


@pytest.fixture(scope="session")
def thumb_hand():
    p = synth.HandParams(fingers=(synth.DEFAULT_THUMB,) + synth.DEFAULT_FINGERS)
    img, gt = synth.generate_hand(p)
    return p, img, gt, run_stages(img)
