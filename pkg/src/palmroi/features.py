"""Principal-line map: box smoothing, directional line masks, threshold, thinning."""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

HORIZONTAL, VERTICAL, DIAGONAL_POS, DIAGONAL_NEG = 0, 1, 2, 3
AMBIGUOUS = -1

LINE_MASKS = np.array([
    [[-1, -1, -1], [2, 2, 2], [-1, -1, -1]],
    [[-1, 2, -1], [-1, 2, -1], [-1, 2, -1]],
    [[-1, -1, 2], [-1, 2, -1], [2, -1, -1]],
    [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]],
], dtype=np.int32)


@dataclass(frozen=True)
class LineResponse:
    value: np.ndarray  # signed response of the winning mask
    orientation: np.ndarray  # winning mask index, AMBIGUOUS on ties


@dataclass(frozen=True)
class LineFeatureMap:
    side: int
    data: np.ndarray
    threshold_used: float = None


def smooth(img):
    """3x3 box average with edge replication, rounded toward zero."""
    img = np.asarray(getattr(img, "data", img))
    padded = np.pad(img.astype(np.int32), 1, mode="edge")
    h, w = img.shape
    total = np.zeros((h, w), dtype=np.int32)
    for dy in range(3):
        for dx in range(3):
            total += padded[dy:dy + h, dx:dx + w]
    return (total // 9).astype(np.uint8)


def line_response(img):
    """Per-pixel strongest of the four 3x3 line masks.

    The value is the signed response of the mask with the largest absolute
    response; when several masks share that magnitude the orientation is
    reported as ``AMBIGUOUS`` and the value takes the positive sign if any
    of them is positive, which keeps it independent of mask order.
    """
    img = np.asarray(img).astype(np.int32)
    stack = np.stack([ndimage.correlate(img, m, mode="nearest") for m in LINE_MASKS])
    mag = np.abs(stack)
    peak = mag.max(axis=0)
    winner = np.argmax(mag, axis=0)
    ties = (mag == peak).sum(axis=0) > 1
    value = np.where((stack == peak).any(axis=0), peak, -peak)
    orientation = np.where(ties, AMBIGUOUS, winner).astype(np.int8)
    return LineResponse(value, orientation)


def response_level(resp, percentile, positive_only=False):
    values = np.asarray(getattr(resp, "value", resp)).ravel()
    if positive_only:
        values = values[values > 0]
    if values.size == 0:
        return None
    return float(np.percentile(values, percentile))


def threshold_map(resp, level=None, percentile=None, positive_only=False):
    """Binary map of responses at or above an absolute level or a percentile."""
    values = np.asarray(getattr(resp, "value", resp))
    if (level is None) == (percentile is None):
        raise ValueError("give exactly one of level or percentile")
    if percentile is not None:
        if not 0 < percentile < 100:
            raise ValueError("percentile must lie in (0, 100)")
        level = response_level(values, percentile, positive_only)
        if level is None:
            return np.zeros(values.shape, dtype=bool)
    out = values >= level
    if positive_only:
        out &= values > 0
    return out


# neighbour offsets P2..P9 (N, NE, E, SE, S, SW, W, NW) as (dy, dx)
_NEIGHBOURS = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def _zhang_suen_tables():
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    for code in range(256):
        p = [(code >> k) & 1 for k in range(8)]
        b = sum(p)
        a = sum(1 for k in range(8) if p[k] == 0 and p[(k + 1) % 8] == 1)
        if not (2 <= b <= 6 and a == 1):
            continue
        p2, p4, p6, p8 = p[0], p[2], p[4], p[6]
        first[code] = p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0
        second[code] = p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0
    return first, second


_ZS_TABLES = _zhang_suen_tables()


def _codes(padded):
    h, w = padded.shape[0] - 2, padded.shape[1] - 2
    code = np.zeros((h, w), dtype=np.int32)
    for k, (dy, dx) in enumerate(_NEIGHBOURS):
        code |= padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w].astype(np.int32) << k
    return code


def _code_at(padded, y, x):
    code = 0
    for k, (dy, dx) in enumerate(_NEIGHBOURS):
        code |= int(padded[y + dy, x + dx]) << k
    return code


def thin(mask, threshold_used=None):
    """Zhang-Suen thinning to a fixpoint.

    Each sub-iteration marks candidates in parallel as in the classic
    algorithm, then removes them in raster order, re-checking the deletion
    condition against pixels already removed. The re-check only admits
    simple points, so components never split or vanish (the parallel form
    erases 2x2 blocks entirely).
    """
    mask = np.asarray(getattr(mask, "data", mask), dtype=bool)
    padded = np.pad(mask, 1).astype(np.uint8)
    changed = True
    while changed:
        changed = False
        for table in _ZS_TABLES:
            inner = padded[1:-1, 1:-1]
            cand = (inner == 1) & table[_codes(padded)]
            for y, x in zip(*np.nonzero(cand)):
                if table[_code_at(padded, y + 1, x + 1)]:
                    padded[y + 1, x + 1] = 0
                    changed = True
    data = padded[1:-1, 1:-1].astype(bool)
    return LineFeatureMap(int(data.shape[0]), data, threshold_used)


def extract_line_features(roi, percentile=95.0):
    """Smooth, invert so dark creases respond positively, mask, threshold, thin."""
    smoothed = smooth(roi)
    resp = line_response(255 - smoothed.astype(np.int32))
    level = response_level(resp, percentile, positive_only=True)
    binary = threshold_map(resp, percentile=percentile, positive_only=True)
    return thin(binary, threshold_used=level)
