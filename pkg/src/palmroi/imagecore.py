"""Raster helpers: Otsu thresholding, component cleanup and image I/O.

Images are plain numpy arrays. A gray image is a 2-D ``uint8`` array
indexed ``[row, col]``; a binary image is a 2-D ``bool`` array where True
marks hand foreground.
"""

from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import ConstantImage, NoForeground

POLARITIES = ("foreground-bright", "foreground-dark", "auto")
MIN_FOREGROUND_FRACTION = 0.01

_STRUCTURE = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


def as_gray(img):
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("gray image values must lie in 0..255")
        arr = arr.astype(np.uint8)
    return arr


def _otsu_score(n0, s0, total, total_sum):
    # between-class variance up to the positive factor 1 / total**2
    return Fraction((total * s0 - n0 * total_sum) ** 2, n0 * (total - n0))


def otsu_threshold(img):
    """Return the Otsu level ``t``; foreground/background split is {<=t, >t}.

    The float scan only shortlists near-maximal candidates, which are then
    compared in exact rational arithmetic so ties resolve to the smallest
    ``t`` regardless of rounding.
    """
    img = as_gray(img)
    hist = np.bincount(img.ravel(), minlength=256).astype(np.int64)
    if np.count_nonzero(hist) < 2:
        raise ConstantImage("all pixels have the same intensity")

    levels = np.arange(256, dtype=np.int64)
    n0 = np.cumsum(hist)
    s0 = np.cumsum(hist * levels)
    total = int(n0[-1])
    total_sum = int(s0[-1])

    valid = (n0 > 0) & (n0 < total)
    n0f = n0.astype(np.float64)
    num = (total * s0.astype(np.float64) - n0f * total_sum) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(valid, num / (n0f * (total - n0f)), -1.0)
    best = score.max()
    shortlist = np.flatnonzero(valid & (score >= best * (1 - 1e-9)))

    best_t, best_exact = None, None
    for t in shortlist:
        exact = _otsu_score(int(n0[t]), int(s0[t]), total, total_sum)
        if best_exact is None or exact > best_exact:
            best_t, best_exact = int(t), exact
    return best_t


def largest_component(mask, connectivity=8):
    """Keep only the maximal-area component of ``mask``.

    Ties go to the component whose first pixel comes earliest in raster
    scan order.
    """
    mask = np.asarray(mask, dtype=bool)
    if connectivity not in _STRUCTURE:
        raise ValueError("connectivity must be 4 or 8")
    labels, count = ndimage.label(mask, structure=_STRUCTURE[connectivity])
    if count == 0:
        return np.zeros_like(mask)
    flat = labels.ravel()
    areas = np.bincount(flat, minlength=count + 1)[1:]
    first_seen = np.full(count, flat.size, dtype=np.int64)
    ids, first = np.unique(flat, return_index=True)
    keep = ids > 0
    first_seen[ids[keep] - 1] = first[keep]
    candidates = np.flatnonzero(areas == areas.max())
    winner = candidates[np.argmin(first_seen[candidates])] + 1
    return labels == winner


def _border_pixels(mask):
    return np.concatenate([mask[0, :], mask[-1, :], mask[1:-1, 0], mask[1:-1, -1]])


def binarize(img, polarity="auto", threshold=None):
    """Segment the hand: Otsu split, single largest component, holes filled.

    ``auto`` treats the side owning most of the image border as background;
    when the border is split evenly the side with the larger principal
    component wins.
    """
    img = as_gray(img)
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}")
    t = otsu_threshold(img) if threshold is None else threshold
    bright = img > t

    if polarity == "foreground-bright":
        fg = bright
    elif polarity == "foreground-dark":
        fg = ~bright
    else:
        border = _border_pixels(bright)
        n_bright = int(border.sum())
        if 2 * n_bright < border.size:
            fg = bright
        elif 2 * n_bright > border.size:
            fg = ~bright
        else:
            area_bright = int(largest_component(bright).sum())
            area_dark = int(largest_component(~bright).sum())
            fg = bright if area_bright >= area_dark else ~bright

    fg = largest_component(fg, 8)
    fg = ndimage.binary_fill_holes(fg, structure=_STRUCTURE[4])
    if fg.sum() < MIN_FOREGROUND_FRACTION * fg.size:
        raise NoForeground(
            f"largest component covers {int(fg.sum())} of {fg.size} pixels (< 1%)"
        )
    return fg


def centroid(mask):
    """(x, y) centroid of the foreground pixels."""
    rows, cols = np.nonzero(mask)
    return float(cols.mean()), float(rows.mean())


def hand_scale(mask):
    """Extent of the foreground along its principal axis, in pixels.

    Unlike the axis-aligned bounding box this does not change when the hand
    rotates.
    """
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return 0.0
    pts = np.column_stack([cols, rows]).astype(np.float64)
    pts -= pts.mean(axis=0)
    if rows.size < 2:
        return 1.0
    _, vecs = np.linalg.eigh(pts.T @ pts)
    proj = pts @ vecs[:, -1]
    return float(proj.max() - proj.min() + 1.0)


def to_luma(rgb):
    rgb = np.asarray(rgb, dtype=np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def read_image(path):
    """Load an 8-bit PNG (gray or color) or binary PGM as a gray array."""
    with Image.open(Path(path)) as im:
        if im.mode == "L":
            return np.array(im, dtype=np.uint8)
        if im.mode == "1":
            return np.array(im, dtype=np.uint8) * 255
        if im.mode in ("I;16", "I;16B", "I"):
            raise ValueError(f"{path}: only 8-bit images are supported")
        rgb = np.array(im.convert("RGB"))
    return to_luma(rgb)


def write_png(path, img):
    arr = np.asarray(img)
    if arr.dtype == bool:
        Image.fromarray(arr).convert("1").save(path, format="PNG", optimize=False)
    else:
        Image.fromarray(arr.astype(np.uint8)).save(path, format="PNG", optimize=False)
