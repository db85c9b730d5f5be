"""Palm coordinate frame, square ROI sampling and ROI similarity."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateFrame, RoiOutOfImage, SideMismatch

MIN_FRAME_SCALE = 4.0
MAX_OUTSIDE_FRACTION = 0.25


@dataclass(frozen=True)
class PalmFrame:
    origin: tuple
    x_axis: tuple  # into the palm, away from the fingers
    y_axis: tuple  # K1 -> K3
    scale: float  # |K1 K3| in pixels

    def to_image(self, u, v):
        """Image coordinates of frame coordinates (u along x_axis, v along y_axis)."""
        ox, oy = self.origin
        return (ox + u * self.x_axis[0] + v * self.y_axis[0],
                oy + u * self.x_axis[1] + v * self.y_axis[1])

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass(frozen=True)
class RoiImage:
    side: int
    data: np.ndarray
    frame: PalmFrame
    beta: float
    delta: float
    outside_fraction: float

    @property
    def out_of_bounds(self):
        return self.outside_fraction > 0

    def provenance(self):
        return {
            "frame": self.frame.to_dict(),
            "beta": self.beta,
            "delta": self.delta,
            "side": self.side,
            "out_of_bounds": self.out_of_bounds,
            "outside_fraction": self.outside_fraction,
        }


def _xy(p):
    return np.asarray(getattr(p, "position", p), dtype=np.float64)


def build_frame(k1, k2, k3, hand_centroid):
    """Frame with origin at mid(K1, K3) and y axis along K1 -> K3.

    K2 does not enter the construction; it is accepted so callers can pass
    the selected triple unchanged. The x axis is the perpendicular that
    points toward the hand centroid.
    """
    p1, p3 = _xy(k1), _xy(k3)
    d = p3 - p1
    scale = math.hypot(d[0], d[1])
    if scale < MIN_FRAME_SCALE:
        raise DegenerateFrame(f"|K1K3| = {scale:.2f} px is below {MIN_FRAME_SCALE} px")
    y_axis = d / scale
    origin = 0.5 * (p1 + p3)
    x_axis = np.array([-y_axis[1], y_axis[0]])
    if np.dot(np.asarray(hand_centroid, dtype=np.float64) - origin, x_axis) < 0:
        x_axis = -x_axis
    return PalmFrame(tuple(origin.tolist()), tuple(x_axis.tolist()),
                     tuple(y_axis.tolist()), float(scale))


def bilinear_sample(img, xs, ys):
    """Sample ``img`` at float pixel coordinates; outside points give 0.

    Returns the samples and a mask of points that fell outside
    ``[0, w-1] x [0, h-1]``.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    outside = (xs < 0) | (xs > w - 1) | (ys < 0) | (ys > h - 1)
    xc = np.clip(xs, 0, w - 1)
    yc = np.clip(ys, 0, h - 1)
    x0 = np.minimum(np.floor(xc).astype(np.int64), max(w - 2, 0))
    y0 = np.minimum(np.floor(yc).astype(np.int64), max(h - 2, 0))
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xc - x0
    fy = yc - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bottom = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    out[outside] = 0.0
    return out, outside


def roi_grid(frame, beta, delta, out_side):
    """Image coordinates of the ROI pixel centres.

    Rows advance along the frame x axis (from the fingers into the palm),
    columns along the y axis (K1 toward K3).
    """
    side = beta * frame.scale
    centre_u = delta * frame.scale
    steps = (np.arange(out_side) + 0.5) / out_side - 0.5
    u = centre_u + side * steps[:, None]
    v = side * steps[None, :]
    xs, ys = frame.to_image(u, v)
    return np.broadcast_to(xs, (out_side, out_side)), np.broadcast_to(ys, (out_side, out_side))


def extract_roi(img, frame, beta=1.2, delta=0.8, out_side=128):
    if beta <= 0:
        raise ValueError("beta must be positive")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if out_side < 16:
        raise ValueError("out_side must be at least 16")
    xs, ys = roi_grid(frame, beta, delta, out_side)
    values, outside = bilinear_sample(img, xs, ys)
    frac = float(outside.mean())
    if frac > MAX_OUTSIDE_FRACTION:
        raise RoiOutOfImage(f"{frac:.1%} of the ROI lies outside the image")
    data = np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)
    return RoiImage(int(out_side), data, frame, float(beta), float(delta), frac)


def roi_similarity(a, b):
    """Zero-mean normalized cross-correlation of two equally sized ROIs."""
    da = np.asarray(getattr(a, "data", a), dtype=np.float64)
    db = np.asarray(getattr(b, "data", b), dtype=np.float64)
    if da.shape != db.shape:
        raise SideMismatch(f"ROI sides differ: {da.shape} vs {db.shape}")
    za = da - da.mean()
    zb = db - db.mean()
    na = math.sqrt(float(np.sum(za * za)))
    nb = math.sqrt(float(np.sum(zb * zb)))
    if na == 0 or nb == 0:
        return 1.0 if np.array_equal(da, db) else 0.0
    return float(np.clip(np.sum(za * zb) / (na * nb), -1.0, 1.0))
