"""Synthetic hand images with analytic ground truth.

Geometry lives in a canonical frame measured in units of the image height,
y pointing down, fingers pointing toward -y. The hand is a palm ellipse
joined to capsule fingers with circular fillets; the global rotation, scale
and translation map canonical points to pixels, and every ground-truth
quantity is pushed through the same map.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParams
from .imagecore import hand_scale

PIVOT_Y = -0.075
ROOT_DEPTH = 0.06
ANCHOR = (0.0, -0.095)


@dataclass(frozen=True)
class FingerParams:
    length: float  # pivot to tip-cap centre, image-height units
    width: float
    angle: float  # degrees from the palm's up axis, positive toward the little finger


DEFAULT_FINGERS = (
    FingerParams(0.200, 0.040, -9.0),   # index
    FingerParams(0.220, 0.042, -1.0),   # middle
    FingerParams(0.205, 0.039, 7.0),    # ring
    FingerParams(0.160, 0.034, 16.0),   # little
)
DEFAULT_THUMB = FingerParams(0.140, 0.048, -55.0)


@dataclass(frozen=True)
class HandParams:
    """Shape, pose and appearance of a synthetic hand.

    With five fingers the first entry is the thumb. ``translation`` is in
    pixels, ``rotation`` in degrees (clockwise on screen, since y points down).
    """

    fingers: tuple = DEFAULT_FINGERS
    palm_axes: tuple = (0.115, 0.125)
    rotation: float = 0.0
    scale: float = 1.0
    translation: tuple = (0.0, 0.0)
    noise_sigma: float = 0.0
    texture_seed: int = 0
    base_gap: float = 0.008
    fillet_radius: float = 0.006
    thumb_pivot: tuple = (-0.080, 0.030)
    background: float = 25.0
    skin: float = 200.0
    crease_depth: float = 70.0
    crease_width: float = 0.006

    @property
    def finger_count(self):
        return len(self.fingers)

    @property
    def has_thumb(self):
        return len(self.fingers) == 5

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["fingers"] = [[f.length, f.width, f.angle] for f in self.fingers]
        for k in ("palm_axes", "translation", "thumb_pivot"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["fingers"] = tuple(FingerParams(*map(float, f)) for f in d["fingers"])
        for k in ("palm_axes", "translation", "thumb_pivot"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass
class GroundTruth:
    valley_points: list  # image (x, y), ordered thumb side to little-finger side
    finger_edge_lines: list  # per finger: (left_edge, right_edge), each ((x0, y0), (x1, y1))
    finger_axes: list  # per finger: unit tip-ward direction in image coordinates
    silhouette: np.ndarray
    has_thumb: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def main_keypoints(self):
        return self.valley_points[1:] if self.has_thumb else self.valley_points

    @property
    def hand_scale(self):
        return hand_scale(self.silhouette)

    def to_dict(self):
        return {
            "valley_points": [list(p) for p in self.valley_points],
            "main_keypoints": [list(p) for p in self.main_keypoints],
            "finger_edge_lines": [[[list(p) for p in e] for e in pair]
                                  for pair in self.finger_edge_lines],
            "finger_axes": [list(a) for a in self.finger_axes],
            "has_thumb": self.has_thumb,
            "hand_scale": self.hand_scale,
        }


# -- canonical geometry ------------------------------------------------------

def _direction(angle_deg):
    t = math.radians(angle_deg)
    return np.array([math.sin(t), -math.cos(t)])


def _right_normal(angle_deg):
    t = math.radians(angle_deg)
    return np.array([math.cos(t), math.sin(t)])


def finger_layout(p):
    """Pivot, direction, half-width and length of each finger, thumb first."""
    main = p.fingers[1:] if p.has_thumb else p.fingers
    widths = [f.width for f in main]
    span = sum(widths) + p.base_gap * (len(main) - 1)
    x = -span / 2
    layout = []
    if p.has_thumb:
        t = p.fingers[0]
        layout.append((np.array(p.thumb_pivot, dtype=float), _direction(t.angle),
                       t.width / 2, t.length, t.angle))
    for f in main:
        cx = x + f.width / 2
        layout.append((np.array([cx, PIVOT_Y]), _direction(f.angle), f.width / 2,
                       f.length, f.angle))
        x += f.width + p.base_gap
    return layout


def validate(p, strict=True, width=640, height=480):
    if strict and p.finger_count not in (4, 5):
        raise InvalidParams("finger_count must be 4 or 5")
    if p.finger_count < 1:
        raise InvalidParams("need at least one finger")
    if p.scale <= 0:
        raise InvalidParams("scale must be positive")
    if min(p.palm_axes) <= 0:
        raise InvalidParams("palm axes must be positive")
    if any(f.length <= 0 or f.width <= 0 for f in p.fingers):
        raise InvalidParams("finger length and width must be positive")
    if p.noise_sigma < 0 or p.base_gap < 0 or p.fillet_radius < 0:
        raise InvalidParams("noise, gap and fillet must be non-negative")
    angles = [f.angle for f in p.fingers]
    if any(b < a for a, b in zip(angles, angles[1:])):
        raise InvalidParams("adjacent fingers must not cross (gap angles must be >= 0)")
    if strict:
        lo, hi = canonical_bounds(p)
        half_x = 0.25 * width / height
        if lo[0] < -half_x or hi[0] > half_x or lo[1] < -0.25 or hi[1] > 0.25:
            raise InvalidParams("hand does not fit inside a 25% margin of the frame")


def canonical_bounds(p):
    """Bounding box of the hand relative to the rotation anchor (height units)."""
    a, b = p.palm_axes
    xs = [-a, a]
    ys = [-b, b]
    for pivot, d, r, length, _ in finger_layout(p):
        tip = pivot + d * length
        xs += [tip[0] - r, tip[0] + r]
        ys += [tip[1] - r, tip[1] + r]
    return (np.array([min(xs), min(ys)]) - ANCHOR, np.array([max(xs), max(ys)]) - ANCHOR)


def _capsule(q, a, b, r):
    pa = q - a
    ba = b - a
    h = np.clip((pa @ ba) / (ba @ ba), 0.0, 1.0)
    d = pa - h[..., None] * ba
    return np.hypot(d[..., 0], d[..., 1]) - r


def _ellipse(q, axes):
    a, b = axes
    k0 = np.hypot(q[..., 0] / a, q[..., 1] / b)
    k1 = np.hypot(q[..., 0] / (a * a), q[..., 1] / (b * b))
    with np.errstate(divide="ignore", invalid="ignore"):
        d = k0 * (k0 - 1.0) / k1
    return np.where(k1 > 0, d, -min(a, b))


def _union_round(a, b, r):
    if r <= 0:
        return np.minimum(a, b)
    u = np.maximum(r - a, 0.0)
    v = np.maximum(r - b, 0.0)
    return np.maximum(r, np.minimum(a, b)) - np.hypot(u, v)


def hand_field(p, q):
    """Approximate signed distance (negative inside) at canonical points ``q``."""
    q = np.asarray(q, dtype=np.float64)
    palm = _ellipse(q, p.palm_axes)
    fingers = None
    for pivot, d, r, length, _ in finger_layout(p):
        f = _capsule(q, pivot - d * ROOT_DEPTH, pivot + d * length, r)
        fingers = f if fingers is None else np.minimum(fingers, f)
    return _union_round(palm, fingers, p.fillet_radius)


def _edge(pivot, d, r, angle, side):
    n = _right_normal(angle)
    return pivot + side * r * n, d


def valley_center_line(p, i):
    """Analytic center line between finger ``i`` and ``i + 1``: (point, distal dir)."""
    layout = finger_layout(p)
    pv_a, d_a, r_a, _, ang_a = layout[i]
    pv_b, d_b, r_b, _, ang_b = layout[i + 1]
    qa, _ = _edge(pv_a, d_a, r_a, ang_a, +1)
    qb, _ = _edge(pv_b, d_b, r_b, ang_b, -1)
    if abs(ang_a - ang_b) < 1e-12:
        return 0.5 * (qa + qb), d_a
    m = np.array([[d_a[0], -d_b[0]], [d_a[1], -d_b[1]]])
    t = np.linalg.solve(m, qb - qa)
    x = qa + t[0] * d_a
    u = d_a + d_b
    return x, u / np.linalg.norm(u)


def canonical_valley_point(p, i, step=5e-4):
    """First silhouette point met walking the center line from the gap toward the palm."""
    point, u = valley_center_line(p, i)
    layout = finger_layout(p)
    ref = 0.5 * (layout[i][0] + layout[i + 1][0])
    t_ref = float(np.dot(ref - point, u))
    ts = t_ref + np.arange(0.45, -0.35, -step)
    samples = point + ts[:, None] * u
    vals = hand_field(p, samples)
    inside = np.flatnonzero(vals < 0)
    if inside.size == 0 or inside[0] == 0:
        raise InvalidParams(f"valley {i} has no well-defined bottom")
    k = inside[0]
    lo, hi = ts[k], ts[k - 1]  # field(lo) < 0 <= field(hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if hand_field(p, (point + mid * u)[None])[0] < 0:
            lo = mid
        else:
            hi = mid
    return point + 0.5 * (lo + hi) * u


# -- pose ----------------------------------------------------------------------

def _rotation(deg):
    t = math.radians(deg)
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def to_image(p, q, width, height):
    """Map canonical points to pixel coordinates."""
    q = np.asarray(q, dtype=np.float64)
    centre = np.array([(width - 1) / 2 + p.translation[0], (height - 1) / 2 + p.translation[1]])
    rot = _rotation(p.rotation)
    return centre + p.scale * height * ((q - np.asarray(ANCHOR)) @ rot.T)


def to_canonical(p, xy, width, height):
    xy = np.asarray(xy, dtype=np.float64)
    centre = np.array([(width - 1) / 2 + p.translation[0], (height - 1) / 2 + p.translation[1]])
    rot = _rotation(p.rotation)
    return np.asarray(ANCHOR) + ((xy - centre) @ rot) / (p.scale * height)


def rotate_vector(p, v):
    return _rotation(p.rotation) @ np.asarray(v, dtype=np.float64)


# -- appearance ----------------------------------------------------------------

_CREASE_TEMPLATES = (
    ((-0.095, -0.075), (-0.02, -0.045), (0.095, -0.085)),  # distal transverse
    ((-0.095, -0.040), (-0.01, -0.030), (0.080, 0.010)),   # proximal transverse
    ((-0.070, -0.060), (-0.080, 0.030), (-0.030, 0.105)),  # thenar
    ((0.000, -0.020), (0.010, 0.030), (0.030, 0.090)),     # vertical
    ((0.030, -0.070), (0.050, -0.030), (0.080, -0.040)),
    ((-0.050, 0.040), (-0.010, 0.060), (0.040, 0.050)),
)


def _bezier(ctrl, n=16):
    t = np.linspace(0.0, 1.0, n)[:, None]
    c0, c1, c2 = (np.asarray(c) for c in ctrl)
    return (1 - t) ** 2 * c0 + 2 * (1 - t) * t * c1 + t ** 2 * c2


def crease_polylines(p):
    rng = np.random.default_rng([p.texture_seed, 1])
    curves = []
    for ctrl in _CREASE_TEMPLATES:
        jitter = rng.normal(0.0, 0.008, size=(3, 2))
        curves.append(_bezier(np.asarray(ctrl) + jitter))
    return curves


def _distance_to_polyline(q, poly):
    best = np.full(q.shape[0], np.inf)
    for a, b in zip(poly[:-1], poly[1:]):
        ba = b - a
        pa = q - a
        h = np.clip((pa @ ba) / (ba @ ba), 0.0, 1.0)
        d = pa - h[:, None] * ba
        best = np.minimum(best, d[:, 0] ** 2 + d[:, 1] ** 2)
    return np.sqrt(best)


def skin_texture(p, q):
    """Skin intensity at canonical points: linear shading plus dark creases."""
    a, b = p.palm_axes
    tone = p.skin + 10.0 * q[:, 0] / a - 8.0 * q[:, 1] / b
    palm = _ellipse(q, p.palm_axes)
    weight = np.clip((-palm - 0.006) / 0.012, 0.0, 1.0)
    sel = np.flatnonzero(weight > 0)
    if sel.size:
        qs = q[sel]
        depth = np.zeros(sel.size)
        sigma = p.crease_width
        for k, poly in enumerate(crease_polylines(p)):
            strength = 1.0 if k < 4 else 0.6
            d = _distance_to_polyline(qs, poly)
            depth = np.maximum(depth, strength * np.exp(-0.5 * (d / sigma) ** 2))
        tone[sel] -= p.crease_depth * depth * weight[sel]
    return tone


# -- rendering -----------------------------------------------------------------

def render(p, width, height):
    """Antialiased gray image and the exact silhouette mask (pixel centres)."""
    ys, xs = np.mgrid[0:height, 0:width]
    xy = np.column_stack([xs.ravel(), ys.ravel()]).astype(np.float64)
    q = to_canonical(p, xy, width, height)
    f = hand_field(p, q)
    dist_px = f * p.scale * height
    coverage = np.clip(0.5 - dist_px, 0.0, 1.0)
    img = np.full(xy.shape[0], float(p.background))
    hit = np.flatnonzero(coverage > 0)
    if hit.size:
        tone = skin_texture(p, q[hit])
        img[hit] = p.background + coverage[hit] * (tone - p.background)
    if p.noise_sigma > 0:
        rng = np.random.default_rng([p.texture_seed, 2])
        img += rng.normal(0.0, p.noise_sigma, size=img.shape)
    img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8).reshape(height, width)
    silhouette = (f < 0).reshape(height, width)
    return img, silhouette


def ground_truth(p, width, height, silhouette=None):
    layout = finger_layout(p)
    valleys = []
    for i in range(len(layout) - 1):
        c = canonical_valley_point(p, i)
        valleys.append(tuple(float(v) for v in to_image(p, c, width, height)))
    edges, axes = [], []
    for pivot, d, r, length, angle in layout:
        n = _right_normal(angle)
        pair = []
        for side in (-1, +1):
            e0 = pivot + side * r * n
            e1 = e0 + d * length
            img_pts = to_image(p, np.array([e0, e1]), width, height)
            pair.append(tuple(tuple(float(v) for v in pt) for pt in img_pts))
        edges.append(tuple(pair))
        axes.append(tuple(float(v) for v in rotate_vector(p, d)))
    if silhouette is None:
        _, silhouette = render(p, width, height)
    return GroundTruth(valleys, edges, axes, silhouette, p.has_thumb)


def generate_hand(p, width=640, height=480, strict=True):
    """Render ``p`` and return ``(image, ground_truth)``."""
    validate(p, strict=strict, width=width, height=height)
    img, silhouette = render(p, width, height)
    return img, ground_truth(p, width, height, silhouette)


# -- random poses and gestures -------------------------------------------------

def random_pose(rng, width=640, height=480, scale_range=(0.6, 1.4), shift=0.15):
    return {
        "rotation": float(rng.uniform(0.0, 360.0)),
        "scale": float(rng.uniform(*scale_range)),
        "translation": (float(rng.uniform(-shift, shift) * width),
                        float(rng.uniform(-shift, shift) * height)),
    }


def _jitter_fingers(rng, fingers, gaps, start_angle):
    out = []
    angle = start_angle
    for k, f in enumerate(fingers):
        if k > 0:
            angle += gaps[k - 1]
        out.append(FingerParams(f.length * rng.uniform(0.93, 1.07),
                                f.width * rng.uniform(0.95, 1.05), float(angle)))
    return out


def random_hand(rng, gesture="open", pose=True, width=640, height=480,
                scale_range=(0.6, 1.4), shift=0.15, noise_sigma=0.0):
    """Random hand of one of the gesture classes.

    ``open``: four fingers, comfortable spreads. ``spread``: four fingers
    with anything from nearly closed to wide. ``closed``: at least one pair of
    adjacent fingers held parallel (gap angle <= 2 deg). ``thumb``: an open
    hand with the thumb visible.
    """
    if gesture == "open":
        gaps = rng.uniform(5.0, 14.0, size=3)
    elif gesture == "spread":
        gaps = rng.uniform(2.0, 20.0, size=3)
    elif gesture == "closed":
        gaps = rng.uniform(4.0, 12.0, size=3)
        closed = rng.choice(3, size=int(rng.integers(1, 4)), replace=False)
        gaps[closed] = rng.uniform(0.0, 2.0, size=closed.size)
    elif gesture == "thumb":
        gaps = rng.uniform(5.0, 14.0, size=3)
    else:
        raise ValueError(f"unknown gesture {gesture!r}")
    start = -float(np.sum(gaps[:2])) + rng.uniform(-4.0, 4.0) + gaps[1] / 2
    fingers = _jitter_fingers(rng, DEFAULT_FINGERS, gaps, start)
    if gesture == "thumb":
        t = DEFAULT_THUMB
        thumb = FingerParams(t.length * rng.uniform(0.93, 1.07), t.width * rng.uniform(0.95, 1.05),
                             float(fingers[0].angle - rng.uniform(38.0, 55.0)))
        fingers = [thumb] + fingers
    params = HandParams(fingers=tuple(fingers), texture_seed=int(rng.integers(0, 2**31)),
                        noise_sigma=noise_sigma)
    if pose:
        params = replace(params, **random_pose(rng, width, height, scale_range, shift))
    return params
