"""Finger-edge grouping and valley key-point location.

Orientation conventions follow the clockwise boundary trace in image
coordinates (y down): the hand interior lies on the side
``(-dy, dx)`` of every segment direction ``(dx, dy)``. For a finger the edge
nearer the thumb runs tip-ward and the far edge runs palm-ward, so the two
edges of one finger are anti-parallel and the two edges bounding a valley are
anti-parallel as well.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoValleyArc, TooFewFingers, TooFewValleys, WrongKeyPointCount


@dataclass(frozen=True)
class ParallelPair:
    left_edge: object
    right_edge: object
    axis: tuple  # unit vector pointing from palm to fingertip
    order_key: float
    separation: float


@dataclass(frozen=True)
class VShapePair:
    line_a: object  # right edge of finger i
    line_b: object  # left edge of finger i + 1
    kind: str  # "intersecting" or "parallel"


@dataclass(frozen=True)
class Line:
    point: tuple
    direction: tuple  # unit, pointing into the valley

    def signed_distance(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        dx, dy = self.direction
        rel = pts - np.asarray(self.point)
        return rel[..., 1] * dx - rel[..., 0] * dy


@dataclass(frozen=True)
class KeyPoint:
    position: tuple
    valley_index: int


def line_angle(a, b):
    """Unsigned angle in degrees between the supporting lines of two segments."""
    cos = abs(float(np.dot(a.direction, b.direction)))
    return math.degrees(math.acos(min(1.0, cos)))


def _normal(seg):
    d = seg.direction
    return np.array([-d[1], d[0]])


def _interval_overlap(base, other):
    """Fraction of the shorter segment covered when ``other`` is projected on ``base``."""
    u = base.direction
    origin = np.asarray(base.p0, dtype=np.float64)
    lo_b, hi_b = 0.0, base.length
    t = sorted(float(np.dot(np.asarray(p) - origin, u)) for p in (other.p0, other.p1))
    overlap = max(0.0, min(hi_b, t[1]) - max(lo_b, t[0]))
    return overlap / min(base.length, other.length)


def _mutual_separation(a, b):
    da = abs(float(np.dot(b.midpoint - np.asarray(a.p0), _normal(a))))
    db = abs(float(np.dot(a.midpoint - np.asarray(b.p0), _normal(b))))
    return 0.5 * (da + db)


def _segment_key(seg):
    return (seg.p0, seg.p1)


def is_finger_pair(a, b, angle_tol, width_lo, width_hi, overlap_min):
    """Geometric test for two segments being the two sides of one finger."""
    if line_angle(a, b) > angle_tol:
        return None
    if float(np.dot(a.direction, b.direction)) >= 0:
        return None
    # the hand interior must lie between the two edges
    if float(np.dot(b.midpoint - a.midpoint, _normal(a))) <= 0:
        return None
    if float(np.dot(a.midpoint - b.midpoint, _normal(b))) <= 0:
        return None
    sep = _mutual_separation(a, b)
    if not width_lo <= sep <= width_hi:
        return None
    if min(_interval_overlap(a, b), _interval_overlap(b, a)) < overlap_min:
        return None
    return sep


def pair_parallel(segments, hand_scale, centroid, angle_tol=8.0,
                  width_range=(0.04, 0.18), overlap_min=0.5):
    """Pair segments into fingers.

    Candidate pairs are accepted greedily by increasing separation, each
    segment joining at most one pair. Pair axes point away from the hand
    centroid; ``order_key`` ranks pairs across the hand perpendicular to the
    mean finger direction, so the order is tied to the hand, not the image.
    """
    if hand_scale <= 0:
        raise ValueError("hand_scale must be positive")
    lo, hi = width_range[0] * hand_scale, width_range[1] * hand_scale
    segs = sorted(segments, key=_segment_key)
    candidates = []
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            sep = is_finger_pair(segs[i], segs[j], angle_tol, lo, hi, overlap_min)
            if sep is not None:
                candidates.append((sep, i, j))
    candidates.sort()

    used = set()
    raw = []
    c = np.asarray(centroid, dtype=np.float64)
    for sep, i, j in candidates:
        if i in used or j in used:
            continue
        used.update((i, j))
        a, b = segs[i], segs[j]
        axis = a.direction - b.direction
        axis /= np.linalg.norm(axis)
        mid = 0.5 * (a.midpoint + b.midpoint)
        if np.dot(mid - c, axis) < 0:
            axis = -axis
        raw.append((a, b, axis, mid, sep))

    if not raw:
        return []
    mean = np.sum([r[2] for r in raw], axis=0)
    norm = np.linalg.norm(mean)
    mean = mean / norm if norm > 1e-12 else raw[0][2]
    across = np.array([-mean[1], mean[0]])

    pairs = []
    for a, b, axis, mid, sep in raw:
        if np.dot(a.midpoint, across) > np.dot(b.midpoint, across):
            a, b = b, a
        pairs.append(ParallelPair(a, b, (float(axis[0]), float(axis[1])),
                                  float(np.dot(mid, across)), float(sep)))
    pairs.sort(key=lambda p: p.order_key)
    return pairs


def form_vshapes(pairs, parallel_tol=3.0):
    """Adjacent-finger V-shapes: right edge of pair i with left edge of pair i+1."""
    if len(pairs) < 2:
        raise TooFewFingers(f"need at least 2 finger pairs, found {len(pairs)}")
    ordered = sorted(pairs, key=lambda p: p.order_key)
    out = []
    for left, right in zip(ordered, ordered[1:]):
        a, b = left.right_edge, right.left_edge
        kind = "parallel" if line_angle(a, b) <= parallel_tol else "intersecting"
        out.append(VShapePair(a, b, kind))
    return out


def _distal(v):
    # line_a runs palm-ward and line_b tip-ward along the clockwise trace
    u = v.line_b.direction - v.line_a.direction
    norm = np.linalg.norm(u)
    if norm < 1e-12:
        u = v.line_b.direction + v.line_a.direction
        norm = np.linalg.norm(u)
    return u / norm


def _intersect(p, d, q, e):
    m = np.array([[d[0], -e[0]], [d[1], -e[1]]])
    t = np.linalg.solve(m, np.asarray(q) - np.asarray(p))
    return np.asarray(p) + t[0] * np.asarray(d)


def _foot(point, seg):
    d = seg.direction
    base = np.asarray(seg.p0, dtype=np.float64)
    return base + np.dot(point - base, d) * d


def _proximal_end(seg, distal):
    p0, p1 = np.asarray(seg.p0, dtype=float), np.asarray(seg.p1, dtype=float)
    return p0 if np.dot(p0, distal) <= np.dot(p1, distal) else p1


def center_line(v):
    """Bisector (intersecting pair) or midline (parallel pair) of a valley.

    The returned direction points palm-ward, into the valley.
    """
    distal = _distal(v)
    a, b = v.line_a, v.line_b
    if v.kind == "intersecting":
        try:
            point = _intersect(a.p0, a.direction, b.p0, b.direction)
        except np.linalg.LinAlgError:
            point = None
        if point is not None:
            return Line(tuple(point.tolist()), tuple((-distal).tolist()))
    pa = _proximal_end(a, distal)
    pb = _proximal_end(b, distal)
    mid1 = 0.5 * (pa + _foot(pa, b))
    mid2 = 0.5 * (pb + _foot(pb, a))
    point = 0.5 * (mid1 + mid2)
    return Line(tuple(point.tolist()), tuple((-distal).tolist()))


def _span_middle(seg):
    return (seg.span[0] + seg.span[1]) // 2


def valley_arc(chain, v):
    """Chain indices from the middle of one valley edge to the middle of the other.

    Of the two ways round the closed contour the shorter one passes through
    the valley bottom.
    """
    n = len(chain)
    ma = _span_middle(v.line_a) % n
    mb = _span_middle(v.line_b) % n
    fwd = (mb - ma) % n
    back = (ma - mb) % n
    if fwd <= back:
        idx = (ma + np.arange(fwd + 1)) % n
    else:
        idx = (mb + np.arange(back + 1)) % n
    if len(idx) < 3:
        raise NoValleyArc("valley edges do not bound a contour arc")
    return idx


def locate_key_point(center, chain, v, valley_index=0):
    """Where the center line crosses the valley bottom, to sub-pixel precision."""
    idx = valley_arc(chain, v)
    pts = np.asarray(chain.points, dtype=np.float64)[idx]
    s = center.signed_distance(pts)

    crossings = np.flatnonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0)
    exact = np.flatnonzero(s == 0)
    if exact.size:
        best = exact[np.argmin(np.abs(s[exact]))]
        pos = pts[best]
    elif crossings.size:
        closeness = np.minimum(np.abs(s[crossings]), np.abs(s[crossings + 1]))
        k = crossings[np.argmin(closeness)]
        t = s[k] / (s[k] - s[k + 1])
        pos = pts[k] + t * (pts[k + 1] - pts[k])
    else:
        pos = pts[np.argmin(np.abs(s))]
    return KeyPoint((float(pos[0]), float(pos[1])), valley_index)


def triangle_height(p, q, r):
    """Distance of the middle vertex ``q`` from the line through ``p`` and ``r``."""
    p, q, r = (np.asarray(x, dtype=np.float64) for x in (p, q, r))
    d = r - p
    norm = math.hypot(d[0], d[1])
    if norm == 0:
        return float(np.linalg.norm(q - p))
    return abs(float(d[0] * (q - p)[1] - d[1] * (q - p)[0])) / norm


def select_main_keypoints(points):
    """Pick K1, K2, K3; with four valleys drop the one off the flatter triangle."""
    points = sorted(points, key=lambda k: k.valley_index)
    if len(points) < 3:
        raise TooFewValleys(f"need 3 or 4 valley key points, found {len(points)}")
    if len(points) > 4:
        raise WrongKeyPointCount(f"need 3 or 4 valley key points, found {len(points)}")
    if len(points) == 3:
        return tuple(points)
    pos = [k.position for k in points]
    first = triangle_height(pos[0], pos[1], pos[2])
    second = triangle_height(pos[1], pos[2], pos[3])
    return tuple(points[:3]) if first <= second else tuple(points[1:])
