"""Strip-based polyline fitting, broken-line reconnection and length filtering."""

import heapq
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ChainTooShort

_EPS = 1e-9


@dataclass(frozen=True)
class LineSegment:
    """A straight piece of the contour.

    ``span`` is an inclusive ``(start, stop)`` index range into the source
    chain with ``stop >= start``; on closed chains indices are taken modulo
    ``chain_len`` so a span may run past the end and wrap.
    """

    p0: tuple
    p1: tuple
    span: tuple
    chain_len: int = 0
    closed: bool = False

    @property
    def length(self):
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    @property
    def direction(self):
        length = self.length
        return np.array([(self.p1[0] - self.p0[0]) / length, (self.p1[1] - self.p0[1]) / length])

    @property
    def midpoint(self):
        return np.array([(self.p0[0] + self.p1[0]) / 2, (self.p0[1] + self.p1[1]) / 2])

    def span_indices(self):
        idx = np.arange(self.span[0], self.span[1] + 1)
        return idx % self.chain_len if self.closed else idx

    def as_list(self):
        return [float(self.p0[0]), float(self.p0[1]), float(self.p1[0]), float(self.p1[1])]


def segments_to_json(segments):
    return json.dumps([s.as_list() for s in segments])


def point_line_distance(points, a, b):
    """Perpendicular distance of ``points`` from the infinite line through a, b."""
    points = np.asarray(points, dtype=np.float64)
    d = np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64)
    norm = math.hypot(d[0], d[1])
    rel = points - np.asarray(a, dtype=np.float64)
    if norm == 0:
        return np.hypot(rel[..., 0], rel[..., 1])
    return np.abs(rel[..., 0] * d[1] - rel[..., 1] * d[0]) / norm


def fit_polyline(chain, strip_halfwidth):
    """Split a contour into maximal straight runs.

    A run is grown from its first point while every point of the run stays
    within ``strip_halfwidth`` of the chord joining its first and last
    points; the chord becomes the segment. Consecutive runs share their
    boundary point. Closed chains are fitted around the full loop, so the
    last span ends back at index ``len(chain)`` (= 0).
    """
    points = np.asarray(chain.points, dtype=np.float64)
    n = len(points)
    if n < 2:
        raise ChainTooShort(f"chain has {n} point(s)")
    if strip_halfwidth <= 0:
        raise ValueError("strip_halfwidth must be positive")
    closed = bool(chain.closed)
    seq = np.vstack([points, points[:1]]) if closed else points
    last = len(seq) - 1
    tol = strip_halfwidth * (1 + _EPS)

    segments = []
    start = 0
    while start < last:
        end = start + 1
        while end < last:
            cand = end + 1
            a, b = seq[start], seq[cand]
            if a[0] == b[0] and a[1] == b[1]:
                break
            if point_line_distance(seq[start:cand + 1], a, b).max() > tol:
                break
            end = cand
        a, b = seq[start], seq[end]
        if a[0] != b[0] or a[1] != b[1]:
            segments.append(
                LineSegment(tuple(a.tolist()), tuple(b.tolist()), (start, end), n, closed)
            )
        start = end
    return segments


def _directed_angle(a, b):
    cos = float(np.clip(np.dot(a.direction, b.direction), -1.0, 1.0))
    return math.degrees(math.acos(cos))


def _nearest_gap(a, b):
    ends_a = (a.p0, a.p1)
    ends_b = (b.p0, b.p1)
    return min(math.dist(p, q) for p in ends_a for q in ends_b)


def can_merge(a, b, gap_max, angle_max, offset_max):
    """Pairwise merge predicate used by :func:`connect_broken`.

    Directions are compared as traversed along the chain, so the two sides of
    a narrow slot (which run in opposite directions) never merge.
    """
    if _nearest_gap(a, b) > gap_max:
        return False
    if _directed_angle(a, b) > angle_max:
        return False
    if point_line_distance([b.p0, b.p1], a.p0, a.p1).max() > offset_max:
        return False
    if point_line_distance([a.p0, a.p1], b.p0, b.p1).max() > offset_max:
        return False
    return True


def _merge_span(a, b):
    if not a.closed:
        return (min(a.span[0], b.span[0]), max(a.span[1], b.span[1]))
    n = a.chain_len
    best = None
    for first, second in ((a, b), (b, a)):
        s = first.span[0]
        reach = max(
            first.span[1] - s,
            (second.span[0] - s) % n + (second.span[1] - second.span[0]),
        )
        if best is None or reach < best[1] - best[0]:
            best = (s % n, s % n + reach)
    if best[1] - best[0] >= n:
        best = (best[0], best[0] + n - 1)
    return best


def merge_segments(a, b):
    """Join two segments into the one spanning their farthest endpoints."""
    ends = [a.p0, a.p1, b.p0, b.p1]
    best, pair = -1.0, None
    for i in range(4):
        for j in range(i + 1, 4):
            d = math.dist(ends[i], ends[j])
            if d > best:
                best, pair = d, (ends[i], ends[j])
    p, q = pair
    flow = a.direction * a.length + b.direction * b.length
    if (q[0] - p[0]) * flow[0] + (q[1] - p[1]) * flow[1] < 0:
        p, q = q, p
    return LineSegment(p, q, _merge_span(a, b), a.chain_len, a.closed)


def _order_key(seg):
    start = seg.span[0] % seg.chain_len if seg.closed else seg.span[0]
    return (start, seg.span[1] - seg.span[0], seg.p0, seg.p1)


def connect_broken(segments, gap_max=8.0, angle_max=10.0, offset_max=3.0):
    """Merge broken pieces of the same straight edge until nothing changes.

    Each round merges the mergeable pair with the smallest endpoint gap;
    the output is sorted along the chain.
    """
    alive = dict(enumerate(segments))
    next_id = len(alive)
    heap = []

    def push(i, j):
        a, b = alive[i], alive[j]
        if can_merge(a, b, gap_max, angle_max, offset_max):
            ka, kb = _order_key(a), _order_key(b)
            if kb < ka:
                i, j, ka, kb = j, i, kb, ka
            heapq.heappush(heap, (_nearest_gap(a, b), ka, kb, i, j))

    ids = list(alive)
    for x, i in enumerate(ids):
        for j in ids[x + 1:]:
            push(i, j)

    while heap:
        *_, i, j = heapq.heappop(heap)
        if i not in alive or j not in alive:
            continue
        merged = merge_segments(alive.pop(i), alive.pop(j))
        new_id = next_id
        next_id += 1
        others = list(alive)
        alive[new_id] = merged
        for k in others:
            push(k, new_id)
    return sorted(alive.values(), key=_order_key)


def filter_short(segments, min_length):
    if min_length < 0:
        raise ValueError("min_length must be >= 0")
    return [s for s in segments if s.length >= min_length]


def refine_segment(seg, chain, trim=0.2):
    """Re-fit ``seg`` as the total-least-squares line of its source span.

    A fraction ``trim`` of the span is dropped at each end, where the run
    usually starts on the curve it broke away from. The span is kept; the
    endpoints become the projections of the old endpoints onto the new line.
    """
    if not 0 <= trim < 0.5:
        raise ValueError("trim must lie in [0, 0.5)")
    idx = seg.span_indices()
    k = int(len(idx) * trim)
    if len(idx) - 2 * k >= 3:
        idx = idx[k:len(idx) - k]
    pts = np.asarray(chain.points, dtype=np.float64)[idx]
    if len(pts) < 2:
        return seg
    c = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - c)
    d = vt[0]
    if np.dot(d, seg.direction) < 0:
        d = -d
    p0 = c + np.dot(np.asarray(seg.p0) - c, d) * d
    p1 = c + np.dot(np.asarray(seg.p1) - c, d) * d
    if math.dist(p0, p1) == 0:
        return seg
    return replace(seg, p0=tuple(p0.tolist()), p1=tuple(p1.tolist()))


def default_strip_halfwidth(width, height):
    """2 px at 640x480, proportional to the image diagonal."""
    return 2.0 * math.hypot(width, height) / 800.0
