"""Per-stage debug overlays drawn with Pillow."""

import numpy as np
from PIL import Image, ImageDraw

# one colour per V-shape pair; both lines of a pair share it
PALETTE = ((230, 25, 75), (60, 180, 75), (0, 130, 200), (245, 130, 48),
           (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60))
EDGE = (255, 220, 0)
KEY = (255, 0, 0)
CENTER = (0, 255, 255)


def _base(img):
    img = np.asarray(img)
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    return Image.fromarray(img.astype(np.uint8)).convert("RGB")


def _line(draw, seg, colour, width=2):
    draw.line([tuple(seg.p0), tuple(seg.p1)], fill=colour, width=width)


def _cross(draw, xy, colour, r=4):
    x, y = xy
    draw.line([(x - r, y - r), (x + r, y + r)], fill=colour, width=2)
    draw.line([(x - r, y + r), (x + r, y - r)], fill=colour, width=2)


def _segments(img, segments):
    im = _base(img)
    d = ImageDraw.Draw(im)
    for k, s in enumerate(segments):
        _line(d, s, PALETTE[k % len(PALETTE)])
    return im


def _frame_square(frame, beta, delta):
    side = beta * frame.scale
    u0 = delta * frame.scale
    corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
    return [frame.to_image(u0 + side * a, side * b) for a, b in corners]


def stage_images(img, res):
    """Overlay image for every stage the pipeline completed, keyed by stage name."""
    out = {}
    if res.mask is not None:
        out["binarize"] = _base(res.mask)
    if res.chain is not None:
        im = _base(img)
        pts = [tuple(p) for p in res.chain.points.tolist()]
        if len(pts) > 1:
            ImageDraw.Draw(im).line(pts + pts[:1], fill=EDGE, width=1)
        out["trace_boundary"] = im
    if res.raw_segments is not None:
        out["fit_polyline"] = _segments(img, res.raw_segments)
    if res.segments is not None:
        out["connect_broken"] = _segments(img, res.segments)
    if res.long_segments is not None:
        out["filter_short"] = _segments(img, res.long_segments)
    if res.pairs is not None:
        im = _base(img)
        d = ImageDraw.Draw(im)
        for k, p in enumerate(res.pairs):
            c = PALETTE[k % len(PALETTE)]
            _line(d, p.left_edge, c)
            _line(d, p.right_edge, c)
        out["pair_parallel"] = im
    if res.vshapes is not None:
        im = _base(img)
        d = ImageDraw.Draw(im)
        for k, v in enumerate(res.vshapes):
            c = PALETTE[k % len(PALETTE)]
            _line(d, v.line_a, c)
            _line(d, v.line_b, c)
        out["form_vshapes"] = im
    if res.centers is not None:
        im = out["form_vshapes"].copy()
        d = ImageDraw.Draw(im)
        reach = 0.3 * (res.hand_scale or 100.0)
        for c in res.centers:
            p = np.asarray(c.point)
            q = p + reach * np.asarray(c.direction)
            d.line([tuple(p), tuple(q)], fill=CENTER, width=1)
        out["center_line"] = im
    if res.valleys is not None:
        im = out["center_line"].copy()
        d = ImageDraw.Draw(im)
        for k in res.valleys:
            _cross(d, k.position, KEY)
        out["locate_key_point"] = im
    if res.main is not None:
        im = _base(img)
        d = ImageDraw.Draw(im)
        pts = [tuple(k.position) for k in res.main]
        d.line(pts, fill=EDGE, width=1)
        for p in pts:
            _cross(d, p, KEY)
        out["select_main_keypoints"] = im
    if res.frame is not None:
        im = out["select_main_keypoints"].copy()
        d = ImageDraw.Draw(im)
        cfg = res.report.config
        sq = _frame_square(res.frame, cfg["beta"], cfg["delta"])
        d.polygon(sq, outline=CENTER)
        o = np.asarray(res.frame.origin)
        r = 0.5 * res.frame.scale
        d.line([tuple(o), tuple(o + r * np.asarray(res.frame.x_axis))], fill=(255, 0, 0), width=2)
        d.line([tuple(o), tuple(o + r * np.asarray(res.frame.y_axis))], fill=(0, 255, 0), width=2)
        out["build_frame"] = im
    if res.roi is not None:
        out["extract_roi"] = _base(res.roi.data)
    if res.binary_lines is not None:
        out["threshold_map"] = _base(res.binary_lines)
    if res.lines is not None:
        out["thin"] = _base(res.lines.data)
    return out


def debug_json(res):
    """Pairs, V-shapes, center lines and key points as plain JSON-ready data."""
    seg = lambda s: s.as_list()  # noqa: E731
    return {
        "segments": [seg(s) for s in res.long_segments or []],
        "pairs": [{"left": seg(p.left_edge), "right": seg(p.right_edge), "axis": list(p.axis),
                   "separation": p.separation} for p in res.pairs or []],
        "vshapes": [{"a": seg(v.line_a), "b": seg(v.line_b), "kind": v.kind}
                    for v in res.vshapes or []],
        "center_lines": [{"point": list(c.point), "direction": list(c.direction)}
                         for c in res.centers or []],
        "key_points": [list(k.position) for k in res.valleys or []],
    }
