"""End-to-end extraction: image -> key points -> ROI -> line map."""

import json
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import contour, features, grouping, imagecore, polyline, roi
from .errors import ConfigError, PalmRoiError

STAGES = (
    "binarize", "trace_boundary", "fit_polyline", "connect_broken", "filter_short",
    "pair_parallel", "form_vshapes", "center_line", "locate_key_point",
    "select_main_keypoints", "build_frame", "extract_roi", "smooth",
    "line_response", "threshold_map", "thin",
)

ORIENTATIONS = ("fingers", "centroid")


@dataclass
class PipelineConfig:
    polarity: str = "auto"
    strip_halfwidth: float = None  # None: 2 px at 640x480, scaled with the diagonal
    gap_max: float = 8.0
    angle_max: float = 10.0
    offset_max: float = 3.0
    min_length_fraction: float = 0.12
    refine_edges: bool = True
    refine_trim: float = 0.2
    pair_angle_tol: float = 8.0
    width_range: tuple = (0.04, 0.18)
    overlap_min: float = 0.5
    vshape_parallel_tol: float = 3.0
    orient_by: str = "fingers"  # or "centroid"
    beta: float = 1.2
    delta: float = 0.8
    out_side: int = 128
    feature_percentile: float = 95.0

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.polarity in imagecore.POLARITIES, f"polarity must be one of {imagecore.POLARITIES}")
        need(self.strip_halfwidth is None or self.strip_halfwidth > 0, "strip_halfwidth must be > 0")
        need(self.gap_max >= 0 and self.offset_max >= 0, "gap_max and offset_max must be >= 0")
        need(0 <= self.angle_max <= 90, "angle_max must lie in [0, 90]")
        need(0 <= self.min_length_fraction < 1, "min_length_fraction must lie in [0, 1)")
        need(isinstance(self.refine_edges, bool), "refine_edges must be true or false")
        need(0 <= self.refine_trim < 0.5, "refine_trim must lie in [0, 0.5)")
        need(0 < self.pair_angle_tol <= 90, "pair_angle_tol must lie in (0, 90]")
        need(len(self.width_range) == 2 and 0 <= self.width_range[0] < self.width_range[1],
             "width_range must be (lo, hi) with 0 <= lo < hi")
        need(0 <= self.overlap_min <= 1, "overlap_min must lie in [0, 1]")
        need(0 <= self.vshape_parallel_tol <= 90, "vshape_parallel_tol must lie in [0, 90]")
        need(self.orient_by in ORIENTATIONS, f"orient_by must be one of {ORIENTATIONS}")
        need(self.beta > 0, "beta must be > 0")
        need(self.delta >= 0, "delta must be >= 0")
        need(int(self.out_side) == self.out_side and self.out_side >= 16, "out_side must be an integer >= 16")
        need(0 < self.feature_percentile < 100, "feature_percentile must lie in (0, 100)")
        return self

    def to_dict(self):
        d = asdict(self)
        d["width_range"] = list(self.width_range)
        return d

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "width_range" in data:
            data["width_range"] = tuple(data["width_range"])
        try:
            cfg = cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg.validate()

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)


@dataclass
class PipelineReport:
    status: str = "ok"
    stage: str = None
    error_code: str = None
    message: str = None
    keypoints: list = field(default_factory=list)  # K1, K2, K3
    valleys: list = field(default_factory=list)  # every located valley point
    frame: dict = None
    roi: dict = None
    timings_ms: dict = field(default_factory=dict)
    config: dict = None

    @property
    def ok(self):
        return self.status == "ok"

    def to_dict(self, include_timings=False):
        d = asdict(self)
        if not include_timings:
            d.pop("timings_ms")
        return d


@dataclass
class PipelineResult:
    """Everything the pipeline produced, including intermediate stages."""

    report: PipelineReport
    mask: np.ndarray = None
    centroid: tuple = None
    hand_scale: float = None
    chain: object = None
    raw_segments: list = None
    segments: list = None
    long_segments: list = None
    pairs: list = None
    vshapes: list = None
    centers: list = None
    valleys: list = None
    main: tuple = None
    frame: object = None
    roi: object = None
    response: object = None
    binary_lines: np.ndarray = None
    lines: object = None


class _Clock:
    def __init__(self, report):
        self.report = report
        self.stage = None
        self._t0 = None

    def start(self, stage):
        self.stage = stage
        self._t0 = time.perf_counter()

    def stop(self):
        self.report.timings_ms[self.stage] = (time.perf_counter() - self._t0) * 1000.0


def run_stages(img, cfg=None):
    cfg = (cfg or PipelineConfig()).validate()
    img = imagecore.as_gray(img)
    report = PipelineReport(config=cfg.to_dict())
    res = PipelineResult(report)
    clock = _Clock(report)
    try:
        clock.start("binarize")
        res.mask = imagecore.binarize(img, cfg.polarity)
        res.centroid = imagecore.centroid(res.mask)
        res.hand_scale = imagecore.hand_scale(res.mask)
        clock.stop()

        clock.start("trace_boundary")
        res.chain = contour.trace_boundary(res.mask)
        clock.stop()

        clock.start("fit_polyline")
        h, w = img.shape
        halfwidth = cfg.strip_halfwidth or polyline.default_strip_halfwidth(w, h)
        res.raw_segments = polyline.fit_polyline(res.chain, halfwidth)
        clock.stop()

        clock.start("connect_broken")
        res.segments = polyline.connect_broken(res.raw_segments, cfg.gap_max, cfg.angle_max,
                                               cfg.offset_max)
        clock.stop()

        clock.start("filter_short")
        res.long_segments = polyline.filter_short(
            res.segments, cfg.min_length_fraction * res.hand_scale)
        if cfg.refine_edges:
            res.long_segments = [polyline.refine_segment(s, res.chain, cfg.refine_trim)
                                 for s in res.long_segments]
        clock.stop()

        clock.start("pair_parallel")
        res.pairs = grouping.pair_parallel(res.long_segments, res.hand_scale, res.centroid,
                                           cfg.pair_angle_tol, cfg.width_range, cfg.overlap_min)
        clock.stop()

        clock.start("form_vshapes")
        res.vshapes = grouping.form_vshapes(res.pairs, cfg.vshape_parallel_tol)
        clock.stop()

        clock.start("center_line")
        res.centers = [grouping.center_line(v) for v in res.vshapes]
        clock.stop()

        clock.start("locate_key_point")
        res.valleys = [grouping.locate_key_point(c, res.chain, v, i)
                       for i, (c, v) in enumerate(zip(res.centers, res.vshapes))]
        report.valleys = [list(k.position) for k in res.valleys]
        clock.stop()

        clock.start("select_main_keypoints")
        res.main = grouping.select_main_keypoints(res.valleys)
        report.keypoints = [list(k.position) for k in res.main]
        clock.stop()

        clock.start("build_frame")
        res.frame = roi.build_frame(*res.main, _palm_reference(res, cfg.orient_by))
        report.frame = res.frame.to_dict()
        clock.stop()

        clock.start("extract_roi")
        res.roi = roi.extract_roi(img, res.frame, cfg.beta, cfg.delta, int(cfg.out_side))
        report.roi = res.roi.provenance()
        clock.stop()

        clock.start("smooth")
        smoothed = features.smooth(res.roi)
        clock.stop()

        clock.start("line_response")
        res.response = features.line_response(255 - smoothed.astype(np.int32))
        clock.stop()

        clock.start("threshold_map")
        level = features.response_level(res.response, cfg.feature_percentile, positive_only=True)
        res.binary_lines = features.threshold_map(
            res.response, percentile=cfg.feature_percentile, positive_only=True)
        clock.stop()

        clock.start("thin")
        res.lines = features.thin(res.binary_lines, threshold_used=level)
        clock.stop()
    except PalmRoiError as exc:
        clock.stop()
        report.status = "error"
        report.stage = clock.stage
        report.error_code = exc.code
        report.message = str(exc)
        res.roi = None
        res.lines = None
    return res


def _palm_reference(res, orient_by):
    """A point on the palm side of the K1-K3 line.

    The mask centroid misleads when the palm leaves the frame and only the
    fingers remain; stepping back from the K1-K3 midpoint against the mean
    finger direction does not.
    """
    if orient_by == "centroid":
        return res.centroid
    axis = np.sum([p.axis for p in res.pairs], axis=0)
    norm = np.linalg.norm(axis)
    if norm < 1e-9:
        return res.centroid
    k1 = np.asarray(res.main[0].position)
    k3 = np.asarray(res.main[-1].position)
    return tuple(0.5 * (k1 + k3) - axis / norm * max(1.0, np.linalg.norm(k3 - k1)))


def run_pipeline(img, cfg=None):
    """Run every stage; returns ``(roi, line_map, report)``.

    On failure ``roi`` and ``line_map`` are None and the report names the
    stage that raised.
    """
    res = run_stages(img, cfg)
    return res.roi, res.lines, res.report


def keypoint_error(detected, truth):
    """Largest distance between matched detected and true key points (pixels)."""
    return max(math.dist(a, b) for a, b in zip(detected, truth))
