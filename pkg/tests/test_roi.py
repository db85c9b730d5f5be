import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palmroi import synth
from palmroi.errors import DegenerateFrame, RoiOutOfImage, SideMismatch
from palmroi.pipeline import run_pipeline
from palmroi.roi import PalmFrame, bilinear_sample, build_frame, extract_roi, roi_similarity


def test_axis_aligned_frame():
    f = build_frame((0, 10), None, (0, -10), (50, 0))
    assert f.origin == (0.0, 0.0)
    assert f.y_axis == pytest.approx((0.0, -1.0))
    assert f.x_axis == pytest.approx((1.0, 0.0))
    assert f.scale == 20.0


def test_frame_flips_toward_centroid():
    f = build_frame((0, 10), None, (0, -10), (-50, 0))
    assert f.x_axis == pytest.approx((-1.0, 0.0))


def test_degenerate_frame():
    with pytest.raises(DegenerateFrame):
        build_frame((0, 0), None, (3, 0), (10, 10))


def _rot(theta):
    return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])


pt = st.tuples(st.floats(-200, 200), st.floats(-200, 200))


@settings(max_examples=300, deadline=None)
@given(pt, pt, pt, st.floats(0, 2 * math.pi), st.floats(0.2, 5), pt)
def test_frame_similarity_equivariance(k1, k3, c, theta, s, t):
    k1, k3, c, t = map(np.array, (k1, k3, c, t))
    d, m = k3 - k1, c - (k1 + k3) / 2
    base = np.linalg.norm(d)
    if min(base, base * s) < 5 or abs(d[0] * m[1] - d[1] * m[0]) < 1e-3 * base:
        return  # degenerate frame, or centroid on the y axis
    f = build_frame(k1, None, k3, c)
    for v in (f.x_axis, f.y_axis):
        assert abs(np.linalg.norm(v) - 1) <= 1e-9
    assert abs(np.dot(f.x_axis, f.y_axis)) <= 1e-9
    r = _rot(theta)
    tf = lambda p: s * r @ p + t  # noqa: E731
    g = build_frame(tf(k1), None, tf(k3), tf(c))
    scale = max(1.0, np.abs(tf(np.asarray(f.origin))).max())
    np.testing.assert_allclose(g.origin, tf(np.asarray(f.origin)), atol=1e-6 * scale)
    np.testing.assert_allclose(g.x_axis, r @ f.x_axis, atol=1e-6)
    np.testing.assert_allclose(g.y_axis, r @ f.y_axis, atol=1e-6)
    assert g.scale == pytest.approx(s * f.scale, rel=1e-6)


def _frame(origin=(100.0, 80.0), angle=0.3, scale=40.0):
    y = (math.cos(angle), math.sin(angle))
    return PalmFrame(origin, (-y[1], y[0]), y, scale)


def test_constant_image_gives_constant_roi():
    img = np.full((200, 240), 137, dtype=np.uint8)
    roi = extract_roi(img, _frame(), beta=1.2, delta=0.35, out_side=32)
    assert roi.data.shape == (32, 32) and (roi.data == 137).all()
    assert not roi.out_of_bounds


def test_roi_off_the_image():
    img = np.full((200, 240), 90, dtype=np.uint8)
    with pytest.raises(RoiOutOfImage):
        extract_roi(img, _frame(origin=(2.0, 2.0), angle=math.pi * 1.25, scale=60.0), 1.2, 0.8, 32)


def test_partially_outside_sets_flag():
    img = np.full((200, 240), 90, dtype=np.uint8)
    f = PalmFrame((220.0, 100.0), (1.0, 0.0), (0.0, 1.0), 40.0)  # window pokes past x = 239
    roi = extract_roi(img, f, 1.2, 0.1, 32)
    assert roi.out_of_bounds and 0 < roi.outside_fraction <= 0.25
    assert roi.provenance()["out_of_bounds"] is True


@pytest.mark.parametrize("bad", [dict(beta=0), dict(delta=-0.1), dict(out_side=8)])
def test_roi_parameter_checks(bad):
    kw = dict(beta=1.2, delta=0.5, out_side=32)
    kw.update(bad)
    with pytest.raises(ValueError):
        extract_roi(np.zeros((50, 50), dtype=np.uint8), _frame((25, 25), 0, 10), **kw)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(10, 60), st.floats(0, 1.0))
def test_linear_gradient_is_sampled_exactly(angle, scale, delta):
    grad = np.tile(np.arange(256, dtype=np.float64), (256, 1))  # I(x, y) = x
    f = _frame((128.0, 128.0), angle, scale)
    roi = extract_roi(grad.astype(np.uint8), f, 1.0, delta, 32)
    steps = (np.arange(32) + 0.5) / 32 - 0.5
    u = delta * scale + scale * steps[:, None]
    v = scale * steps[None, :]
    xs = f.origin[0] + u * f.x_axis[0] + v * f.y_axis[0]
    ys = f.origin[1] + u * f.x_axis[1] + v * f.y_axis[1]
    assert np.abs(roi.data - xs).max() <= 0.5 + 1e-9
    vals, outside = bilinear_sample(grad, xs, ys)
    assert not outside.any()
    assert np.abs(vals - xs).max() <= 1e-9


def test_rows_follow_x_axis_and_columns_y_axis():
    img = np.zeros((100, 100), dtype=np.uint8)
    img[:, 60:] = 200  # bright for x >= 60
    f = PalmFrame((50.0, 50.0), (1.0, 0.0), (0.0, 1.0), 40.0)
    roi = extract_roi(img, f, 1.0, 0.25, 40)
    # the ROI covers x in [40, 80): rows cross from dark to bright, columns do not change
    assert (roi.data[:5] == 0).all() and (roi.data[-5:] == 200).all()
    assert (roi.data == roi.data[:, :1]).all()


def _scene(x, y):
    """Smooth analytic pattern on continuous coordinates."""
    return 128 + 60 * np.sin(x / 7.0) * np.cos(y / 11.0) + 40 * np.sin((x + y) / 17.0)


def test_scale_invariance_across_resolutions():
    def render(factor):
        h, w = 200 * factor, 240 * factor
        yy, xx = np.mgrid[:h, :w]
        return np.clip(np.floor(_scene(xx / factor, yy / factor) + 0.5), 0, 255).astype(np.uint8)

    f1 = _frame((120.0, 100.0), 0.4, 50.0)
    f2 = PalmFrame((240.0, 200.0), f1.x_axis, f1.y_axis, 100.0)
    a = extract_roi(render(1), f1, 1.2, 0.3, 64)
    b = extract_roi(render(2), f2, 1.2, 0.3, 64)
    assert roi_similarity(a, b) >= 0.98


def test_synthetic_palm_under_rst():
    p = synth.HandParams(texture_seed=7)
    q = synth.HandParams(texture_seed=7, rotation=30.0, scale=1.4, translation=(25.0, -10.0))
    a, _, ra = run_pipeline(synth.generate_hand(p)[0])
    b, _, rb = run_pipeline(synth.generate_hand(q, strict=False)[0])
    assert ra.ok and rb.ok
    assert roi_similarity(a, b) >= 0.95


def test_similarity_basics():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 256, (32, 32)).astype(np.uint8)
    assert roi_similarity(a, a) == pytest.approx(1.0)
    assert roi_similarity(a, 255 - a) == pytest.approx(-1.0)
    c = np.full((32, 32), 9, dtype=np.uint8)
    assert roi_similarity(c, c) == 1.0
    assert roi_similarity(c, c + 1) == 0.0
    assert roi_similarity(c, a) == 0.0
    with pytest.raises(SideMismatch):
        roi_similarity(a, a[:16, :16])


def test_independent_noise_is_uncorrelated():
    rng = np.random.default_rng(11)
    scores = np.array([roi_similarity(rng.integers(0, 256, (128, 128)),
                                      rng.integers(0, 256, (128, 128))) for _ in range(1000)])
    assert (np.abs(scores) < 0.1).mean() >= 0.99
