import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from palmroi.features import (AMBIGUOUS, DIAGONAL_NEG, DIAGONAL_POS, HORIZONTAL, LINE_MASKS,
                              VERTICAL, extract_line_features, line_response, response_level,
                              smooth, thin, threshold_map)

from oracles import box_mean_bruteforce, component_count, mask_responses_bruteforce

# rotating the image a quarter turn swaps horizontal/vertical and the two diagonals
QUARTER_TURN = {HORIZONTAL: VERTICAL, VERTICAL: HORIZONTAL, DIAGONAL_POS: DIAGONAL_NEG,
                DIAGONAL_NEG: DIAGONAL_POS, AMBIGUOUS: AMBIGUOUS}


def test_masks_sum_to_zero():
    assert (LINE_MASKS.sum(axis=(1, 2)) == 0).all()
    assert np.array_equal(LINE_MASKS[VERTICAL], LINE_MASKS[HORIZONTAL].T)


def test_smooth_constant():
    img = np.full((9, 7), 77, dtype=np.uint8)
    assert np.array_equal(smooth(img), img)


def test_smooth_single_pixel():
    img = np.zeros((7, 7), dtype=np.uint8)
    img[3, 3] = 255
    out = smooth(img)
    assert (out[2:5, 2:5] == 28).all() and out.sum() == 9 * 28


def test_smooth_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        img = rng.integers(0, 256, (16, 16)).astype(np.uint8)
        assert np.array_equal(smooth(img), box_mean_bruteforce(img))


def test_constant_response_is_zero():
    for v in (0, 1, 128, 255):
        r = line_response(np.full((12, 12), v, dtype=np.uint8))
        assert (r.value == 0).all()


def test_horizontal_line_response():
    img = np.zeros((9, 15), dtype=np.int32)
    img[4, :] = 40
    r = line_response(img)
    assert (r.value[4] == 6 * 40).all()
    assert (r.orientation[4] == HORIZONTAL).all()


@pytest.mark.parametrize("kind", [DIAGONAL_POS, DIAGONAL_NEG])
def test_diagonal_line_orientation(kind):
    n = 15
    img = np.zeros((n, n), dtype=np.int32)
    for i in range(n):
        img[i, n - 1 - i if kind == DIAGONAL_POS else i] = 50
    r = line_response(img)
    for i in range(1, n - 1):
        x = n - 1 - i if kind == DIAGONAL_POS else i
        assert r.orientation[i, x] == kind
        assert r.value[i, x] == 6 * 50


def test_line_response_matches_direct_convolution():
    rng = np.random.default_rng(1)
    for _ in range(50):
        img = rng.integers(0, 256, (16, 16))
        ref = mask_responses_bruteforce(img)
        r = line_response(img)
        mag = np.abs(ref)
        peak = mag.max(axis=0)
        assert np.array_equal(np.abs(r.value), peak)
        winners = mag == peak
        single = winners.sum(axis=0) == 1
        assert np.array_equal(r.orientation[single], np.argmax(mag, axis=0)[single])
        assert (r.orientation[~single] == AMBIGUOUS).all()
        # the signed value is the winning mask's own response, positive on sign ties
        picked = np.where((ref == peak).any(axis=0), peak, -peak)
        assert np.array_equal(r.value, picked)
        assert np.array_equal(r.value[single], np.take_along_axis(
            ref, np.argmax(mag, axis=0)[None], axis=0)[0][single])


@settings(max_examples=200, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(3, 14), st.integers(3, 14)),
              elements=st.sampled_from([0, 10, 20, 255])), st.integers(1, 3))
def test_quarter_turn_permutes_orientation(img, k):
    a = line_response(img)
    b = line_response(np.rot90(img, k))
    assert np.array_equal(b.value, np.rot90(a.value, k))
    expect = np.rot90(a.orientation, k)
    if k % 2:
        expect = np.vectorize(QUARTER_TURN.get)(expect)
    assert np.array_equal(b.orientation, expect)


def test_threshold_examples():
    resp = np.arange(100).reshape(10, 10)
    assert not threshold_map(resp, level=1000).any()
    assert threshold_map(resp, percentile=90).sum() == 10
    assert threshold_map(resp, level=0).all()
    with pytest.raises(ValueError):
        threshold_map(resp, percentile=100)
    with pytest.raises(ValueError):
        threshold_map(resp)


def test_threshold_percentile_of_positive_responses():
    resp = np.concatenate([np.full(50, -3), np.arange(1, 51)])
    level = response_level(resp, 90, positive_only=True)
    assert level == pytest.approx(np.percentile(np.arange(1, 51), 90))
    out = threshold_map(resp, percentile=90, positive_only=True)
    assert out.sum() == 5 and out[-5:].all()
    assert not threshold_map(np.full(10, -1), percentile=50, positive_only=True).any()


def test_thin_trivial_cases():
    empty = np.zeros((8, 8), dtype=bool)
    assert not thin(empty).data.any()
    one = empty.copy()
    one[3, 4] = True
    assert np.array_equal(thin(one).data, one)


def test_thin_bar():
    m = np.zeros((9, 40), dtype=bool)
    m[3:6, 5:35] = True
    out = thin(m).data
    rows = np.flatnonzero(out.any(axis=1))
    assert len(rows) == 1
    assert out.sum() >= 28
    assert component_count(out) == 1


def _random_maps(seed, n=8, size=40):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        m = ndimage.gaussian_filter(rng.random((size, size)), rng.uniform(0.8, 2.5))
        yield m > np.percentile(m, rng.uniform(50, 85))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_thin_properties(seed):
    for m in _random_maps(seed, n=3):
        t = thin(m).data
        assert not (t & ~m).any()
        assert np.array_equal(thin(t).data, t)
        assert component_count(t) == component_count(m)


def test_small_blocks_keep_their_components():
    m = np.zeros((10, 10), dtype=bool)
    m[1:3, 1:3] = True
    m[5:7, 5:8] = True
    t = thin(m).data
    assert component_count(t) == 2 and t.sum() >= 2


def test_extract_line_features_on_a_crease():
    roi = np.full((64, 64), 200, dtype=np.uint8)
    roi[30:33, 8:56] = 110  # a dark horizontal crease
    lm = extract_line_features(roi, percentile=95.0)
    assert lm.side == 64 and lm.threshold_used is not None
    ys, xs = np.nonzero(lm.data)
    assert len(ys) > 0 and (np.abs(ys - 31) <= 2).mean() > 0.9


def test_sign_tie_prefers_positive():
    img = np.array([[10, 0, 10], [0, 10, 0], [10, 10, 10]], dtype=np.uint8)
    # at the centre the masks give -30, 0, +30, +30
    r = line_response(img)
    assert r.value[1, 1] == 30 and r.orientation[1, 1] == AMBIGUOUS
    assert line_response(np.rot90(img)).value[1, 1] == 30
