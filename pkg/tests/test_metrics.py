import pytest
from hypothesis import given, strategies as st

from edgeperf.metrics import (
    BoundingBox,
    DetectionCounts,
    average_precision,
    average_recall,
    detection_success,
    iou,
)

coord = st.floats(-1e3, 1e3, allow_nan=False)


@st.composite
def boxes(draw, min_extent=0.0):
    x, y = draw(coord), draw(coord)
    w = draw(st.floats(min_extent, 1e3))
    h = draw(st.floats(min_extent, 1e3))
    return BoundingBox(x, y, x + w, y + h)


def test_iou_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(20, 20, 30, 30)) == 0.0
    # overlap 5x10 = 50, union 100 + 100 - 50 = 150
    assert iou(a, BoundingBox(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-15)


def test_iou_touching_edges_and_zero_union():
    assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(1, 0, 2, 1)) == 0.0
    p = BoundingBox(3, 3, 3, 3)
    assert iou(p, p) == 0.0
    assert iou(BoundingBox(0, 0, 0, 5), BoundingBox(0, 0, 0, 5)) == 0.0


def test_box_rejects_inverted_corners():
    with pytest.raises(ValueError):
        BoundingBox(1, 0, 0, 1)
    with pytest.raises(ValueError):
        BoundingBox(0, float("nan"), 1, 1)


def test_counts_examples():
    assert average_precision(DetectionCounts(50, 50, 0)) == 0.5
    assert average_precision(DetectionCounts(10, 0, 3)) == 1.0
    assert average_precision(DetectionCounts(0, 0, 5)) == 0.0
    assert average_recall(DetectionCounts(50, 0, 50)) == 0.5
    assert average_recall(DetectionCounts(10, 4, 0)) == 1.0
    assert average_recall(DetectionCounts(0, 0, 0)) == 0.0


@pytest.mark.parametrize("bad", [(-1, 0, 0), (0, -2, 0), (0, 0, 1.5), (True, 0, 0)])
def test_counts_reject_invalid(bad):
    with pytest.raises(ValueError):
        DetectionCounts(*bad)


def test_detection_success_examples():
    a = BoundingBox(0, 0, 10, 10)
    assert detection_success(a, a, 0.95)
    assert not detection_success(a, BoundingBox(20, 20, 30, 30), 0.5)
    assert not detection_success(a, BoundingBox(5, 0, 15, 10), 0.5)
    # strict comparison: IoU exactly at the threshold is not a success
    assert not detection_success(a, BoundingBox(0, 0, 10, 5), 0.5)


@given(boxes(), boxes())
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0


@given(boxes(min_extent=1e-3))
def test_iou_self_is_one(a):
    assert iou(a, a) == 1.0


@st.composite
def pixel_boxes(draw):
    x, y = draw(st.floats(0, 640)), draw(st.floats(0, 640))
    return BoundingBox(x, y, x + draw(st.floats(1, 320)), y + draw(st.floats(1, 320)))


@given(pixel_boxes(), pixel_boxes(), st.floats(-640, 640), st.floats(-640, 640))
def test_iou_translation_invariant(a, b, dx, dy):
    assert iou(a.shifted(dx, dy), b.shifted(dx, dy)) == pytest.approx(iou(a, b), abs=1e-12)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_ap_ar_in_unit_interval(tp, fp, fn):
    c = DetectionCounts(tp, fp, fn)
    assert 0.0 <= average_precision(c) <= 1.0
    assert 0.0 <= average_recall(c) <= 1.0
