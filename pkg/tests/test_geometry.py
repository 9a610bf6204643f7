import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartkit import _py_kernels
from chartkit import geometry as g
from chartkit.errors import EmptyGroundTruth, InvalidBox

from oracles import max_matching_count, pixel_grid_iou, random_int_box

try:
    from chartkit import _kernels
except ImportError:
    _kernels = None


def box(*quad):
    return g.BBox.from_quad(list(quad))


def int_boxes(rng, n):
    return [g.BBox.from_quad(random_int_box(rng)) for _ in range(n)]


# Strategy: draw a corner and positive extents so boxes are always valid.
coords = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64)
extents = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False, width=64)
bboxes = st.builds(
    lambda x, y, w, h: g.BBox(x, y, x + w, y + h), coords, coords, extents, extents
)


class TestBBox:
    def test_valid(self):
        b = box(0, 0, 10, 5)
        assert b.width == 10 and b.height == 5 and b.area == 50

    @pytest.mark.parametrize(
        "quad",
        [
            [0, 0, 0, 10],
            [0, 0, 10, 0],
            [10, 0, 0, 10],
            [0, 0, float("nan"), 10],
            [0, 0, float("inf"), 10],
            [0, 0, "10", 10],
            [0, 0, True, 10],
        ],
    )
    def test_rejected(self, quad):
        with pytest.raises(InvalidBox):
            g.BBox.from_quad(quad)

    def test_wrong_arity(self):
        with pytest.raises(InvalidBox):
            g.BBox.from_quad([0, 0, 10])

    def test_quad_preserves_int(self):
        assert box(0, 0, 10, 10).as_quad() == [0, 0, 10, 10]
        assert all(isinstance(v, int) for v in box(0, 0, 10, 10).as_quad())


class TestIou:
    def test_identical(self):
        assert g.iou(box(0, 0, 10, 10), box(0, 0, 10, 10)) == 1.0

    def test_disjoint(self):
        assert g.iou(box(0, 0, 10, 10), box(20, 20, 30, 30)) == 0.0

    def test_touching_edge_is_disjoint(self):
        assert g.iou(box(0, 0, 10, 10), box(10, 0, 20, 10)) == 0.0

    def test_half_overlap(self):
        got = g.iou(box(0, 0, 10, 10), box(5, 0, 15, 10))
        assert got == pytest.approx(50 / 150, abs=1e-15)
        assert got == pixel_grid_iou([0, 0, 10, 10], [5, 0, 15, 10])

    @given(a=bboxes, b=bboxes)
    def test_symmetric_and_bounded(self, a, b):
        ab = g.iou(a, b)
        assert ab == g.iou(b, a)
        assert 0.0 <= ab <= 1.0

    @given(a=bboxes)
    def test_self_iou_exact(self, a):
        assert g.iou(a, a) == 1.0

    @settings(max_examples=200)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_pixel_grid_oracle(self, seed):
        rng = random.Random(seed)
        qa, qb = random_int_box(rng), random_int_box(rng)
        got = g.iou(g.BBox.from_quad(qa), g.BBox.from_quad(qb))
        assert abs(got - pixel_grid_iou(qa, qb)) <= 1e-12


class TestMatchAndRecall:
    def test_exact_match(self):
        assert g.match_and_recall([box(0, 0, 10, 10)], [box(0, 0, 10, 10)], 0.3) == (1, 1.0)

    def test_unmatched_gt(self):
        preds = [box(0, 0, 10, 10)]
        gts = [box(0, 0, 10, 10), box(100, 100, 110, 110)]
        assert g.match_and_recall(preds, gts, 0.3) == (1, 0.5)

    def test_gt_used_once(self):
        preds = [box(0, 0, 10, 10), box(0, 0, 10, 10)]
        gts = [box(0, 0, 10, 10)]
        assert g.match_and_recall(preds, gts, 0.3) == (1, 1.0)

    def test_tie_goes_to_lower_pred_index(self):
        preds = [box(0, 0, 10, 10), box(0, 0, 10, 10)]
        gts = [box(0, 0, 10, 10)]
        assert g.match_boxes(preds, gts, 0.3) == [(0, 0)]

    def test_tie_goes_to_lower_gt_index(self):
        preds = [box(0, 0, 10, 10)]
        gts = [box(0, 0, 10, 10), box(0, 0, 10, 10)]
        assert g.match_boxes(preds, gts, 0.3) == [(0, 0)]

    def test_empty_preds(self):
        assert g.match_and_recall([], [box(0, 0, 10, 10)], 0.3) == (0, 0.0)

    def test_empty_gts_rejected(self):
        with pytest.raises(EmptyGroundTruth):
            g.match_and_recall([box(0, 0, 10, 10)], [], 0.3)

    @pytest.mark.parametrize("thr", [0.0, -0.1, 1.5])
    def test_bad_threshold(self, thr):
        with pytest.raises(ValueError):
            g.match_boxes([box(0, 0, 1, 1)], [box(0, 0, 1, 1)], thr)

    def test_greedy_prefers_highest_iou(self):
        # pred 0 overlaps gt 0 weakly and gt 1 strongly; pred 1 overlaps gt 0.
        preds = [box(0, 0, 10, 10), box(0, 0, 12, 10)]
        gts = [box(0, 0, 12, 10), box(0, 0, 10, 10)]
        # iou(p0,g1)=1.0 wins first, then (p1,g0)=1.0 by index order.
        assert g.match_boxes(preds, gts, 0.3) == [(0, 1), (1, 0)]

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_greedy_never_beats_exhaustive(self, seed):
        rng = random.Random(seed)
        preds = int_boxes(rng, rng.randint(0, 6))
        gts = int_boxes(rng, rng.randint(1, 6))
        thr = rng.choice([0.1, 0.3, 0.5])
        matched, recall = g.match_and_recall(preds, gts, thr)
        mat = g.pairwise_iou(preds, gts).tolist()
        best = max_matching_count(mat, thr)
        assert matched <= best
        assert recall == matched / len(gts)
        assert recall <= min(len(preds), len(gts)) / len(gts)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_recall_non_increasing_in_threshold(self, seed):
        rng = random.Random(seed)
        preds = int_boxes(rng, rng.randint(1, 6))
        gts = int_boxes(rng, rng.randint(1, 6))
        recalls = [g.match_and_recall(preds, gts, t)[1] for t in (0.1, 0.3, 0.5, 0.9)]
        assert recalls == sorted(recalls, reverse=True)


@pytest.mark.skipif(_kernels is None, reason="compiled extension unavailable")
class TestBackendParity:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_identical_outputs(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(0, 8)), int(rng.integers(0, 8))
        lo = rng.uniform(0, 90, size=(n, 2))
        ext = rng.uniform(0.5, 20, size=(n, 2))
        preds = np.ascontiguousarray(np.hstack([lo, lo + ext]))
        lo = rng.uniform(0, 90, size=(m, 2))
        ext = rng.uniform(0.5, 20, size=(m, 2))
        gts = np.ascontiguousarray(np.hstack([lo, lo + ext]))

        mc = _kernels.pairwise_iou(preds, gts)
        mp = _py_kernels.pairwise_iou(preds, gts)
        assert np.array_equal(mc, mp)
        assert _kernels.greedy_match_pairs(mc, 0.2) == _py_kernels.greedy_match_pairs(mp, 0.2)

    def test_backend_reported(self):
        assert g.KERNEL_BACKEND in ("compiled", "python")
