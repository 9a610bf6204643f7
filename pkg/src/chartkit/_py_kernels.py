"""Pure-Python (numpy) fallback for the compiled geometry kernels.

Kept arithmetically identical to chartkit._kernels: same operation order,
same tie-break keys, so either backend can serve the same tests.
"""

from __future__ import annotations

import numpy as np


def pairwise_iou(preds: np.ndarray, gts: np.ndarray) -> np.ndarray:
    """IoU matrix between two (N, 4) / (M, 4) float64 box arrays."""
    preds = np.ascontiguousarray(preds, dtype=np.float64)
    gts = np.ascontiguousarray(gts, dtype=np.float64)
    n, m = preds.shape[0], gts.shape[0]
    if n == 0 or m == 0:
        return np.zeros((n, m), dtype=np.float64)

    ax0, ay0, ax1, ay1 = (preds[:, k][:, None] for k in range(4))
    bx0, by0, bx1, by1 = (gts[:, k][None, :] for k in range(4))

    iw = np.minimum(ax1, bx1) - np.maximum(ax0, bx0)
    ih = np.minimum(ay1, by1) - np.maximum(ay0, by0)
    inter = np.where((iw > 0.0) & (ih > 0.0), iw * ih, 0.0)

    area_a = (ax1 - ax0) * (ay1 - ay0)
    area_b = (bx1 - bx0) * (by1 - by0)
    union = area_a + area_b - inter
    # union > 0 always: boxes have positive area and inter <= min(areas).
    return inter / union


def greedy_match_pairs(iou_mat: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Greedy one-to-one matching over an IoU matrix.

    Candidate (pred, gt) pairs with IoU >= threshold are taken in
    (IoU desc, pred index asc, gt index asc) order; a pair is accepted when
    neither side is already matched. Returns the accepted pairs in
    acceptance order.
    """
    iou_mat = np.asarray(iou_mat, dtype=np.float64)
    ii, jj = np.nonzero(iou_mat >= threshold)
    if ii.size == 0:
        return []
    vals = iou_mat[ii, jj]
    order = np.lexsort((jj, ii, -vals))

    used_pred = bytearray(iou_mat.shape[0])
    used_gt = bytearray(iou_mat.shape[1])
    pairs: list[tuple[int, int]] = []
    for k in order:
        i = int(ii[k])
        j = int(jj[k])
        if used_pred[i] or used_gt[j]:
            continue
        used_pred[i] = 1
        used_gt[j] = 1
        pairs.append((i, j))
    return pairs
