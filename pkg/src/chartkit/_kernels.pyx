# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for box geometry.

Mirrors chartkit._py_kernels operation for operation; both backends must
produce bit-identical results (same arithmetic, same ordering).
"""

import numpy as np


def pairwise_iou(double[:, ::1] preds, double[:, ::1] gts):
    """IoU matrix between two (N, 4) / (M, 4) float64 box arrays."""
    cdef Py_ssize_t n = preds.shape[0]
    cdef Py_ssize_t m = gts.shape[0]
    out_arr = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double ax0, ay0, ax1, ay1, area_a
    cdef double bx0, by0, bx1, by1, area_b
    cdef double iw, ih, inter, union

    for i in range(n):
        ax0 = preds[i, 0]
        ay0 = preds[i, 1]
        ax1 = preds[i, 2]
        ay1 = preds[i, 3]
        area_a = (ax1 - ax0) * (ay1 - ay0)
        for j in range(m):
            bx0 = gts[j, 0]
            by0 = gts[j, 1]
            bx1 = gts[j, 2]
            by1 = gts[j, 3]
            iw = min(ax1, bx1) - max(ax0, bx0)
            if iw <= 0.0:
                continue
            ih = min(ay1, by1) - max(ay0, by0)
            if ih <= 0.0:
                continue
            inter = iw * ih
            area_b = (bx1 - bx0) * (by1 - by0)
            union = area_a + area_b - inter
            out[i, j] = inter / union
    return out_arr


def greedy_match_pairs(double[:, ::1] iou_mat, double threshold):
    """Greedy one-to-one matching over an IoU matrix.

    Candidate (pred, gt) pairs with IoU >= threshold are taken in
    (IoU desc, pred index asc, gt index asc) order; a pair is accepted when
    neither side is already matched. Returns the accepted pairs in
    acceptance order.
    """
    cdef Py_ssize_t n = iou_mat.shape[0]
    cdef Py_ssize_t m = iou_mat.shape[1]
    cdef Py_ssize_t i, j, count = 0

    for i in range(n):
        for j in range(m):
            if iou_mat[i, j] >= threshold:
                count += 1
    if count == 0:
        return []

    vals_arr = np.empty(count, dtype=np.float64)
    ii_arr = np.empty(count, dtype=np.intp)
    jj_arr = np.empty(count, dtype=np.intp)
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t[::1] ii = ii_arr
    cdef Py_ssize_t[::1] jj = jj_arr

    cdef Py_ssize_t k = 0
    for i in range(n):
        for j in range(m):
            if iou_mat[i, j] >= threshold:
                vals[k] = iou_mat[i, j]
                ii[k] = i
                jj[k] = j
                k += 1

    order_arr = np.lexsort((jj_arr, ii_arr, -vals_arr))
    cdef Py_ssize_t[::1] order = order_arr

    used_pred_arr = np.zeros(n, dtype=np.uint8)
    used_gt_arr = np.zeros(m, dtype=np.uint8)
    cdef unsigned char[::1] used_pred = used_pred_arr
    cdef unsigned char[::1] used_gt = used_gt_arr

    pairs = []
    for k in range(count):
        i = ii[order[k]]
        j = jj[order[k]]
        if used_pred[i] or used_gt[j]:
            continue
        used_pred[i] = 1
        used_gt[j] = 1
        pairs.append((i, j))
    return pairs
