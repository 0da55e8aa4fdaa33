"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def pairwise_mixed_distance(a_num, a_cat, b_num, b_cat, span, n_features):
    m, n = a_num.shape[0], b_num.shape[0]
    acc = np.zeros((m, n), dtype=np.float64)
    for f in range(a_num.shape[1]):
        s = span[f]
        if s > 0.0:
            t = np.abs(a_num[:, f, None] - b_num[None, :, f]) / s
            np.minimum(t, 1.0, out=t)
            acc += t
    for f in range(a_cat.shape[1]):
        acc += a_cat[:, f, None] != b_cat[None, :, f]
    return acc / n_features


def kth_smallest_rows(dist, k, skip_one_zero):
    dist = np.asarray(dist, dtype=np.float64)
    if skip_one_zero:
        has_zero = (dist == 0.0).any(axis=1)
        kk = np.where(has_zero, k, k - 1)
    else:
        kk = np.full(dist.shape[0], k - 1)
    srt = np.sort(dist, axis=1)
    return srt[np.arange(dist.shape[0]), kk]
