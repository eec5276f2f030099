"""Cosine-similarity k-nearest-neighbour probe."""
from __future__ import annotations

import numpy as np


def knn_predict(ref_x, ref_y, query_x, k=20, exclude_self=False, num_classes=None):
    ref_x, query_x = np.asarray(ref_x, np.float64), np.asarray(query_x, np.float64)
    ref_y = np.asarray(ref_y)
    if len(ref_x) == 0 or len(query_x) == 0:
        raise ValueError("kNN probe needs non-empty reference and query sets")
    avail = len(ref_x) - (1 if exclude_self else 0)
    if not 1 <= k <= avail:
        raise ValueError(f"k={k} must lie in [1, {avail}]")
    num_classes = num_classes or int(ref_y.max()) + 1

    def unit(a):
        n = np.linalg.norm(a, axis=1, keepdims=True)
        return a / np.where(n == 0, 1.0, n)

    sim = unit(query_x) @ unit(ref_x).T
    if exclude_self:
        np.fill_diagonal(sim, -np.inf)
    # stable sort on -sim keeps ties in reference order
    nn = np.argsort(-sim, axis=1, kind="stable")[:, :k]
    votes = np.zeros((len(query_x), num_classes), dtype=np.int64)
    np.add.at(votes, (np.arange(len(query_x))[:, None], ref_y[nn]), 1)
    # argmax picks the smallest class index among tied vote counts
    return np.argmax(votes, axis=1)


def knn_eval(ref_x, ref_y, query_x, query_y, k=20, exclude_self=False) -> float:
    """Majority-vote kNN accuracy of ``query`` against ``ref``."""
    num_classes = int(max(np.max(ref_y), np.max(query_y))) + 1
    pred = knn_predict(ref_x, ref_y, query_x, k, exclude_self, num_classes)
    return float(np.mean(pred == np.asarray(query_y)))
