"""Hard Augment: keep the highest-loss view pair out of ``m`` candidates.

Candidate views are ranked on cheap downsampled copies; only the winning
pair is used at full resolution for the gradient step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .imaging import downsample


class SelectionError(ValueError):
    pass


class PairIndex(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True)
class SelectionConfig:
    num_positives: int
    selection_resolution: int
    train_resolution: int
    cost_ratio: float = 6.0

    def __post_init__(self):
        if self.num_positives < 2:
            raise SelectionError(f"num_positives must be >= 2, got {self.num_positives}")
        if self.selection_resolution < 0 or self.selection_resolution > self.train_resolution:
            raise SelectionError(
                f"need 0 <= selection_resolution <= train_resolution, got "
                f"{self.selection_resolution} > {self.train_resolution}"
            )
        if not self.cost_ratio > 0:
            raise SelectionError(f"cost_ratio must be > 0, got {self.cost_ratio}")


@dataclass
class SelectionOutcome:
    pairs: np.ndarray  # (N, 2) chosen (i, j) per sample
    losses: np.ndarray  # (N, P) loss of every pair, in enumerate_pairs order

    @property
    def chosen_losses(self):
        idx = pair_position(self.pairs[:, 0], self.pairs[:, 1], self.num_positives)
        return self.losses[np.arange(len(self.pairs)), idx]

    @property
    def num_positives(self):
        return num_positives_for(self.losses.shape[1])


def enumerate_pairs(m) -> list[PairIndex]:
    if m < 2:
        raise SelectionError(f"need at least 2 views to form a pair, got {m}")
    return [PairIndex(i, j) for i, j in combinations(range(m), 2)]


def num_positives_for(num_pairs):
    m = (1 + math.isqrt(1 + 8 * num_pairs)) // 2
    if m * (m - 1) // 2 != num_pairs or m < 2:
        raise SelectionError(f"{num_pairs} is not a pair count C(m, 2)")
    return m


def pair_position(i, j, m):
    """Position of pair ``(i, j)`` in lexicographic ``enumerate_pairs(m)`` order."""
    return i * (2 * m - i - 1) // 2 + (j - i - 1)


def select_hardest(losses) -> PairIndex:
    """Pair with the largest loss; ties go to the lexicographically first pair."""
    losses = np.asarray(losses)
    pairs = enumerate_pairs(num_positives_for(losses.shape[0]))
    bad = np.flatnonzero(~np.isfinite(losses))
    if bad.size:
        raise SelectionError(f"non-finite loss {losses[bad[0]]} for pair {tuple(pairs[bad[0]])}")
    return pairs[int(np.argmax(losses))]


def select_hardest_batch(loss_matrix) -> np.ndarray:
    """Row-wise ``select_hardest`` over an (N, P) matrix; returns (N, 2) ints."""
    loss_matrix = np.asarray(loss_matrix)
    pairs = np.array(enumerate_pairs(num_positives_for(loss_matrix.shape[1])))
    bad = np.argwhere(~np.isfinite(loss_matrix))
    if bad.size:
        n, p = bad[0]
        raise SelectionError(
            f"non-finite loss {loss_matrix[n, p]} for sample {n}, pair {tuple(pairs[p])}"
        )
    # argmax returns the first maximum, which is the tie-break rule
    return pairs[np.argmax(loss_matrix, axis=1)]


def selection_overhead(cfg: SelectionConfig) -> tuple[float, float]:
    """Return ``(kept_fraction, overhead)`` of a step with a low-resolution selection pass.

    ``kept_fraction = r^2 C / (r^2 C + m r_sel^2)`` and ``overhead = 1 - kept_fraction``.
    """
    train = cfg.train_resolution**2 * cfg.cost_ratio
    select = cfg.num_positives * cfg.selection_resolution**2
    kept = train / (train + select)
    return kept, 1.0 - kept


def pairwise_loss_matrix(outputs: Sequence, pair_loss: Callable) -> np.ndarray:
    """Evaluate ``pair_loss(outputs[i], outputs[j]) -> (N,)`` for every pair."""
    cols = [pair_loss(outputs[i], outputs[j]) for i, j in enumerate_pairs(len(outputs))]
    return np.stack(cols, axis=1)


def hard_select_batch(
    views: Sequence[np.ndarray],
    loss_oracle: Callable[[list], np.ndarray],
    cfg: SelectionConfig,
    downsampler: Callable = downsample,
) -> SelectionOutcome:
    """Choose the hardest pair per sample from ``m`` aligned view batches.

    ``loss_oracle`` receives the ``m`` downsampled view batches and returns the
    (N, P) pair-loss matrix in ``enumerate_pairs`` order.
    """
    m = len(views)
    if m != cfg.num_positives:
        raise SelectionError(f"got {m} views, config expects {cfg.num_positives}")
    n = views[0].shape[0]
    if any(v.shape[0] != n for v in views):
        raise SelectionError("view batches are not sample-aligned")
    small = [downsampler(v, cfg.selection_resolution) for v in views]
    losses = np.asarray(loss_oracle(small))
    if losses.shape != (n, m * (m - 1) // 2):
        raise SelectionError(f"loss oracle returned shape {losses.shape}")
    return SelectionOutcome(select_hardest_batch(losses), losses)


def gather_pair(views: Sequence[np.ndarray], pairs: np.ndarray):
    """Full-resolution views ``(v_i, v_j)`` for the chosen pair of every sample."""
    stacked = np.stack(views)  # (m, N, ...)
    rows = np.arange(stacked.shape[1])
    return stacked[pairs[:, 0], rows], stacked[pairs[:, 1], rows]
