"""Iterated trapezoid rules on ordered time simplices.

A *group* is a descending run of times ``t >= x_1 >= x_2 >= ... >= 0`` on
the uniform grid ``x = i * h``. The outermost time may be pinned at ``t``
(it then carries unit weight); every free time is integrated with the
trapezoid rule on ``[0, parent]``. Nodes are returned as integer grid
indices together with their weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureScheme:
    """Uniform step ``h``; the rule is the iterated trapezoid on ordered simplices."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("quadrature step must be positive")

    def index(self, t: float) -> int:
        """Grid index of ``t``; raises if ``t`` is not on the grid."""
        n = int(round(t / self.h))
        if n < 0 or abs(n * self.h - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not on the grid with step {self.h}")
        return n


def trapezoid_weights(upper: int, h: float) -> np.ndarray:
    """Weights of ``i = 0..upper`` for the trapezoid rule on ``[0, upper h]``."""
    if upper == 0:
        return np.zeros(1)
    w = np.full(upper + 1, h)
    w[0] = w[-1] = h / 2
    return w


def _expand(idx: np.ndarray, w: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Append one more descending variable bounded by the current last column."""
    last = idx[:, -1]
    counts = last + 1
    rep = np.repeat(np.arange(len(idx)), counts)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    new = np.arange(counts.sum()) - offsets
    bound = last[rep]
    wn = np.where((new == 0) | (new == bound), h / 2, h)
    wn = np.where(bound == 0, 0.0, wn)
    return np.column_stack([idx[rep], new]), w[rep] * wn


def free_simplex(n_vars: int, upper: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """All descending index tuples of length ``n_vars`` bounded by ``upper``."""
    if n_vars == 0:
        return np.zeros((1, 0), dtype=np.int64), np.ones(1)
    idx = np.arange(upper + 1, dtype=np.int64)[:, None]
    w = trapezoid_weights(upper, h)
    for _ in range(n_vars - 1):
        idx, w = _expand(idx, w, h)
    keep = w != 0
    return idx[keep], w[keep]


def group_nodes(size: int, upper: int, pinned: bool, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes of a group of ``size`` times, optionally with the first pinned at ``upper``."""
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64), np.ones(1)
    if not pinned:
        return free_simplex(size, upper, h)
    idx, w = free_simplex(size - 1, upper, h)
    head = np.full((len(idx), 1), upper, dtype=np.int64)
    return np.column_stack([head, idx]), w


def block_rest_nodes(n_rest: int, upper: int, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rest simplex shared by all blocks, sorted by its first column.

    The first column carries interior weight ``h`` (``h/2`` at zero); the
    caller halves rows that sit on the block's own boundary. ``ends[i]`` is
    the number of rows with first index ``<= i``.
    """
    rest_idx = np.arange(upper + 1, dtype=np.int64)[:, None]
    rest_w = np.where(rest_idx[:, 0] == 0, h / 2, h).astype(float)
    for _ in range(n_rest - 1):
        rest_idx, rest_w = _expand(rest_idx, rest_w, h)
    order = np.argsort(rest_idx[:, 0], kind="stable")
    rest_idx, rest_w = rest_idx[order], rest_w[order]
    ends = np.searchsorted(rest_idx[:, 0], np.arange(upper + 1), side="right")
    return rest_idx, rest_w, ends


def iter_group_blocks(size: int, upper: int, pinned: bool, h: float):
    """Yield the nodes of a group in blocks sharing their first free time.

    Each block is ``(head, block_index, head_weight, take, rest_w)``:
    ``head`` lists the pinned index (if any), ``block_index`` is the first
    free time, and ``take`` selects the block's rest nodes (a simplex bounded
    by the block index) from :func:`block_rest_nodes` with the same
    ``n_rest = size - pinned - 1``; ``rest_w`` are their weights.
    """
    n_free = size - int(pinned)
    if n_free < 1:
        raise ValueError("blocking needs at least one free variable")
    head = [upper] if pinned else []
    outer_w = trapezoid_weights(upper, h)
    n_rest = n_free - 1
    if n_rest == 0:
        for i in range(upper + 1):
            if outer_w[i] == 0:
                continue
            yield head, i, outer_w[i], np.zeros(1, dtype=np.int64), np.ones(1)
        return
    rest_idx, rest_w, ends = block_rest_nodes(n_rest, upper, h)
    # block 0 would bound every rest time by zero: zero weight
    for i in range(1, upper + 1):
        if outer_w[i] == 0:
            continue
        rw = rest_w[: ends[i]].copy()
        rw[rest_idx[: ends[i], 0] == i] *= 0.5
        take = np.flatnonzero(rw)
        yield head, i, outer_w[i], take, rw[take]
