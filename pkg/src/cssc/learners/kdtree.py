"""Exact k-nearest-neighbour search over a balanced k-d tree.

Neighbours are ordered by (squared Euclidean distance, insertion index), so
results match a brute-force scan exactly, ties included.

Search is best-first over the tree's leaf cells: every query ranks the leaves
by the squared distance to their bounding boxes and scans them in that order
until the next box lies strictly farther than its current k-th neighbour.
Queries advance in lock-step rounds, one leaf per query per round, which keeps
the inner loop vectorized across the whole query batch.
"""

from __future__ import annotations

import numpy as np

LEAF_SIZE = 32
# queries per block; bounds the (queries x leaves x dims) scratch array
QUERY_BLOCK = 1024


class KdTree:
    """k-d tree over ``points`` (n x d). ``payloads`` travel with the points.

    Splits use the axis of largest spread at the median; leaves hold at most
    ``leaf_size`` points.
    """

    def __init__(self, points, payloads=None, leaf_size: int = LEAF_SIZE):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.shape[0] == 0:
            raise ValueError("cannot build a k-d tree over zero points")
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        self.n, self.dim = pts.shape
        self.leaf_size = leaf_size
        self.payloads = None if payloads is None else list(payloads)
        if self.payloads is not None and len(self.payloads) != self.n:
            raise ValueError("payloads must match points in length")
        self.points = pts
        self.split_axis: list[int] = []
        self.split_value: list[float] = []
        self.children: list[tuple[int, int]] = []
        leaves = self._build(pts)
        self._pack(pts, leaves)

    def _build(self, pts) -> list[np.ndarray]:
        """Median splits; returns the index block of every leaf."""
        leaves = []
        stack = [(self._new_node(), np.arange(self.n))]
        while stack:
            node, idx = stack.pop()
            if idx.size <= self.leaf_size:
                leaves.append(idx)
                continue
            block = pts[idx]
            spread = block.max(axis=0) - block.min(axis=0)
            axis = int(np.argmax(spread))
            if spread[axis] == 0:
                leaves.append(idx)
                continue
            idx = idx[np.argsort(block[:, axis], kind="stable")]
            mid = idx.size // 2
            self.split_axis[node] = axis
            self.split_value[node] = float(pts[idx[mid], axis])
            left, right = self._new_node(), self._new_node()
            self.children[node] = (left, right)
            stack.append((right, idx[mid:]))
            stack.append((left, idx[:mid]))
        return leaves

    def _new_node(self) -> int:
        self.split_axis.append(-1)
        self.split_value.append(0.0)
        self.children.append((-1, -1))
        return len(self.split_axis) - 1

    def _pack(self, pts, leaves):
        width = max(idx.size for idx in leaves)
        n_leaves = len(leaves)
        self._leaf_points = np.full((n_leaves, width, self.dim), np.inf)
        self._leaf_ids = np.full((n_leaves, width), self.n, dtype=np.int64)
        self._box_lo = np.empty((n_leaves, self.dim))
        self._box_hi = np.empty((n_leaves, self.dim))
        for j, idx in enumerate(leaves):
            block = pts[idx]
            self._leaf_points[j, : idx.size] = block
            self._leaf_ids[j, : idx.size] = idx
            # boxes hug the points, not the cell, for tighter bounds
            self._box_lo[j] = block.min(axis=0)
            self._box_hi[j] = block.max(axis=0)

    @property
    def n_leaves(self) -> int:
        return self._leaf_ids.shape[0]

    def __len__(self) -> int:
        return self.n

    def query(self, x, k: int) -> tuple[np.ndarray, np.ndarray]:
        """The ``min(k, n)`` nearest points to ``x``: (squared distances, indices)."""
        d, i = self.query_many(np.asarray(x, dtype=np.float64).reshape(1, -1), k)
        return d[0], i[0]

    def query_many(self, queries, k: int) -> tuple[np.ndarray, np.ndarray]:
        Q = np.asarray(queries, dtype=np.float64)
        if Q.ndim == 1:
            Q = Q.reshape(-1, self.dim)
        if Q.shape[1] != self.dim:
            raise ValueError(f"query dimension {Q.shape[1]} does not match tree dimension {self.dim}")
        if k < 1:
            raise ValueError("k must be >= 1")
        k = min(k, self.n)
        m = Q.shape[0]
        best_d = np.full((m, k), np.inf)
        best_i = np.full((m, k), self.n, dtype=np.int64)
        for start in range(0, m, QUERY_BLOCK):
            stop = min(start + QUERY_BLOCK, m)
            best_d[start:stop], best_i[start:stop] = self._search_block(Q[start:stop], k)
        return best_d, best_i

    def _search_block(self, Q, k):
        m = Q.shape[0]
        gap = np.maximum(self._box_lo[None] - Q[:, None, :], 0.0) + np.maximum(Q[:, None, :] - self._box_hi[None], 0.0)
        bound = (gap * gap).sum(axis=2)
        order = np.argsort(bound, axis=1, kind="stable")
        bound = np.take_along_axis(bound, order, axis=1)
        best_d = np.full((m, k), np.inf)
        best_i = np.full((m, k), self.n, dtype=np.int64)
        active = np.arange(m)
        for r in range(self.n_leaves):
            # a box strictly beyond the k-th neighbour cannot improve it; equal
            # bounds are still scanned so lower-index ties are found
            keep = bound[active, r] <= best_d[active, k - 1]
            active = active[keep]
            if not active.size:
                break
            leaf = order[active, r]
            diff = Q[active, None, :] - self._leaf_points[leaf]
            dist = (diff * diff).sum(axis=2)
            cat_d = np.concatenate([best_d[active], dist], axis=1)
            cat_i = np.concatenate([best_i[active], self._leaf_ids[leaf]], axis=1)
            pick = np.lexsort((cat_i, cat_d), axis=1)[:, :k]
            best_d[active] = np.take_along_axis(cat_d, pick, axis=1)
            best_i[active] = np.take_along_axis(cat_i, pick, axis=1)
        return best_d, best_i


def kd_query(tree: KdTree, x, k: int) -> list:
    """Payloads of the ``k`` nearest points (indices when the tree has no payloads)."""
    _, idx = tree.query(x, k)
    if tree.payloads is None:
        return [int(i) for i in idx]
    return [tree.payloads[i] for i in idx]
