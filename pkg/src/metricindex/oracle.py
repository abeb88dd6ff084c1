"""Brute-force ground truth and the bounded neighbor list shared by all indexes.

Ordering everywhere is by distance, then ascending item id.
"""

import heapq
import math
from typing import NamedTuple

from .exceptions import InvalidInputError


class Neighbor(NamedTuple):
    id: int
    distance: float


class KnnCandidates:
    """Keeps the ``k`` best (distance, id) pairs seen so far.

    ``kth`` is the current k-th smallest distance, or ``inf`` while fewer
    than ``k`` candidates have been offered; indexes prune against it.
    """

    __slots__ = ("k", "_heap")

    def __init__(self, k: int):
        if k < 1:
            raise InvalidInputError(f"k must be >= 1, got {k}")
        self.k = k
        # max-heap on (distance, id) via negation
        self._heap = []

    def __len__(self):
        return len(self._heap)

    def push(self, item_id: int, distance: float) -> None:
        heap = self._heap
        if len(heap) < self.k:
            heapq.heappush(heap, (-distance, -item_id))
            return
        worst_d, worst_id = heap[0]
        if distance < -worst_d or (distance == -worst_d and item_id < -worst_id):
            heapq.heapreplace(heap, (-distance, -item_id))

    @property
    def kth(self) -> float:
        if len(self._heap) < self.k:
            return math.inf
        return -self._heap[0][0]

    def result(self) -> list:
        pairs = sorted((-d, -i) for d, i in self._heap)
        return [Neighbor(i, d) for d, i in pairs]


def _check_k(k):
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")


def brute_knn(collection, metric, q, k: int) -> list:
    """Exact k nearest neighbors of ``q`` by scanning every item once."""
    _check_k(k)
    if not collection:
        raise InvalidInputError("brute_knn needs a nonempty collection")
    knn = KnnCandidates(k)
    qp = q.payload
    for item in collection:
        knn.push(item.id, metric(item.payload, qp))
    return knn.result()


def brute_radius(collection, metric, q, r: float) -> list:
    """Every item within distance ``r`` of ``q`` (inclusive), sorted."""
    if r < 0:
        raise InvalidInputError(f"radius must be >= 0, got {r}")
    qp = q.payload
    out = []
    for item in collection:
        d = metric(item.payload, qp)
        if d <= r:
            out.append(Neighbor(item.id, d))
    out.sort(key=lambda nb: (nb.distance, nb.id))
    return out


class BruteForceIndex:
    """Linear scan behind the same interface as the real indexes.

    Inserting costs nothing; each query evaluates the metric once per item.
    """

    def __init__(self, metric):
        self.metric = metric
        self.items = []

    def __len__(self):
        return len(self.items)

    def build(self, items):
        self.items = list(items)
        return self

    def insert(self, item):
        self.items.append(item)

    def knn(self, q, k):
        return brute_knn(self.items, self.metric, q, k)

    def radius(self, q, r):
        return brute_radius(self.items, self.metric, q, r)
