"""Vantage-point tree with bucket leaves and incremental insertion.

Each internal node keeps the vantage point plus four radii bracketing the
distances of its two subtrees to it::

    low_near <= d(item, vp) <= low_far      for items under ``low``
    high_near <= d(item, vp) <= high_far    for items under ``high``

Leaves are buckets holding members together with their distance to the
parent vantage point, so a query can skip a member when
``|d(q, vp) - d(member, vp)|`` already exceeds the current k-th distance.

Batch construction stops splitting at ``bucket_size`` members. Buckets grown
by :meth:`VpTree.insert` are only split once they exceed ``bucket_size**2``
members, which gives the split a larger sample to estimate its radii from.
"""

import math

import numpy as np

from .exceptions import InvalidInputError
from .oracle import KnnCandidates

MEDIAN = "median"
MIN_VARIANCE = "min-variance"
STRATEGIES = (MEDIAN, MIN_VARIANCE)

# relative slack under which two split objectives count as tied
_TIE_RTOL = 1e-12


def median_split(dists) -> int:
    n = len(dists)
    if n < 2:
        raise InvalidInputError("a split needs at least two distances")
    return (n + 1) // 2


def min_variance_split(dists) -> int:
    """Split index ``s`` minimizing ``s*var(d[:s]) + (n-s)*var(d[s:])``.

    ``dists`` must be sorted ascending. Both weighted variances are running
    sums of squared deviations, accumulated with Welford's update in one
    forward and one backward pass. Objectives within a relative ``1e-12`` of
    the minimum are ties; ties go to the ``s`` closest to ``n/2``, then to
    the smaller ``s``. If every distance is equal the split is
    ``ceil(n/2)``.
    """
    n = len(dists)
    if n < 2:
        raise InvalidInputError("a split needs at least two distances")
    if dists[0] == dists[-1]:
        return (n + 1) // 2

    left = [0.0] * (n + 1)
    mean = 0.0
    m2 = 0.0
    for i in range(n):
        x = dists[i]
        delta = x - mean
        mean += delta / (i + 1)
        m2 += delta * (x - mean)
        left[i + 1] = m2

    right = [0.0] * (n + 1)
    mean = 0.0
    m2 = 0.0
    for count, i in enumerate(range(n - 1, -1, -1), 1):
        x = dists[i]
        delta = x - mean
        mean += delta / count
        m2 += delta * (x - mean)
        right[i] = m2

    objective = [left[s] + right[s] for s in range(1, n)]
    best = min(objective)
    tol = _TIE_RTOL * left[n]
    candidates = [s for s in range(1, n) if objective[s - 1] <= best + tol]
    return min(candidates, key=lambda s: (abs(2 * s - n), s))


_SPLITTERS = {MEDIAN: median_split, MIN_VARIANCE: min_variance_split}


class VpLeaf:
    __slots__ = ("members",)

    def __init__(self, members):
        # (Item, distance to parent vantage point or None at the root)
        self.members = members


class VpNode:
    __slots__ = ("vp", "low_near", "low_far", "high_near", "high_far", "low", "high")

    def __init__(self, vp, low_near, low_far, high_near, high_far):
        self.vp = vp
        self.low_near = low_near
        self.low_far = low_far
        self.high_near = high_near
        self.high_far = high_far
        self.low = None
        self.high = None


class VpTree:
    """Exact k-NN index over any metric.

    Parameters
    ----------
    metric : callable
        ``metric(payload_a, payload_b) -> float``. Pass a
        :class:`~metricindex.metrics.CountingMetric` to measure cost.
    strategy : {"median", "min-variance"}
        How the sorted distances to a vantage point are cut in two.
    bucket_size : int
        Leaf capacity ``b`` for batch construction (>= 2).
    seed : int or numpy Generator, optional
        Drives the uniform choice of vantage points.
    """

    def __init__(self, metric, strategy=MIN_VARIANCE, bucket_size=16, seed=None):
        if strategy not in _SPLITTERS:
            raise InvalidInputError(f"unknown split strategy {strategy!r}")
        if bucket_size < 2:
            raise InvalidInputError(f"bucket_size must be >= 2, got {bucket_size}")
        self.metric = metric
        self.strategy = strategy
        self.bucket_size = bucket_size
        self._split_index = _SPLITTERS[strategy]
        self.rng = np.random.default_rng(seed)
        self.root = None
        self.size = 0

    def __len__(self):
        return self.size

    # -- construction -------------------------------------------------------

    def _split(self, members):
        """Turn ``members`` into an internal node; returns it and the two halves."""
        metric = self.metric
        pick = int(self.rng.integers(len(members)))
        vp = members[pick][0]
        vpp = vp.payload
        scored = [
            (metric(item.payload, vpp), item.id, item)
            for j, (item, _) in enumerate(members)
            if j != pick
        ]
        scored.sort(key=lambda t: (t[0], t[1]))
        dists = [t[0] for t in scored]
        s = self._split_index(dists)
        node = VpNode(vp, dists[0], dists[s - 1], dists[s], dists[-1])
        low = [(item, d) for d, _, item in scored[:s]]
        high = [(item, d) for d, _, item in scored[s:]]
        return node, low, high

    def build(self, items):
        """Batch-build from ``items``, replacing any existing contents."""
        items = list(items)
        if not items:
            raise InvalidInputError("cannot build a VP-tree from no items")
        b = self.bucket_size
        self.size = len(items)
        members = [(item, None) for item in items]
        if len(members) <= b:
            self.root = VpLeaf(members)
            return self
        self.root, low, high = self._split(members)
        stack = [(self.root, "low", low), (self.root, "high", high)]
        while stack:
            parent, side, group = stack.pop()
            if len(group) <= b:
                setattr(parent, side, VpLeaf(group))
                continue
            node, low, high = self._split(group)
            setattr(parent, side, node)
            stack.append((node, "low", low))
            stack.append((node, "high", high))
        return self

    def insert(self, item) -> None:
        """Add one item, widening radii on the way down to its bucket."""
        self.size += 1
        if self.root is None:
            self.root = VpLeaf([(item, None)])
            return
        metric = self.metric
        xp = item.payload
        parent = None
        side = None
        p = self.root
        dist = None
        while isinstance(p, VpNode):
            dist = metric(xp, p.vp.payload)
            parent = p
            if dist < (p.low_far + p.high_near) / 2:
                p.low_far = max(dist, p.low_far)
                p.low_near = min(dist, p.low_near)
                side = "low"
                p = p.low
            else:
                p.high_far = max(dist, p.high_far)
                p.high_near = min(dist, p.high_near)
                side = "high"
                p = p.high
        p.members.append((item, dist))
        if len(p.members) > self.bucket_size ** 2:
            node, low, high = self._split(p.members)
            node.low = VpLeaf(low)
            node.high = VpLeaf(high)
            if parent is None:
                self.root = node
            else:
                setattr(parent, side, node)

    # -- queries ------------------------------------------------------------

    def knn(self, q, k: int) -> list:
        """Exact ``k`` nearest neighbors of item ``q``."""
        knn = KnnCandidates(k)
        if self.root is None:
            return []
        metric = self.metric
        qp = q.payload
        # (subtree, d(q, parent vp), near, far); bounds re-checked when popped
        stack = [(self.root, None, 0.0, math.inf)]
        while stack:
            p, dq, near, far = stack.pop()
            tau = knn.kth
            if dq is not None and (dq + tau < near or dq - tau > far):
                continue
            if isinstance(p, VpLeaf):
                if dq is None or not p.members or p.members[0][1] is None:
                    for item, _ in p.members:
                        knn.push(item.id, metric(item.payload, qp))
                    continue
                # cheapest lower bound first, so the scan can stop early
                for lb, item in sorted(((abs(dq - c), it) for it, c in p.members),
                                       key=lambda t: t[0]):
                    if lb > knn.kth:
                        break
                    knn.push(item.id, metric(item.payload, qp))
                continue
            d = metric(p.vp.payload, qp)
            knn.push(p.vp.id, d)
            low = (p.low, d, p.low_near, p.low_far)
            high = (p.high, d, p.high_near, p.high_far)
            # the nearer side is popped first
            if d < (p.low_far + p.high_near) / 2:
                stack.append(high)
                stack.append(low)
            else:
                stack.append(low)
                stack.append(high)
        return knn.result()

    # -- introspection ------------------------------------------------------

    def items(self):
        """All indexed items, in no particular order."""
        out = []
        stack = [self.root] if self.root is not None else []
        while stack:
            p = stack.pop()
            if isinstance(p, VpLeaf):
                out.extend(item for item, _ in p.members)
            else:
                out.append(p.vp)
                stack.append(p.low)
                stack.append(p.high)
        return out

    def stats(self) -> dict:
        internal = leaves = depth = 0
        largest = 0
        stack = [(self.root, 0)] if self.root is not None else []
        while stack:
            p, level = stack.pop()
            depth = max(depth, level)
            if isinstance(p, VpLeaf):
                leaves += 1
                largest = max(largest, len(p.members))
            else:
                internal += 1
                stack.append((p.low, level + 1))
                stack.append((p.high, level + 1))
        return {"internal": internal, "leaves": leaves, "depth": depth,
                "largest_bucket": largest, "size": self.size}
