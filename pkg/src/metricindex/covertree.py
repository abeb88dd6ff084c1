"""Simplified cover tree with a terminating insert and exact k-NN search.

Invariants kept by :meth:`CoverTree.insert`:

* leveling: ``child.level == parent.level - 1``
* covering: ``d(child, parent) <= covdist(parent) == 2**parent.level``

Together they give ``maxdist(p) <= 2 * covdist(p)`` for the maximum distance
from ``p`` to any descendant. Searches can prune with the exact maxdist
(computed lazily, cached, and paid for in metric calls) or with the
``2**(level + 1)`` bound, which never needs recomputing after inserts.
"""

import itertools
import math

from .exceptions import InvalidInputError
from .oracle import KnnCandidates, _check_k

MAXDIST = "maxdist"
LEVEL_BOUND = "level-bound"
LEGACY = "broken-legacy"
MODES = (MAXDIST, LEVEL_BOUND, LEGACY)


def covdist(node) -> float:
    return math.ldexp(1.0, node.level)


class CoverNode:
    __slots__ = ("item", "level", "children", "maxdist_cache", "parent", "stamp")

    def __init__(self, item, level, stamp):
        self.item = item
        self.level = level
        self.children = []
        self.maxdist_cache = None
        self.parent = None
        self.stamp = stamp

    def add_child(self, child):
        child.parent = self
        self.children.append(child)

    def descendants(self):
        stack = list(self.children)
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def __repr__(self):
        return f"CoverNode(id={self.item.id}, level={self.level}, children={len(self.children)})"


class CoverTree:
    """Cover tree over an arbitrary metric, built by repeated insertion.

    Parameters
    ----------
    metric : callable
        ``metric(payload_a, payload_b) -> float``.
    mode : {"maxdist", "level-bound", "broken-legacy"}
        Default pruning bound for :meth:`knn`. ``"broken-legacy"`` reproduces
        a known-wrong pruning test and exists only for regression tests.
    initial_level : int
        Level given to the very first node.
    """

    def __init__(self, metric, mode=MAXDIST, initial_level=0):
        if mode not in MODES:
            raise InvalidInputError(f"unknown cover tree mode {mode!r}")
        self.metric = metric
        self.mode = mode
        self.initial_level = initial_level
        self.root = None
        self.size = 0
        self._clock = itertools.count()
        # iterations of the leaf-raising loop during the latest insert
        self.last_raise_iterations = 0

    def __len__(self):
        return self.size

    def build(self, items):
        for item in items:
            self.insert(item)
        return self

    # -- insertion ----------------------------------------------------------

    def _new_node(self, item, level):
        return CoverNode(item, level, next(self._clock))

    def insert(self, item) -> None:
        self.size += 1
        self.last_raise_iterations = 0
        if self.root is None:
            self.root = self._new_node(item, self.initial_level)
            return
        metric = self.metric
        xp = item.payload
        p = self.root
        d = metric(p.item.payload, xp)
        if d <= covdist(p):
            self._insert_below(p, item)
            return

        if d <= 4 * covdist(p):
            visited = set()
            n_desc = self.size - 2  # everything except the new root and x
            while d > 2 * covdist(p) and n_desc > len(visited):
                leaf = self._oldest_leaf(p, visited)
                if leaf is None:
                    break
                visited.add(leaf.item.id)
                self._detach(leaf)
                leaf.level = p.level + 1
                leaf.children = []
                leaf.maxdist_cache = None
                leaf.add_child(p)
                p = leaf
                d = metric(p.item.payload, xp)
                self.last_raise_iterations += 1

        # x becomes the root; lift the old tree if x sits too far to cover it
        level = p.level + 1
        if d > math.ldexp(1.0, level):
            level = max(level, math.ceil(math.log2(d)))
            while d > math.ldexp(1.0, level):
                level += 1
            self._shift_levels(p, level - 1 - p.level)
        root = self._new_node(item, level)
        root.add_child(p)
        p.parent = root
        self.root = root

    def _insert_below(self, p, item):
        """Descend from ``p`` (which covers x) into the first covering child."""
        metric = self.metric
        xp = item.payload
        while True:
            p.maxdist_cache = None
            nxt = None
            for child in p.children:
                dc = metric(child.item.payload, xp)
                if dc <= covdist(child):
                    nxt = child
                    break
            if nxt is None:
                p.add_child(self._new_node(item, p.level - 1))
                return
            p = nxt

    def _oldest_leaf(self, p, visited):
        best = None
        for node in p.descendants():
            if node.children or node.item.id in visited:
                continue
            if best is None or node.stamp < best.stamp:
                best = node
        return best

    def _detach(self, node):
        parent = node.parent
        parent.children.remove(node)
        node.parent = None
        while parent is not None:
            parent.maxdist_cache = None
            parent = parent.parent

    def _shift_levels(self, p, delta):
        if delta <= 0:
            return
        p.level += delta
        for node in p.descendants():
            node.level += delta

    # -- maxdist ------------------------------------------------------------

    def maxdist(self, node) -> float:
        """Exact max distance from ``node`` to any descendant, cached on the node."""
        cached = node.maxdist_cache
        if cached is not None:
            return cached
        metric = self.metric
        pp = node.item.payload
        value = 0.0
        for desc in node.descendants():
            d = metric(desc.item.payload, pp)
            if d > value:
                value = d
        node.maxdist_cache = value
        return value

    # -- queries ------------------------------------------------------------

    def knn(self, q, k: int, mode=None) -> list:
        """Exact ``k`` nearest neighbors of item ``q``.

        Children are visited nearest first; a child subtree is entered only
        while the current k-th distance exceeds ``d(q, child) - bound(child)``.
        """
        _check_k(k)
        mode = self.mode if mode is None else mode
        if mode not in MODES:
            raise InvalidInputError(f"unknown cover tree mode {mode!r}")
        if self.root is None:
            return []
        metric = self.metric
        qp = q.payload
        knn = KnnCandidates(k)
        best = {}  # id -> item, used by the legacy test

        def bound(node):
            if mode == LEVEL_BOUND:
                return math.ldexp(1.0, node.level + 1)
            return self.maxdist(node)

        def visit(node, d):
            knn.push(node.item.id, d)
            best[node.item.id] = node.item
            scored = sorted(
                ((metric(c.item.payload, qp), c.item.id, c) for c in node.children),
                key=lambda t: (t[0], t[1]),
            )
            return iter(scored)

        root_d = metric(self.root.item.payload, qp)
        stack = [visit(self.root, root_d)]
        while stack:
            entry = next(stack[-1], None)
            if entry is None:
                stack.pop()
                continue
            dc, _, child = entry
            if mode == LEGACY:
                kth_id = knn.result()[-1].id
                lhs = knn.kth
                rhs = metric(best[kth_id].payload, child.item.payload) - self.maxdist(child)
            else:
                lhs = knn.kth
                rhs = dc - bound(child)
            if lhs > rhs:
                stack.append(visit(child, dc))
        return knn.result()

    # -- introspection ------------------------------------------------------

    def nodes(self):
        if self.root is None:
            return []
        return [self.root, *self.root.descendants()]

    def items(self):
        return [node.item for node in self.nodes()]
