"""Exhaustive structural checks for the three indexes.

Each check recomputes what an index claims from scratch with the metric it is
given (normally the raw, uncounted metric) and raises :class:`AuditError` on
the first violation. They are O(n * depth) and meant for tests.
"""

import math

from .covertree import covdist
from .exceptions import AuditError
from .vptree import VpLeaf, VpNode


def _check(cond, message):
    if not cond:
        raise AuditError(message)


def _subtree_items(node):
    out = []
    stack = [node]
    while stack:
        p = stack.pop()
        if isinstance(p, VpLeaf):
            out.extend(item for item, _ in p.members)
        else:
            out.append(p.vp)
            stack.append(p.low)
            stack.append(p.high)
    return out


def audit_vptree(tree, metric, atol=0.0):
    """Verify every node's four radii and every bucket's cached distances."""
    if tree.root is None:
        _check(tree.size == 0, "empty tree with nonzero size")
        return
    seen = []
    b = tree.bucket_size
    stack = [(tree.root, None)]
    while stack:
        p, parent_vp = stack.pop()
        if isinstance(p, VpLeaf):
            _check(len(p.members) >= 1, "empty bucket leaf")
            _check(len(p.members) <= max(b, b * b), f"bucket of {len(p.members)} exceeds b^2")
            for item, cached in p.members:
                seen.append(item.id)
                if parent_vp is None:
                    _check(cached is None, "root bucket member has a cached distance")
                else:
                    d = metric(item.payload, parent_vp.payload)
                    _check(abs(d - cached) <= atol,
                           f"stale cache for item {item.id}: {cached} vs {d}")
            continue
        seen.append(p.vp.id)
        _check(0 <= p.low_near <= p.low_far <= p.high_near <= p.high_far,
               f"bounds out of order at vp {p.vp.id}")
        vpp = p.vp.payload
        for side, near, far in ((p.low, p.low_near, p.low_far),
                                (p.high, p.high_near, p.high_far)):
            for item in _subtree_items(side):
                d = metric(item.payload, vpp)
                _check(near - atol <= d <= far + atol,
                       f"item {item.id} at {d} outside [{near}, {far}] of vp {p.vp.id}")
        stack.append((p.low, p.vp))
        stack.append((p.high, p.vp))
    _check(len(seen) == tree.size, f"tree holds {len(seen)} items, size says {tree.size}")
    _check(len(set(seen)) == len(seen), "an item appears twice")


def audit_rbc(index, metric, atol=0.0, nearest=False):
    """Verify the ownership partition, cached distances and radii.

    With ``nearest=True`` also check that each item is owned by one of its
    nearest representatives.
    """
    rep_ids = [r.id for r in index.reps]
    _check(len(set(rep_ids)) == len(rep_ids), "duplicate representative")
    _check(set(index.owned) == set(rep_ids), "ownership lists do not match R")
    owned_ids = []
    for r in index.reps:
        members = index.owned[r.id]
        radius = 0.0
        for item, cached in members:
            owned_ids.append(item.id)
            d = metric(item.payload, r.payload)
            _check(abs(d - cached) <= atol, f"stale cache for item {item.id}")
            _check(index.owner.get(item.id) == r.id, f"owner map wrong for item {item.id}")
            radius = max(radius, cached)
            if nearest:
                best = min(metric(item.payload, s.payload) for s in index.reps)
                _check(d <= best + atol, f"item {item.id} not owned by a nearest representative")
        _check(index.psi[r.id] == radius, f"psi of {r.id} is {index.psi[r.id]}, expected {radius}")
    _check(len(set(owned_ids)) == len(owned_ids), "item owned twice")
    _check(not set(owned_ids) & set(rep_ids), "representative owned by another")
    _check(len(owned_ids) + len(rep_ids) == index.n,
           f"partition covers {len(owned_ids) + len(rep_ids)} of {index.n} items")


def audit_covertree(tree, metric, atol=0.0):
    """Verify leveling, covering and any cached maxdist values."""
    if tree.root is None:
        _check(tree.size == 0, "empty tree with nonzero size")
        return
    _check(tree.root.parent is None, "root has a parent")
    count = 0
    stack = [tree.root]
    ids = set()
    while stack:
        p = stack.pop()
        count += 1
        ids.add(p.item.id)
        for child in p.children:
            _check(child.parent is p, f"parent pointer wrong under {p.item.id}")
            _check(child.level == p.level - 1,
                   f"child {child.item.id} level {child.level} under level {p.level}")
            d = metric(child.item.payload, p.item.payload)
            _check(d <= covdist(p) + atol,
                   f"child {child.item.id} at {d} outside covdist {covdist(p)}")
        exact = max((metric(desc.item.payload, p.item.payload) for desc in p.descendants()),
                    default=0.0)
        _check(exact <= math.ldexp(1.0, p.level + 1) + atol,
               f"maxdist {exact} above 2*covdist at {p.item.id}")
        if p.maxdist_cache is not None:
            _check(abs(p.maxdist_cache - exact) <= atol,
                   f"cached maxdist {p.maxdist_cache} != {exact} at {p.item.id}")
        stack.extend(p.children)
    _check(count == tree.size, f"tree holds {count} nodes, size says {tree.size}")
