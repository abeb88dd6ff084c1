"""Random Ball Cover index with incremental growth of the representative set.

A random subset of about ``sqrt(n)`` items act as representatives. Every
other item is owned by its nearest representative, which caches the
distance to it; ``psi[r]`` is the largest such cached distance (the radius of
the ball around ``r``).
"""

import heapq
import math

import numpy as np

from .exceptions import InvalidInputError
from .oracle import KnnCandidates, Neighbor, _check_k


def _by_distance(pair):
    return pair[0], pair[1].id


class RbcIndex:
    """Random Ball Cover over an arbitrary metric.

    Attributes
    ----------
    reps : list of Item
        Representatives, in order of promotion.
    owned : dict
        ``rep id -> list of (Item, cached distance to the rep)``.
    psi : dict
        ``rep id -> max cached distance`` (0 when the rep owns nothing).
    """

    def __init__(self, metric, seed=None):
        self.metric = metric
        self.rng = np.random.default_rng(seed)
        self.reps = []
        self.owned = {}
        self.psi = {}
        self.owner = {}
        self.n = 0

    def __len__(self):
        return self.n

    # -- construction -------------------------------------------------------

    def build(self, items):
        """Sample ``ceil(sqrt(n))`` representatives and assign the rest."""
        items = list(items)
        if not items:
            raise InvalidInputError("cannot build an RBC index from no items")
        n = len(items)
        m = math.isqrt(n - 1) + 1
        picked = self.rng.choice(n, size=m, replace=False)
        chosen = set(int(i) for i in picked)
        self.reps = [items[int(i)] for i in picked]
        self.owned = {r.id: [] for r in self.reps}
        self.psi = {r.id: 0.0 for r in self.reps}
        self.owner = {}
        self.n = n
        for j, item in enumerate(items):
            if j in chosen:
                continue
            d, rep = self._nearest_rep(item.payload)
            self._adopt(rep.id, item, d)
        return self

    def _rep_distances(self, payload):
        metric = self.metric
        return [(metric(r.payload, payload), r) for r in self.reps]

    def _nearest_rep(self, payload):
        return min(self._rep_distances(payload), key=_by_distance)

    def _adopt(self, rep_id, item, d):
        self.owned[rep_id].append((item, d))
        self.owner[item.id] = rep_id
        if d > self.psi[rep_id]:
            self.psi[rep_id] = d

    def insert(self, item) -> None:
        """Add ``item`` and, when ``n`` becomes a perfect square, promote a new representative."""
        if not self.reps:
            self.reps = [item]
            self.owned = {item.id: []}
            self.psi = {item.id: 0.0}
            self.n = 1
            return
        d, rep = self._nearest_rep(item.payload)
        self._adopt(rep.id, item, d)
        self.n += 1
        root = math.isqrt(self.n)
        if root * root == self.n:
            self._expand()

    def _expand(self):
        pool = [(rid, j) for rid, members in self.owned.items() for j in range(len(members))]
        if not pool:
            return
        rid_old, j = pool[int(self.rng.integers(len(pool)))]
        new_rep, _ = self.owned[rid_old].pop(j)
        del self.owner[new_rep.id]
        self.psi[rid_old] = max((c for _, c in self.owned[rid_old]), default=0.0)

        search_radius = max(self.psi.values())
        candidates = self.radius(new_rep, search_radius)

        self.reps.append(new_rep)
        self.owned[new_rep.id] = []
        self.psi[new_rep.id] = 0.0
        rep_ids = set(self.owned)
        moved = {}
        for nb in candidates:
            if nb.id in rep_ids:
                continue
            rid = self.owner[nb.id]
            moved.setdefault(rid, {})[nb.id] = nb.distance
        changed = set()
        for rid, dist_new in moved.items():
            keep = []
            for member, cached in self.owned[rid]:
                dn = dist_new.get(member.id)
                if dn is not None and cached > dn:
                    self._adopt(new_rep.id, member, dn)
                    changed.add(rid)
                else:
                    keep.append((member, cached))
            self.owned[rid] = keep
        for rid in changed:
            self.psi[rid] = max((c for _, c in self.owned[rid]), default=0.0)

    # -- queries ------------------------------------------------------------

    def _kth_bound(self, rep_dists, k):
        """Upper bound on the k-th neighbor distance from representative distances.

        With ``k <= |R|`` this is the k-th representative distance. Otherwise
        the k-th smallest of ``d(q, r) + d(l, r)`` over every indexed item,
        which needs no metric calls and is never below the true value. In that
        case the representatives alone cannot fill the list, so callers
        compare against it inclusively.
        """
        if k <= len(rep_dists):
            return rep_dists[k - 1][0]
        bounds = [qr for qr, _ in rep_dists]
        for qr, r in rep_dists:
            bounds.extend(qr + c for _, c in self.owned[r.id])
        if k > len(bounds):
            return math.inf
        return heapq.nsmallest(k, bounds)[-1]

    def knn_original(self, q, k: int) -> list:
        """Two-bound pruning of whole balls, then a scan of the survivors."""
        _check_k(k)
        if not self.reps:
            return []
        metric = self.metric
        qp = q.payload
        rep_dists = sorted(self._rep_distances(qp), key=_by_distance)
        gamma = self._kth_bound(rep_dists, k)
        inclusive = k > len(rep_dists)
        knn = KnnCandidates(k)
        survivors = []
        for qr, r in rep_dists:
            knn.push(r.id, qr)
            if inclusive:
                keep = qr <= gamma + self.psi[r.id] and qr <= 3 * gamma
            else:
                keep = qr < gamma + self.psi[r.id] and qr < 3 * gamma
            if keep:
                survivors.append(r.id)
        for rid in survivors:
            for member, _ in self.owned[rid]:
                knn.push(member.id, metric(member.payload, qp))
        return knn.result()

    def knn_improved(self, q, k: int) -> list:
        """Visit balls nearest first, pruning balls and members against the running k-th distance."""
        _check_k(k)
        if not self.reps:
            return []
        metric = self.metric
        qp = q.payload
        rep_dists = sorted(self._rep_distances(qp), key=_by_distance)
        gamma3 = 3 * self._kth_bound(rep_dists, k)
        inclusive = k > len(rep_dists)
        knn = KnnCandidates(k)
        qr1, r1 = rep_dists[0]
        knn.push(r1.id, qr1)
        for member, _ in self.owned[r1.id]:
            knn.push(member.id, metric(member.payload, qp))
        for qr, r in rep_dists[1:]:
            knn.push(r.id, qr)
            if not qr < knn.kth + self.psi[r.id]:
                continue
            if qr > gamma3 or (qr == gamma3 and not inclusive):
                continue
            for member, cached in self.owned[r.id]:
                if qr < knn.kth + cached:
                    knn.push(member.id, metric(member.payload, qp))
        return knn.result()

    def knn(self, q, k: int, method: str = "improved") -> list:
        if method == "improved":
            return self.knn_improved(q, k)
        if method == "original":
            return self.knn_original(q, k)
        raise InvalidInputError(f"unknown RBC search method {method!r}")

    def radius(self, q, r: float) -> list:
        """All items within ``r`` of ``q``, inclusive, sorted by (distance, id)."""
        if r < 0:
            raise InvalidInputError(f"radius must be >= 0, got {r}")
        metric = self.metric
        qp = q.payload
        out = []
        for qr, rep in self._rep_distances(qp):
            if qr <= r:
                out.append(Neighbor(rep.id, qr))
            if qr > r + self.psi[rep.id]:
                continue
            for member, cached in self.owned[rep.id]:
                if abs(qr - cached) > r:
                    continue
                d = metric(member.payload, qp)
                if d <= r:
                    out.append(Neighbor(member.id, d))
        out.sort(key=lambda nb: (nb.distance, nb.id))
        return out

    # -- introspection ------------------------------------------------------

    def items(self):
        out = list(self.reps)
        for members in self.owned.values():
            out.extend(item for item, _ in members)
        return out
