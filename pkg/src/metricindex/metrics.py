"""Items, distance metrics and the distance-call counter.

Every index in this package touches data only through a metric: a callable
taking two payloads and returning a nonnegative float. Wrapping a metric in
:class:`CountingMetric` records how many evaluations an operation cost, which
is the unit all benchmarks are reported in.

Payload kinds by metric:

* ``euclidean``: 1-d ``numpy.ndarray`` of floats, fixed dimension.
* ``levenshtein``: ``bytes``.
* ``lz-jaccard``: ``frozenset`` of ``bytes`` phrases, as produced by
  :func:`lz_set`. Use :func:`lzjd` to compare raw byte strings directly.
"""

import math
import threading
from typing import Any, Callable, NamedTuple

import numpy as np

from .exceptions import InvalidInputError

METRIC_KINDS = ("euclidean", "levenshtein", "lz-jaccard")


class Item(NamedTuple):
    """One indexed datum. ``id`` must be unique within a collection."""

    id: int
    payload: Any


def euclidean(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return math.sqrt(float(diff.dot(diff)))


def levenshtein(a: bytes, b: bytes) -> int:
    """Unit-cost edit distance (insert, delete, substitute) between byte strings.

    Strings are compared byte by byte; ``str`` arguments are UTF-8 encoded
    first, so no Unicode normalization takes place.
    """
    if isinstance(a, str):
        a = a.encode("utf-8")
    if isinstance(b, str):
        b = b.encode("utf-8")
    if a == b:
        return 0
    # common prefix/suffix never change the distance
    lo = 0
    top = min(len(a), len(b))
    while lo < top and a[lo] == b[lo]:
        lo += 1
    ea, eb = len(a), len(b)
    while ea > lo and eb > lo and a[ea - 1] == b[eb - 1]:
        ea -= 1
        eb -= 1
    a = a[lo:ea]
    b = b[lo:eb]
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cost = prev[j - 1] + (ca != cb)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            if ins < cost:
                cost = ins
            if dele < cost:
                cost = dele
            cur.append(cost)
        prev = cur
    return prev[-1]


def lz_set(data: bytes) -> frozenset:
    """Split ``data`` into the set of Lempel-Ziv phrases.

    Scans left to right growing the current phrase one byte at a time. A
    phrase not yet in the set is added and a new phrase starts at the next
    byte. A trailing phrase that is already in the set is dropped.

    >>> sorted(lz_set(b"aaaa"))
    [b'a', b'aa']
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    phrases = set()
    start = 0
    end = 1
    n = len(data)
    while end <= n:
        phrase = data[start:end]
        if phrase in phrases:
            end += 1
        else:
            phrases.add(phrase)
            start = end
            end = start + 1
    return frozenset(phrases)


def jaccard_distance(a: frozenset, b: frozenset) -> float:
    """``1 - |a & b| / |a | b|``; two empty sets are at distance 0."""
    union = len(a | b)
    if union == 0:
        return 0.0
    return 1.0 - len(a & b) / union


def lzjd(a: bytes, b: bytes) -> float:
    """Jaccard distance between the LZ phrase sets of two byte strings."""
    return jaccard_distance(lz_set(a), lz_set(b))


class Metric:
    """A named distance function over payloads."""

    def __init__(self, kind: str, fn: Callable[[Any, Any], float]):
        self.kind = kind
        self.fn = fn

    def __call__(self, a, b) -> float:
        return self.fn(a, b)

    def __repr__(self):
        return f"Metric({self.kind!r})"


_FUNCTIONS = {
    "euclidean": euclidean,
    "levenshtein": levenshtein,
    "lz-jaccard": jaccard_distance,
}


def get_metric(kind: str) -> Metric:
    try:
        return Metric(kind, _FUNCTIONS[kind])
    except KeyError:
        raise InvalidInputError(
            f"unknown metric {kind!r}; expected one of {', '.join(METRIC_KINDS)}"
        ) from None


class CountingMetric:
    """Wraps a metric and tallies every evaluation.

    The tally is guarded by a lock so concurrent callers never lose an
    increment.
    """

    def __init__(self, inner):
        self.inner = inner
        self.kind = getattr(inner, "kind", None)
        self._count = 0
        self._lock = threading.Lock()

    def __call__(self, a, b) -> float:
        value = self.inner(a, b)
        with self._lock:
            self._count += 1
        return value

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self):
        return f"CountingMetric({self.inner!r}, count={self._count})"


def counted(metric) -> CountingMetric:
    return CountingMetric(metric)


def reset_count(cm: CountingMetric) -> None:
    cm.reset()


def read_count(cm: CountingMetric) -> int:
    return cm.count
