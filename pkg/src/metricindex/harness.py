"""Experiment runner: construction cost, query efficiency, interleaved workloads.

Every run wraps the metric in a :class:`CountingMetric` and reads the tally
at phase boundaries, so construction and query costs add up to the
wrapper total. Query answers are checked against brute force; a mismatch
raises :class:`CorrectnessError`.
"""

import csv
import io
import json
import math
import statistics
from dataclasses import asdict, dataclass, field

import numpy as np

from .covertree import LEGACY, LEVEL_BOUND, MAXDIST, CoverTree
from .datasets import split_shuffle
from .exceptions import ConfigError, CorrectnessError
from .metrics import METRIC_KINDS, CountingMetric, get_metric
from .oracle import BruteForceIndex
from .rbc import RbcIndex
from .vptree import MEDIAN, MIN_VARIANCE, VpTree

INDEX_KINDS = ("vp-median", "vp-mv", "rbc-orig", "rbc-imp", "cover", "cover-b", "brute")
MODES = ("batch", "half-batch", "incremental")
DEFAULT_KS = (1, 5, 25, 100)

CSV_COLUMNS = (
    "index", "metric", "mode", "k", "rw_ratio", "seed", "n",
    "construction_dists", "query_dists_mean", "baseline_dists",
    "ratio_incl_construction", "ratio_excl_construction",
)


@dataclass
class ExperimentConfig:
    index: str = "vp-mv"
    metric: str = "euclidean"
    mode: str = "batch"
    ks: tuple = DEFAULT_KS
    queries: int = 1000
    rw_ratio: str = "100:1"
    insert_cap: int = 1000
    seed: int = 0
    bucket_size: int = 16
    audit_cap: int = 20000
    legacy_cover_bug: bool = False

    def validate(self):
        if self.index not in INDEX_KINDS:
            raise ConfigError(f"unknown index {self.index!r}; choose from {', '.join(INDEX_KINDS)}")
        if self.metric not in METRIC_KINDS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not self.ks or any(int(k) < 1 for k in self.ks):
            raise ConfigError(f"k values must be >= 1, got {self.ks}")
        if self.queries < 0 or self.insert_cap < 0:
            raise ConfigError("queries and insert_cap must be >= 0")
        if self.bucket_size < 2:
            raise ConfigError("bucket size must be >= 2")
        parse_rw(self.rw_ratio)
        return self


@dataclass
class ResultRow:
    index: str
    metric: str
    mode: str
    k: int
    rw_ratio: str
    seed: int
    n: int
    construction_dists: int
    query_dists_mean: float
    baseline_dists: int
    ratio_incl_construction: float
    ratio_excl_construction: float
    # not part of the CSV
    query_dists_total: int = field(default=0, repr=False)
    insert_dists: int = field(default=0, repr=False)
    n_queries: int = field(default=0, repr=False)

    def csv_values(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def parse_rw(text):
    """``"W:R"`` -> (writes, reads)."""
    try:
        w, r = (int(x) for x in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"read/write ratio must look like W:R, got {text!r}") from None
    if w < 0 or r < 0 or (w == 0 and r == 0):
        raise ConfigError(f"bad read/write ratio {text!r}")
    return w, r


class IndexAdapter:
    """Uniform build/insert/knn surface over the index families."""

    def __init__(self, kind, metric, seed=0, bucket_size=16, legacy_cover_bug=False):
        self.kind = kind
        self.metric = metric
        if kind in ("vp-median", "vp-mv"):
            strategy = MEDIAN if kind == "vp-median" else MIN_VARIANCE
            self.impl = VpTree(metric, strategy=strategy, bucket_size=bucket_size, seed=seed)
        elif kind in ("rbc-orig", "rbc-imp"):
            self.impl = RbcIndex(metric, seed=seed)
        elif kind in ("cover", "cover-b"):
            if legacy_cover_bug:
                mode = LEGACY
            else:
                mode = MAXDIST if kind == "cover" else LEVEL_BOUND
            self.impl = CoverTree(metric, mode=mode)
        elif kind == "brute":
            self.impl = BruteForceIndex(metric)
        else:
            raise ConfigError(f"unknown index {kind!r}")

    @property
    def incremental_only(self):
        return isinstance(self.impl, CoverTree)

    def build(self, items):
        if items:
            self.impl.build(items)

    def insert(self, item):
        self.impl.insert(item)

    def knn(self, q, k):
        if self.kind == "rbc-orig":
            return self.impl.knn_original(q, k)
        if self.kind == "rbc-imp":
            return self.impl.knn_improved(q, k)
        return self.impl.knn(q, k)

    def __len__(self):
        return len(self.impl)


def _stream_seeds(seed):
    split_seed, index_seed, audit_seed = np.random.SeedSequence(seed).spawn(3)
    return (int(split_seed.generate_state(1)[0]), int(index_seed.generate_state(1)[0]),
            int(audit_seed.generate_state(1)[0]))


def _construct(config, items, metric):
    """Build the index per ``config.mode``; returns (adapter, split)."""
    split_seed, index_seed, _ = _stream_seeds(config.seed)
    fractions = {"batch": (1.0, 0.0), "half-batch": (0.5, 0.5), "incremental": (0.0, 1.0)}
    split = split_shuffle(items, split_seed, fractions[config.mode], config.queries)
    adapter = IndexAdapter(config.index, metric, seed=index_seed,
                           bucket_size=config.bucket_size,
                           legacy_cover_bug=config.legacy_cover_bug)
    stream = split.build + split.insert
    if adapter.incremental_only:
        for item in stream:
            adapter.insert(item)
    elif config.mode == "incremental" and adapter.kind.startswith("rbc"):
        # an RBC needs one representative before it can take inserts
        adapter.build(stream[:1])
        for item in stream[1:]:
            adapter.insert(item)
    else:
        adapter.build(split.build)
        for item in split.insert:
            adapter.insert(item)
    return adapter, split


class _Oracle:
    """Sorted true distances per query, computed once with the raw metric."""

    def __init__(self, metric):
        self.metric = metric
        self._cache = {}

    def distances(self, collection, q, key=None):
        key = (q.id, len(collection)) if key is None else key
        got = self._cache.get(key)
        if got is None:
            qp = q.payload
            got = sorted(self.metric(item.payload, qp) for item in collection)
            self._cache[key] = got
        return got


def _audited(n_queries, n, audit_cap, seed):
    """Indices of queries to cross-check: all when n <= cap, else a random 1%."""
    if n <= audit_cap:
        return set(range(n_queries))
    rng = np.random.default_rng(seed)
    m = max(1, math.ceil(0.01 * n_queries)) if n_queries else 0
    return set(int(i) for i in rng.choice(n_queries, size=m, replace=False))


def check_answer(answer, truth, k, query_id):
    expected = truth[:k]
    got = [nb.distance for nb in answer]
    if len(got) != len(expected) or any(a != b for a, b in zip(got, expected)):
        raise CorrectnessError(
            f"query {query_id}: index returned distances {got[:5]}... "
            f"(len {len(got)}), oracle {expected[:5]}... (len {len(expected)})",
            query_id=query_id,
        )


def _row(config, k, n, construction, query_total, n_queries, baseline, insert_dists=0):
    denom = baseline if baseline else 1
    return ResultRow(
        index=config.index, metric=config.metric, mode=config.mode, k=int(k),
        rw_ratio=config.rw_ratio, seed=config.seed, n=n,
        construction_dists=construction,
        query_dists_mean=(query_total / n_queries) if n_queries else 0.0,
        baseline_dists=baseline,
        ratio_incl_construction=(construction + insert_dists + query_total) / denom,
        ratio_excl_construction=(insert_dists + query_total) / denom,
        query_dists_total=query_total, insert_dists=insert_dists, n_queries=n_queries,
    )


def run_construction(config, items):
    """Build once per ``config.mode`` and report the distance count."""
    config.validate()
    metric = CountingMetric(get_metric(config.metric))
    _construct(config, items, metric)
    return _row(config, 0, len(items), metric.count, 0, 0, 0)


def run_query_eval(config, items, oracle_metric=None):
    """Build, then answer the query sample for each k; one row per k."""
    config.validate()
    raw = get_metric(config.metric)
    metric = CountingMetric(raw)
    adapter, split = _construct(config, items, metric)
    construction = metric.count
    n = len(items)
    collection = split.build + split.insert
    _, _, audit_seed = _stream_seeds(config.seed)
    audited = _audited(len(split.queries), n, config.audit_cap, audit_seed)
    oracle = _Oracle(oracle_metric or raw)
    rows = []
    for k in config.ks:
        start = metric.count
        for j, q in enumerate(split.queries):
            answer = adapter.knn(q, int(k))
            if j in audited:
                check_answer(answer, oracle.distances(collection, q), int(k), q.id)
        total = metric.count - start
        nq = len(split.queries)
        rows.append(_row(config, k, n, construction, total, nq, nq * n))
    return rows


def run_interleaved(config, items, oracle_metric=None):
    """Replay ``W`` inserts then ``R`` queries until the insertion cap.

    The index starts from a batch build on half the data (cover trees insert
    that half). Queries stop once ``config.queries`` have been issued, which
    bounds read-heavy schedules; a ``0:R`` schedule just issues that many
    queries. The brute-force baseline charges each query the collection size
    at that moment and each insert nothing.
    """
    config.validate()
    writes, reads = parse_rw(config.rw_ratio)
    raw = get_metric(config.metric)
    split_seed, _, _ = _stream_seeds(config.seed)
    split = split_shuffle(items, split_seed, (0.5, 0.5), config.queries)
    stream = split.insert[:config.insert_cap]
    oracle = _Oracle(oracle_metric or raw)
    rows = []
    for k in config.ks:
        k = int(k)
        metric = CountingMetric(raw)
        adapter = _construct_initial(config, split.build, metric)
        construction = metric.count
        collection = list(split.build)
        pos = issued = insert_dists = query_dists = baseline = 0
        while True:
            if writes:
                if pos >= len(stream):
                    break
                before = metric.count
                for item in stream[pos:pos + writes]:
                    adapter.insert(item)
                    collection.append(item)
                pos += writes
                insert_dists += metric.count - before
            for _ in range(reads):
                if issued >= config.queries or not split.queries:
                    break
                q = split.queries[issued % len(split.queries)]
                before = metric.count
                answer = adapter.knn(q, k)
                query_dists += metric.count - before
                n_now = len(collection)
                baseline += n_now
                if n_now <= config.audit_cap or issued % 100 == 0:
                    truth = oracle.distances(collection, q, key=(q.id, n_now))
                    check_answer(answer, truth, k, q.id)
                issued += 1
            if reads and issued >= config.queries:
                break
            if not writes and not split.queries:
                break
        row = _row(config, k, len(items), construction, query_dists, issued, baseline,
                   insert_dists=insert_dists)
        row.mode = "interleaved"
        rows.append(row)
    return rows


def _construct_initial(config, build, metric):
    _, index_seed, _ = _stream_seeds(config.seed)
    adapter = IndexAdapter(config.index, metric, seed=index_seed,
                           bucket_size=config.bucket_size,
                           legacy_cover_bug=config.legacy_cover_bug)
    if adapter.incremental_only:
        for item in build:
            adapter.insert(item)
    else:
        adapter.build(build)
    return adapter


# -- output -----------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, fh=None):
    """Write rows with the fixed header; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.csv_values()])
    if fh is None:
        return buf.getvalue()
    return None


def manifest(config, extra=None):
    data = {"config": asdict(config), "csv_columns": list(CSV_COLUMNS),
            "generator": "numpy.random.default_rng (PCG64) seeded via SeedSequence(seed)"}
    data["config"]["ks"] = list(config.ks)
    if extra:
        data.update(extra)
    return json.dumps(data, indent=2, sort_keys=True)


def median_over_seeds(values):
    return statistics.median(values)
