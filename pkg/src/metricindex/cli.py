"""Command-line front end.

Subcommands::

    build-bench       construction distance counts
    query-bench       query efficiency vs brute force, one CSV row per k
    interleave-bench  interleaved insert/query schedule, one CSV row per k
    knn               neighbors of a single query
    self-check        oracle-equivalence and structural audits on synthetic data

All randomness derives from ``--seed`` through ``numpy.random.SeedSequence``
and the PCG64 generator.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import datasets
from .audit import audit_covertree, audit_rbc, audit_vptree
from .exceptions import MetricIndexError
from .harness import (INDEX_KINDS, MODES, ExperimentConfig, IndexAdapter, manifest,
                      rows_to_csv, run_construction, run_interleaved, run_query_eval)
from .metrics import METRIC_KINDS, Item, get_metric, lz_set
from .oracle import brute_knn


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}")


def _kinds(text):
    kinds = tuple(x.strip() for x in text.split(",") if x.strip())
    for kind in kinds:
        if kind not in INDEX_KINDS:
            raise argparse.ArgumentTypeError(
                f"unknown index {kind!r}; choose from {', '.join(INDEX_KINDS)}")
    return kinds


def _synthetic(text):
    params = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"bad --synthetic entry {part!r}; use key=value")
        params[key.strip()] = value.strip()
    allowed = {"n", "d", "k", "clusters", "spread", "len"}
    unknown = set(params) - allowed
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown --synthetic keys: {', '.join(sorted(unknown))}")
    return params


def _common(p, with_bench=True):
    p.add_argument("--index", type=_kinds, default=("vp-mv",),
                   help="index kind(s), comma separated: " + ", ".join(INDEX_KINDS))
    p.add_argument("--metric", choices=METRIC_KINDS, default="euclidean")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="vector file, strings file, or directory of binaries")
    src.add_argument("--synthetic", type=_synthetic,
                     help="synthetic data, e.g. n=4000,d=10,k=4[,spread=0.02][,len=20]")
    p.add_argument("--k", type=_int_list, default=(1, 5, 25, 100), help="comma list of k")
    p.add_argument("--bucket", type=int, default=16, help="VP-tree bucket size b")
    p.add_argument("--seed", type=_int_list, default=(0,), help="seed(s), comma separated")
    p.add_argument("--output", help="CSV output path (default: stdout)")
    p.add_argument("--legacy-cover-bug", action="store_true",
                   help="use the known-broken cover tree pruning test (testing only)")
    if with_bench:
        p.add_argument("--mode", choices=MODES, default="batch")
        p.add_argument("--rw", default="100:1", help="writes:reads, e.g. 100:1 or 1:100")
        p.add_argument("--queries", type=int, default=1000)
        p.add_argument("--insert-cap", type=int, default=1000)
        p.add_argument("--audit-cap", type=int, default=20000)
        p.add_argument("--jobs", type=int, default=1, help="parallel (index, seed) runs")
        p.add_argument("--manifest", help="JSON run-manifest path (default: <output>.json)")


def build_parser():
    parser = argparse.ArgumentParser(prog="metricindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build-bench", "query-bench", "interleave-bench"):
        _common(sub.add_parser(name))
    knn = sub.add_parser("knn", help="neighbors of one query")
    _common(knn, with_bench=False)
    knn.add_argument("--query", required=True,
                     help="query string, or comma/space separated vector for euclidean")
    check = sub.add_parser("self-check", help="run oracle and audit suites on synthetic data")
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--n", type=int, default=400)
    return parser


def _load_items(args, seed):
    if args.data:
        if args.metric == "euclidean":
            items = datasets.load_vectors(args.data)
        else:
            items = datasets.load_path(args.data)
        return datasets.prepare(items, args.metric)
    params = args.synthetic or {}
    n = int(params.get("n", 2000))
    if args.metric == "euclidean":
        spec = datasets.DatasetSpec(
            "gaussian-mixture", n=n, d=int(params.get("d", 10)),
            clusters=int(params.get("k", params.get("clusters", 4))),
            spread=float(params.get("spread", 0.02)), seed=seed)
    elif args.metric == "levenshtein":
        spec = datasets.DatasetSpec("random-strings", n=n, max_len=int(params.get("len", 20)),
                                    seed=seed)
    else:
        spec = datasets.DatasetSpec("random-blobs", n=n, max_len=int(params.get("len", 512)),
                                    seed=seed)
    return datasets.prepare(datasets.load(spec), args.metric)


def _run_one(job):
    command, args, kind, seed = job
    items = _load_items(args, seed)
    config = ExperimentConfig(
        index=kind, metric=args.metric, mode=args.mode, ks=args.k, queries=args.queries,
        rw_ratio=args.rw, insert_cap=args.insert_cap, seed=seed, bucket_size=args.bucket,
        audit_cap=args.audit_cap, legacy_cover_bug=args.legacy_cover_bug).validate()
    if command == "build-bench":
        rows = [run_construction(config, items)]
    elif command == "query-bench":
        rows = run_query_eval(config, items)
    else:
        rows = run_interleaved(config, items)
    return config, rows


def _bench(args):
    jobs = [(args.command, args, kind, seed) for kind in args.index for seed in args.seed]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    rows = [row for _, rows in results for row in rows]
    text = rows_to_csv(rows)
    _emit(args.output, text)
    manifest_path = args.manifest or (args.output + ".json" if args.output else None)
    if manifest_path:
        extra = {"command": args.command, "seeds": list(args.seed), "indexes": list(args.index),
                 "data": args.data, "synthetic": args.synthetic}
        with open(manifest_path, "w", encoding="utf-8") as fh:
            fh.write(manifest(results[0][0], extra) + "\n")
    return 0


def _emit(path, text):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _query_item(args):
    if args.metric == "euclidean":
        values = [float(x) for x in args.query.replace(",", " ").split()]
        return Item(-1, np.asarray(values, dtype=float))
    raw = args.query.encode("utf-8")
    if args.metric == "lz-jaccard":
        return Item(-1, lz_set(raw))
    return Item(-1, raw)


def _show(payload):
    if isinstance(payload, bytes):
        return payload.decode("utf-8", errors="replace")
    if isinstance(payload, np.ndarray):
        return " ".join(repr(float(v)) for v in payload)
    return f"<{len(payload)} phrases>"


def _knn(args):
    seed = args.seed[0]
    items = _load_items(args, seed)
    raw_items = {it.id: it for it in items}
    if args.data and args.metric == "lz-jaccard":
        raw_items = {it.id: it for it in datasets.load_path(args.data)}
    q = _query_item(args)
    metric = get_metric(args.metric)
    lines = ["index,k,rank,id,distance,item"]
    for kind in args.index:
        adapter = IndexAdapter(kind, metric, seed=seed, bucket_size=args.bucket,
                               legacy_cover_bug=args.legacy_cover_bug)
        if adapter.incremental_only:
            for item in items:
                adapter.insert(item)
        else:
            adapter.build(items)
        for k in args.k:
            for rank, nb in enumerate(adapter.knn(q, k), 1):
                shown = _show(raw_items[nb.id].payload).replace('"', '""')
                lines.append(f'{kind},{k},{rank},{nb.id},{nb.distance!r},"{shown}"')
    _emit(args.output, "\n".join(lines) + "\n")
    return 0


def self_check(seed=0, n=400, out=None):
    """Oracle equivalence and structural audits for every index and metric.

    Returns the number of failures.
    """
    out = sys.stdout if out is None else out
    failures = 0
    sources = {
        "euclidean": datasets.DatasetSpec("gaussian-mixture", n=n, d=5, clusters=4,
                                          spread=0.05, seed=seed),
        "levenshtein": datasets.DatasetSpec("random-strings", n=n, max_len=16, seed=seed),
        "lz-jaccard": datasets.DatasetSpec("random-blobs", n=n, max_len=256, seed=seed),
    }
    for metric_kind, spec in sources.items():
        items = datasets.prepare(datasets.load(spec), metric_kind)
        metric = get_metric(metric_kind)
        rng = np.random.default_rng(seed)
        queries = [items[int(i)] for i in rng.choice(len(items), size=20, replace=False)]
        for kind in INDEX_KINDS:
            label = f"{metric_kind:<12} {kind:<10}"
            try:
                adapter = IndexAdapter(kind, metric, seed=seed, bucket_size=4)
                half = len(items) // 2
                if adapter.incremental_only:
                    for item in items:
                        adapter.insert(item)
                else:
                    adapter.build(items[:half])
                    for item in items[half:]:
                        adapter.insert(item)
                for q in queries:
                    for k in (1, 5, 25):
                        got = [nb.distance for nb in adapter.knn(q, k)]
                        want = [nb.distance for nb in brute_knn(items, metric, q, k)]
                        if got != want:
                            raise MetricIndexError(f"query {q.id} k={k}: {got} != {want}")
                impl = adapter.impl
                if kind.startswith("vp"):
                    audit_vptree(impl, metric)
                elif kind.startswith("rbc"):
                    audit_rbc(impl, metric)
                elif kind.startswith("cover"):
                    audit_covertree(impl, metric)
                print(f"ok   {label}", file=out)
            except (MetricIndexError, AssertionError) as exc:
                failures += 1
                print(f"FAIL {label} {exc}", file=out)
    return failures


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "self-check":
            failures = self_check(seed=args.seed, n=args.n)
            if failures:
                print(f"error: self-check found {failures} failure(s)", file=sys.stderr)
                return 1
            return 0
        if args.command == "knn":
            return _knn(args)
        return _bench(args)
    except (MetricIndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
