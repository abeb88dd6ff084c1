"""Loading user corpora and generating seeded synthetic data.

File formats
------------
vectors
    Plain text, one point per line, values separated by whitespace and/or
    commas. An optional first line ``d=<dim>`` fixes the dimension. Blank
    lines are skipped.
strings
    UTF-8 text, one item per line with the line terminator stripped. A blank
    line is a valid empty string. Payloads are the encoded ``bytes``.
binary directory
    Every regular file is one item holding its raw bytes, ordered by file name.

All generators take an integer seed and draw from ``numpy.random.default_rng``
(PCG64), so output is reproducible across platforms.
"""

import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import InvalidInputError, LoadError
from .metrics import Item, lz_set

SOURCES = ("vectors", "strings", "binary-dir", "gaussian-mixture",
           "random-strings", "random-blobs")

_SEP = re.compile(r"[\s,]+")


@dataclass(frozen=True)
class DatasetSpec:
    source: str
    path: Optional[str] = None
    n: int = 1000
    d: int = 10
    clusters: int = 4
    spread: float = 0.02
    max_len: int = 20
    seed: int = 0


def load(spec: DatasetSpec) -> list:
    """Materialize ``spec`` as a list of items with ids ``0..n-1``."""
    if spec.source == "vectors":
        return load_vectors(spec.path)
    if spec.source == "strings":
        return load_strings(spec.path)
    if spec.source == "binary-dir":
        return load_binary_dir(spec.path)
    if spec.source == "gaussian-mixture":
        return synthetic_gaussian_mixture(spec.n, spec.d, spec.clusters, spec.spread, spec.seed)
    if spec.source == "random-strings":
        return synthetic_strings(spec.n, spec.max_len, spec.seed)
    if spec.source == "random-blobs":
        return synthetic_blobs(spec.n, spec.max_len, spec.seed)
    raise InvalidInputError(f"unknown dataset source {spec.source!r}")


def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8", newline=None) as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc


def load_vectors(path) -> list:
    text = _read_text(path)
    dim = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line.startswith("d="):
            try:
                dim = int(line[2:])
            except ValueError:
                raise LoadError(f"{path}:1: bad header {line!r}") from None
            continue
        try:
            values = [float(tok) for tok in _SEP.split(line) if tok]
        except ValueError:
            raise LoadError(f"{path}:{lineno}: malformed row {line!r}") from None
        if dim is None:
            dim = len(values)
        if len(values) != dim:
            raise LoadError(f"{path}:{lineno}: expected {dim} values, found {len(values)}")
        rows.append(values)
    if not rows:
        raise LoadError(f"{path}: no vectors found")
    data = np.asarray(rows, dtype=float)
    return [Item(i, data[i]) for i in range(len(data))]


def load_strings(path) -> list:
    text = _read_text(path)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [Item(i, line.encode("utf-8")) for i, line in enumerate(lines)]


def load_binary_dir(path) -> list:
    root = Path(path)
    if not root.is_dir():
        raise LoadError(f"{path}: not a directory")
    files = sorted(p for p in root.iterdir() if p.is_file())
    items = []
    for i, p in enumerate(files):
        try:
            items.append(Item(i, p.read_bytes()))
        except OSError as exc:
            raise LoadError(f"cannot read {p}: {exc}") from exc
    return items


def load_path(path) -> list:
    """Pick the loader for a path: directory -> binary files, else strings."""
    if os.path.isdir(path):
        return load_binary_dir(path)
    return load_strings(path)


def synthetic_gaussian_mixture(n, d, clusters, spread, seed) -> list:
    """``n`` points around ``clusters`` centers drawn uniformly in ``[0, 1]^d``."""
    if n < 1 or d < 1 or clusters < 1:
        raise InvalidInputError("n, d and clusters must all be >= 1")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 1.0, size=(clusters, d))
    labels = rng.integers(clusters, size=n)
    noise = rng.normal(0.0, 1.0, size=(n, d)) * spread
    points = centers[labels] + noise
    return [Item(i, points[i]) for i in range(n)]


def synthetic_strings(n, max_len, seed, alphabet=b"abcdefghij ") -> list:
    """Random byte strings of length ``0..max_len``; about half mutate an earlier string."""
    rng = np.random.default_rng(seed)
    alpha = np.frombuffer(alphabet, dtype=np.uint8)
    out = []
    for i in range(n):
        if out and rng.random() < 0.5:
            base = bytearray(out[int(rng.integers(len(out)))])
            for _ in range(int(rng.integers(1, 4))):
                op = int(rng.integers(3))
                pos = int(rng.integers(len(base) + 1))
                ch = int(alpha[rng.integers(len(alpha))])
                if op == 0 and len(base) < max_len:
                    base.insert(pos, ch)
                elif op == 1 and base:
                    del base[min(pos, len(base) - 1)]
                elif base:
                    base[min(pos, len(base) - 1)] = ch
            out.append(bytes(base))
        else:
            length = int(rng.integers(max_len + 1))
            out.append(alpha[rng.integers(len(alpha), size=length)].tobytes())
    return [Item(i, s) for i, s in enumerate(out)]


def synthetic_blobs(n, max_len, seed, families=8) -> list:
    """Byte blobs of length ``<= max_len`` derived from a few random prototypes.

    Each blob copies a random window of its family's prototype and overwrites
    a few bytes, so LZ phrase sets overlap within a family.
    """
    rng = np.random.default_rng(seed)
    protos = [rng.integers(0, 16, size=max_len, dtype=np.uint8) for _ in range(families)]
    out = []
    for i in range(n):
        proto = protos[int(rng.integers(families))]
        length = int(rng.integers(1, max_len + 1))
        start = int(rng.integers(max_len - length + 1))
        blob = proto[start:start + length].copy()
        flips = int(rng.integers(0, max(1, length // 16) + 1))
        if flips:
            pos = rng.integers(length, size=flips)
            blob[pos] = rng.integers(0, 256, size=flips, dtype=np.uint8)
        out.append(Item(i, blob.tobytes()))
    return out


def prepare(items, metric_kind) -> list:
    """Convert payloads into what ``metric_kind`` expects.

    ``lz-jaccard`` turns bytes into LZ phrase sets; ``levenshtein`` needs
    bytes; ``euclidean`` needs vectors. Other combinations raise.
    """
    if not items:
        return []
    sample = items[0].payload
    if metric_kind == "lz-jaccard":
        if isinstance(sample, frozenset):
            return list(items)
        if isinstance(sample, (bytes, str)):
            return [Item(it.id, lz_set(it.payload)) for it in items]
    elif metric_kind == "levenshtein":
        if isinstance(sample, bytes):
            return list(items)
        if isinstance(sample, str):
            return [Item(it.id, it.payload.encode("utf-8")) for it in items]
    elif metric_kind == "euclidean":
        if isinstance(sample, np.ndarray):
            return list(items)
    raise InvalidInputError(
        f"payloads of type {type(sample).__name__} do not fit metric {metric_kind!r}"
    )


class Split(NamedTuple):
    build: list
    insert: list
    queries: list


def split_shuffle(items, seed, fractions=(1.0, 0.0), query_sample=1000) -> Split:
    """Seeded permutation, then contiguous build/insert slices.

    ``fractions`` gives the build and insert shares of ``n``; the build slice
    has ``ceil(f0 * n)`` items. Queries are ``min(query_sample, n)`` items
    drawn without replacement from the whole collection.
    """
    n = len(items)
    f_build, f_insert = fractions
    if f_build < 0 or f_insert < 0 or f_build + f_insert > 1 + 1e-12:
        raise InvalidInputError(f"bad fractions {fractions}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    shuffled = [items[int(i)] for i in order]
    n_build = min(n, math.ceil(f_build * n - 1e-9))
    n_insert = min(n - n_build, math.floor(f_insert * n + 1e-9))
    m = min(query_sample, n)
    picks = rng.choice(n, size=m, replace=False) if m else []
    queries = [items[int(i)] for i in picks]
    return Split(shuffled[:n_build], shuffled[n_build:n_build + n_insert], queries)
