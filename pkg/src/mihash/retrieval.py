"""Bit-packed Hamming retrieval and the evaluation suite (MAP@k, PR curves,
code-space utilization).

Relevance: every sample carries a label set; a database item is relevant to
a query when the sets intersect.  Single-label data is the singleton-set
case of the same rule.  Ranking ties are broken by ascending database row
order, which makes every ranking deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .encoder import PackedCodes, packed_row_bytes
from .errors import ShapeError


@dataclass
class HammingIndex:
    packed: PackedCodes
    ids: list
    labels: list | None = None   # per-row frozenset of label tokens

    def __post_init__(self):
        if len(self.ids) != self.packed.n:
            raise ShapeError("ids length does not match database size")
        if len(set(self.ids)) != len(self.ids):
            raise ShapeError("database ids must be unique")
        if self.labels is not None and len(self.labels) != self.packed.n:
            raise ShapeError("labels length does not match database size")

    @property
    def size(self) -> int:
        return self.packed.n


@dataclass
class EvalReport:
    map_at_k: float
    k: int
    pr_points: list          # (recall, precision) per rank cutoff
    utilization: list        # (code key, count), count descending


def hamming_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Differing-bit count between two packed rows (1-D uint64 word arrays)."""
    a = np.ascontiguousarray(a, dtype=np.uint64)
    b = np.ascontiguousarray(b, dtype=np.uint64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError("packed rows must be 1-D and the same length")
    return int(_kernels.hamming_many(a[None, :], b)[0])


def _distances(index: HammingIndex, query_words: np.ndarray) -> np.ndarray:
    q = np.ascontiguousarray(query_words, dtype=np.uint64)
    if q.shape != (index.packed.words.shape[1],):
        raise ShapeError("query word count does not match index")
    return _kernels.hamming_many(index.packed.words, q)


def _ranked_order(index: HammingIndex, query_words: np.ndarray) -> np.ndarray:
    # stable sort on distance preserves row order among ties
    d = _distances(index, query_words)
    return np.argsort(d, kind="stable")


def query_topk(index: HammingIndex, query_words: np.ndarray, k: int):
    """Top-k ids by Hamming distance.

    Returns (ids, distances, truncated); truncated flags k > database size,
    in which case the full ranking is returned.
    """
    if k < 1:
        raise ShapeError("k must be >= 1")
    d = _distances(index, query_words)
    order = np.argsort(d, kind="stable")
    truncated = k > index.size
    top = order[:min(k, index.size)]
    return [index.ids[i] for i in top], d[top].tolist(), truncated


def _relevance_matrix(index: HammingIndex, query_labels) -> np.ndarray:
    """Bool (n_queries x n_db): nonempty label-set intersection."""
    if index.labels is None:
        raise ShapeError("index has no labels; relevance is undefined")
    db = index.labels
    out = np.zeros((len(query_labels), len(db)), dtype=bool)
    for qi, ql in enumerate(query_labels):
        qs = frozenset(ql)
        out[qi] = [bool(qs & dl) for dl in db]
    return out


def map_at_k(index: HammingIndex, queries: PackedCodes, query_labels,
             k: int) -> float:
    """Mean over queries of AP@k with denominator min(k, relevant-in-db).

    Queries with no relevant database item are skipped; raises if that
    leaves nothing to average.
    """
    if k < 1:
        raise ShapeError("k must be >= 1")
    if queries.n != len(query_labels):
        raise ShapeError("query label count does not match queries")
    rel_all = _relevance_matrix(index, query_labels)
    aps = []
    for qi in range(queries.n):
        n_rel = int(rel_all[qi].sum())
        if n_rel == 0:
            continue
        order = _ranked_order(index, queries.words[qi])
        rel = rel_all[qi][order[:k]]
        ranks = np.arange(1, rel.shape[0] + 1)
        precision_at = np.cumsum(rel) / ranks
        ap = float((precision_at * rel).sum()) / min(k, n_rel)
        aps.append(ap)
    if not aps:
        raise ShapeError("no query has a relevant database item")
    return float(np.mean(aps))


def pr_curve(index: HammingIndex, queries: PackedCodes, query_labels):
    """Average precision/recall over queries at every rank cutoff 1..N.

    Returns a list of (recall, precision) pairs; recall is nondecreasing.
    """
    if queries.n != len(query_labels):
        raise ShapeError("query label count does not match queries")
    rel_all = _relevance_matrix(index, query_labels)
    n = index.size
    ranks = np.arange(1, n + 1)
    precisions = []
    recalls = []
    for qi in range(queries.n):
        n_rel = int(rel_all[qi].sum())
        if n_rel == 0:
            continue
        order = _ranked_order(index, queries.words[qi])
        cum = np.cumsum(rel_all[qi][order])
        precisions.append(cum / ranks)
        recalls.append(cum / n_rel)
    if not precisions:
        raise ShapeError("no query has a relevant database item")
    p = np.mean(precisions, axis=0)
    r = np.mean(recalls, axis=0)
    return list(zip(r.tolist(), p.tolist()))


def utilization_histogram(codes: np.ndarray):
    """Distinct-code counts, most used first.

    Keys are exact integers for K <= 64 and hex strings of the packed row
    beyond that; ties in count are ordered by ascending key.
    """
    from .encoder import pack
    packed = pack(np.asarray(codes))
    if packed.k <= 64:
        keys = [int(w) for w in packed.words[:, 0]] if packed.n else []
    else:
        rows = packed_row_bytes(packed)
        keys = [bytes(r).hex() for r in rows]
    counts = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def evaluate(index: HammingIndex, queries: PackedCodes, query_labels,
             k: int) -> EvalReport:
    """One-stop report: MAP@k, the PR curve, and database utilization."""
    from .encoder import unpack
    return EvalReport(
        map_at_k=map_at_k(index, queries, query_labels, k),
        k=k,
        pr_points=pr_curve(index, queries, query_labels),
        utilization=utilization_histogram(unpack(index.packed)),
    )
