"""Shared independent oracles for the test suite.

Everything here is deliberately naive (triple loops, per-bit scans,
direct-definition metrics) so library results are checked against code
that cannot share a bug with the vectorized implementations.
"""
import numpy as np
import pytest


def matmul_oracle(a, b):
    """Entry-by-entry triple-loop product."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = 0.0
            for t in range(a.shape[1]):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def fd_grad(f, x, step=1e-5):
    """Central finite differences of a scalar function at x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += step
        xm[idx] -= step
        g[idx] = (f(xp) - f(xm)) / (2.0 * step)
    return g


def rel_err(a, b):
    denom = max(np.abs(b).max(), 1e-300)
    return np.abs(a - b).max() / denom


def hamming_oracle(row_a, row_b):
    """Per-bit comparison of two +/-1 code rows."""
    return int(sum(1 for x, y in zip(row_a, row_b) if x != y))


def rank_oracle(db_codes, query_code):
    """Full stable sort of database rows by naive Hamming distance."""
    dists = [hamming_oracle(row, query_code) for row in db_codes]
    return sorted(range(len(dists)), key=lambda i: (dists[i], i)), dists


def ap_oracle(ranked_relevance, n_relevant_total, k):
    """AP@k straight from its definition, denominator min(k, relevant)."""
    hits = 0
    acc = 0.0
    for r, rel in enumerate(ranked_relevance[:k], start=1):
        if rel:
            hits += 1
            acc += hits / r
    return acc / min(k, n_relevant_total)


def random_codes(rng, n, k):
    return np.where(rng.random((n, k)) < 0.5, 1.0, -1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
