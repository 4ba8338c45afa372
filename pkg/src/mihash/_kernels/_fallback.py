"""Pure-NumPy implementations of the hot kernels.

These are the reference semantics; the compiled extension in _core.pyx must
match them bit-for-bit.  The contract that makes that possible:

* pair_counts works in exact integer arithmetic (a float64 matmul of 0/1
  matrices is exact well below 2**53, so the BLAS path is safe),
* mi_grad_gather accumulates the K pair contributions for each (sample, bit)
  in ascending-j order, one add per j, starting from 0.0,
* hamming distances are integers.
"""
import numpy as np

_POPCOUNT = np.array([bin(b).count("1") for b in range(256)], dtype=np.int64)


def pair_counts(u):
    """Count per-bit and per-pair +1 occurrences.

    u: N x K uint8 matrix of 0/1 (1 encodes the +1 code value).
    Returns (c1, c11): c1[i] = #{n: u[n,i]=1}; c11[i,j] = #{n: both 1}.
    """
    uf = u.astype(np.float64)
    c11 = np.rint(uf.T @ uf).astype(np.int64)
    c1 = u.sum(axis=0, dtype=np.int64)
    return c1, c11


def mi_grad_gather(u, coef):
    """Gather per-sample gradient contributions from the pair-coefficient table.

    u: N x K uint8 0/1 codes; coef: K x K x 4 float64 where coef[i, j, c] is
    the contribution to bit i from pair (i, j) when the sample occupies joint
    cell c (0:(+,+) 1:(+,-) 2:(-,+) 3:(-,-)). coef[i, i, :] must be zero.
    Returns grad: N x K float64 with grad[n, i] = sum_j coef[i, j, cell(n,i,j)].
    """
    n, k = u.shape
    rows = 2 * (1 - u.astype(np.intp))
    grad = np.zeros((n, k), dtype=np.float64)
    col = np.arange(k, dtype=np.intp)[None, :]
    for j in range(k):
        cells = rows + (1 - u[:, j].astype(np.intp))[:, None]
        grad += coef[col, j, cells]
    return grad


def hamming_many(db, q):
    """Hamming distances from one packed query row to every database row.

    db: N x W uint64 (LSB-first packed bits); q: W uint64. Returns int64 N.
    """
    x = (db ^ q[None, :]).view(np.uint8)
    return _POPCOUNT[x].sum(axis=1, dtype=np.int64)
