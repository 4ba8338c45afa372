"""Dense-matrix and RNG substrate.

A "matrix" throughout this package is a 2-D C-contiguous float64 ndarray.
All randomness flows through SeededRng, which wraps NumPy's PCG64 generator
(O'Neill's permuted congruential generator, 128-bit state).  PCG64 streams
are documented and stable across platforms and NumPy releases, so a seed
fully pins every downstream artifact.
"""
from __future__ import annotations

import numpy as np

from .errors import ShapeError


def as_matrix(data) -> np.ndarray:
    """Coerce to a 2-D float64 array, validating finiteness."""
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ShapeError("matrix contains non-finite entries")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-major matrix product with shape checking.

    Raises ShapeError on inner-dimension mismatch or a non-finite result
    (the result of any library-produced operation must stay finite).
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects 2-D operands")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul dimension mismatch: {a.shape} x {b.shape}")
    out = a @ b
    if not np.isfinite(out).all():
        raise ShapeError("matmul produced non-finite entries")
    return out


class SeededRng:
    """Deterministic random stream: identical seed, identical draws.

    Single-owner by convention -- the trainer holds one instance for model
    initialization and a separate one for data-loader shuffling.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, lo: float, hi: float, shape) -> np.ndarray:
        return self._gen.uniform(lo, hi, size=shape)

    def normal(self, loc: float, scale: float, shape) -> np.ndarray:
        return self._gen.normal(loc, scale, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, lo: int, hi: int, shape=None) -> np.ndarray:
        return self._gen.integers(lo, hi, size=shape)


def rand_uniform(rng: SeededRng, rows: int, cols: int,
                 lo: float, hi: float) -> np.ndarray:
    """I.i.d. uniform matrix draw; advances rng deterministically."""
    if not lo < hi:
        raise ShapeError(f"rand_uniform requires lo < hi, got [{lo}, {hi})")
    return rng.uniform(lo, hi, (int(rows), int(cols)))
