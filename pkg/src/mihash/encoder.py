"""The hash function: one fully connected layer, sign binarization, and the
straight-through gradient path, plus bit packing for retrieval.

Code convention: a code matrix is an N x K float64 array with entries in
{-1.0, +1.0}; sign(0) := +1.  Packed form stores bit p of sample n at bit
(p % 64) of word (p // 64), LSB-first, with bit=1 meaning code value +1 and
all padding bits above K equal to zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor import SeededRng, matmul, rand_uniform


@dataclass
class HashModel:
    weights: np.ndarray  # D x K
    bias: np.ndarray     # K

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def code_len(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "HashModel":
        return HashModel(self.weights.copy(), self.bias.copy())


def init_model(feature_dim: int, code_len: int, rng: SeededRng) -> HashModel:
    """Fan-in uniform init: weights ~ U[-1/sqrt(D), +1/sqrt(D)], bias zero."""
    bound = 1.0 / np.sqrt(feature_dim)
    w = rand_uniform(rng, feature_dim, code_len, -bound, bound)
    return HashModel(w, np.zeros(code_len, dtype=np.float64))


def forward(model: HashModel, features: np.ndarray):
    """H = X.W + bias; B = sign(H) with sign(0) := +1."""
    if features.ndim != 2 or features.shape[1] != model.feature_dim:
        raise ShapeError(
            f"features shape {features.shape} incompatible with "
            f"feature_dim {model.feature_dim}")
    h = matmul(features, model.weights) + model.bias
    b = np.where(h >= 0.0, 1.0, -1.0)
    return h, b


def backward_straight_through(grad_b: np.ndarray) -> np.ndarray:
    """Identity pass-through: the binarization is treated as transparent."""
    return grad_b


def backward_linear(grad_h: np.ndarray, features: np.ndarray):
    """Gradients of the linear layer given upstream grad on H."""
    if grad_h.shape[0] != features.shape[0]:
        raise ShapeError(
            f"grad_h rows {grad_h.shape[0]} != features rows {features.shape[0]}")
    grad_w = matmul(features.T, grad_h)
    grad_bias = grad_h.sum(axis=0)
    return grad_w, grad_bias


@dataclass
class PackedCodes:
    n: int
    k: int
    words: np.ndarray  # N x ceil(K/64) uint64, LSB-first, zero padding

    def __post_init__(self):
        w = int(np.ceil(self.k / 64)) if self.k else 0
        if self.words.shape != (self.n, w) or self.words.dtype != np.uint64:
            raise ShapeError("packed words have wrong shape or dtype")
        pad = (-self.k) % 64
        if pad and self.n and (self.words[:, -1] >> np.uint64(64 - pad)).any():
            raise ShapeError("padding bits beyond K must be zero")


_BYTE_SHIFTS = np.arange(8, dtype=np.uint64) * np.uint64(8)


def pack(codes: np.ndarray) -> PackedCodes:
    """Pack a {-1,+1} code matrix into per-row uint64 words."""
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ShapeError("codes must be 2-D")
    n, k = codes.shape
    bits = (codes > 0).astype(np.uint8)
    nbytes = (k + 7) // 8
    nwords = (k + 63) // 64
    by = np.packbits(bits, axis=1, bitorder="little")
    padded = np.zeros((n, nwords * 8), dtype=np.uint8)
    padded[:, :nbytes] = by
    words = (padded.reshape(n, nwords, 8).astype(np.uint64)
             << _BYTE_SHIFTS).sum(axis=2, dtype=np.uint64)
    return PackedCodes(n, k, words)


def unpack(packed: PackedCodes) -> np.ndarray:
    by = ((packed.words[:, :, None] >> _BYTE_SHIFTS) &
          np.uint64(0xFF)).astype(np.uint8)
    by = by.reshape(packed.n, -1)[:, :(packed.k + 7) // 8]
    bits = np.unpackbits(by, axis=1, bitorder="little", count=packed.k)
    return np.where(bits.astype(bool), 1.0, -1.0)


def packed_row_bytes(packed: PackedCodes) -> np.ndarray:
    """Per-row byte view (N x ceil(K/8) uint8), LSB-first within each byte."""
    by = ((packed.words[:, :, None] >> _BYTE_SHIFTS) &
          np.uint64(0xFF)).astype(np.uint8)
    return by.reshape(packed.n, -1)[:, :(packed.k + 7) // 8]


def packed_from_bytes(raw: np.ndarray, n: int, k: int) -> PackedCodes:
    """Inverse of packed_row_bytes for file loading."""
    nbytes = (k + 7) // 8
    if raw.shape != (n, nbytes):
        raise ShapeError("raw byte block has wrong shape")
    nwords = (k + 63) // 64
    padded = np.zeros((n, nwords * 8), dtype=np.uint8)
    padded[:, :nbytes] = raw
    words = (padded.reshape(n, nwords, 8).astype(np.uint64)
             << _BYTE_SHIFTS).sum(axis=2, dtype=np.uint64)
    return PackedCodes(n, k, words)
