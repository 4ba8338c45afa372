"""Batchwise unsupervised losses with hand-derived gradients.

L_sim: mean over all unordered within-batch pairs (m < n) of
  (cos(H_m, H_n) - cos(B_m, B_n))^2.
Gradients flow through BOTH cosine terms: the H side directly, the B side
via the straight-through rule (so its analytic gradient w.r.t. B is simply
added to grad_H).  With r = ||row|| + guard, Hn = H / r, S = Hn.Hn^T and
C = 2 (S_H - S_B) / n_pairs (diagonal zeroed), the row-wise derivative of
the cosine matrix gives

  dL/dH = (C.Hn - rowsum(C * S_H) * Hn) / r

and the B-side term is the same expression with the opposite sign.

L_reg: mean over samples of ||H_n - B_n||^2 with B detached, so
grad_H = 2 (H - B) / batch_size.

A 1e-12 guard is added to row norms inside the losses only; the public
cosine_similarity rejects zero-norm inputs outright.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

_NORM_GUARD = 1e-12


@dataclass
class LossValue:
    value: float
    grad_h: np.ndarray


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"vector length mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ShapeError("cosine_similarity undefined for zero-norm input")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _check_batch(h, b):
    if h.shape != b.shape:
        raise ShapeError(f"H/B shape mismatch: {h.shape} vs {b.shape}")
    if h.ndim != 2:
        raise ShapeError("expected 2-D batches")


def _cosine_block(x):
    """Normalized rows, similarity matrix, and guarded norms."""
    r = np.linalg.norm(x, axis=1) + _NORM_GUARD
    xn = x / r[:, None]
    return r, xn, xn @ xn.T


def sim_loss(h: np.ndarray, b: np.ndarray) -> LossValue:
    """Cosine-imitation loss over all unordered pairs of the minibatch."""
    _check_batch(h, b)
    m = h.shape[0]
    if m < 2:
        raise ShapeError("sim_loss needs a batch of at least 2 samples")
    n_pairs = m * (m - 1) // 2
    rh, hn, sh = _cosine_block(h)
    rb, bn, sb = _cosine_block(b)
    diff = sh - sb
    iu = np.triu_indices(m, 1)
    value = float((diff[iu] ** 2).sum()) / n_pairs

    c = (2.0 / n_pairs) * diff
    np.fill_diagonal(c, 0.0)
    grad_h_side = (c @ hn - (c * sh).sum(axis=1)[:, None] * hn) / rh[:, None]
    grad_b_side = -(c @ bn - (c * sb).sum(axis=1)[:, None] * bn) / rb[:, None]
    return LossValue(value, grad_h_side + grad_b_side)


def reg_loss(h: np.ndarray, b: np.ndarray) -> LossValue:
    """Quantization-consistency loss; B is a constant of the graph."""
    _check_batch(h, b)
    m = h.shape[0]
    d = h - b
    return LossValue(float((d * d).sum()) / m, (2.0 / m) * d)


def combined_loss(h: np.ndarray, b: np.ndarray, alpha: float) -> LossValue:
    """L_r = L_sim + alpha * L_reg."""
    if alpha < 0:
        raise ShapeError(f"alpha must be >= 0, got {alpha}")
    s = sim_loss(h, b)
    r = reg_loss(h, b)
    return LossValue(s.value + alpha * r.value, s.grad_h + alpha * r.grad_h)
