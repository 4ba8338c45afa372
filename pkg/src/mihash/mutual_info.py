"""Full-dataset bit statistics, pairwise mutual information, and the
approximated per-sample MI gradient used by the shuffle step.

Cell order everywhere: 0:(+,+)  1:(+,-)  2:(-,+)  3:(-,-), i.e. cell
index = 2*(1 - [b_i = +1]) + (1 - [b_j = +1]).

The gradient treats marginals as constants (they are cut from the chain),
so for an occupied cell

    dI/dP(cell) = ln(P(cell) / (P_i(s) P_j(t))) + 1

and the approximated joint derivative w.r.t. sample bit b_i is +P_j,
+(1-P_j), -P_j, -(1-P_j) for the four cells in order.  Each sample receives
the derivative of the cell it occupies, scaled by 1/N.  Natural log, with
0 ln 0 := 0 for empty cells.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError

CELL_PP, CELL_PN, CELL_NP, CELL_NN = 0, 1, 2, 3


@dataclass
class PairStats:
    n_samples: int
    marginals: np.ndarray   # K, P(B_i = +1)
    joints: np.ndarray      # K x K x 4, full symmetric table (see cell order)


@dataclass
class MiReport:
    total: float
    per_pair: np.ndarray    # K x K, upper triangle holds I(B_i;B_j)


def _codes_to_bits(codes: np.ndarray) -> np.ndarray:
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ShapeError("code matrix must be 2-D")
    return np.ascontiguousarray(codes > 0, dtype=np.uint8)


def estimate_stats(codes: np.ndarray) -> PairStats:
    """Empirical marginals and pairwise joint tables from a {-1,+1} matrix."""
    u = _codes_to_bits(codes)
    n, k = u.shape
    if n < 1:
        raise ShapeError("cannot estimate statistics from an empty code matrix")
    if k < 2:
        raise ShapeError("need at least 2 bits for pair statistics")
    c1, c11 = _kernels.pair_counts(u)
    n11 = c11
    n10 = c1[:, None] - c11
    n01 = c1[None, :] - c11
    n00 = n - n11 - n10 - n01
    joints = np.stack([n11, n10, n01, n00], axis=2).astype(np.float64) / n
    return PairStats(n, c1.astype(np.float64) / n, joints)


def _cell_denominators(marginals: np.ndarray) -> np.ndarray:
    """K x K x 4 table of P_i(s) * P_j(t) per cell."""
    p_i = marginals[:, None]
    p_j = marginals[None, :]
    return np.stack([p_i * p_j, p_i * (1 - p_j),
                     (1 - p_i) * p_j, (1 - p_i) * (1 - p_j)], axis=2)


def _log_ratio(joints: np.ndarray, denom: np.ndarray) -> np.ndarray:
    """ln(joint/denom) where the joint is positive, 0 elsewhere."""
    safe = np.where(joints > 0, joints, 1.0) / np.where(denom > 0, denom, 1.0)
    return np.where(joints > 0, np.log(safe), 0.0)


def _clamp_tiny_negative(v):
    """Empirical MI is a KL divergence, hence >= 0; absorb float dust."""
    return np.where((v < 0) & (v > -1e-9), 0.0, v)


def mutual_information(stats: PairStats, i: int, j: int) -> float:
    """I(B_i; B_j) in nats; requires i < j."""
    k = stats.marginals.shape[0]
    if not 0 <= i < j < k:
        raise ShapeError(f"need 0 <= i < j < K, got i={i}, j={j}, K={k}")
    cells = stats.joints[i, j]
    denom = _cell_denominators(stats.marginals)[i, j]
    terms = np.where(cells > 0, cells * _log_ratio(cells, denom), 0.0)
    return float(_clamp_tiny_negative(terms.sum()))


def bit_entropy(stats: PairStats, i: int) -> float:
    """H(B_i) in nats with the 0 ln 0 := 0 convention."""
    p = float(stats.marginals[i])
    out = 0.0
    for q in (p, 1.0 - p):
        if q > 0:
            out -= q * np.log(q)
    return out


def mi_report(stats: PairStats) -> MiReport:
    """All pairwise MIs (upper triangle) and their triangular sum."""
    denom = _cell_denominators(stats.marginals)
    terms = stats.joints * _log_ratio(stats.joints, denom)
    mi = _clamp_tiny_negative(terms.sum(axis=2))
    k = mi.shape[0]
    upper = np.triu(mi, 1)
    per_pair = np.zeros((k, k))
    iu = np.triu_indices(k, 1)
    per_pair[iu] = upper[iu]
    return MiReport(float(per_pair[iu].sum()), per_pair)


def mi_loss(stats: PairStats) -> float:
    """Sum of I(B_i;B_j) over i < j (the raw L_m, before any beta)."""
    return mi_report(stats).total


def approx_joint_derivative(stats: PairStats, cell: int, i: int, j: int) -> float:
    """Approximated d P(cell) / d b_i for pair (i, j)."""
    if i == j:
        raise ShapeError("approx_joint_derivative requires i != j")
    p_j = float(stats.marginals[j])
    if cell == CELL_PP:
        return p_j
    if cell == CELL_PN:
        return 1.0 - p_j
    if cell == CELL_NP:
        return -p_j
    if cell == CELL_NN:
        return -(1.0 - p_j)
    raise ShapeError(f"cell must be one of 0..3, got {cell}")


def mi_gradient(codes: np.ndarray, stats: PairStats) -> np.ndarray:
    """Per-sample gradient of L_m on B.

    grad[n, i] = (1/N) * sum_{j != i} dI/dP(cell(n,i,j)) * deriv(cell, i, j),
    with marginals held constant.  stats must be the statistics of `codes`;
    a sample occupying a zero-probability cell is impossible for consistent
    inputs and raises.
    """
    u = _codes_to_bits(codes)
    n, k = u.shape
    if stats.marginals.shape[0] != k:
        raise ShapeError("stats bit count does not match codes")
    denom = _cell_denominators(stats.marginals)
    didp = _log_ratio(stats.joints, denom) + 1.0

    p_j = np.broadcast_to(stats.marginals[None, :], (k, k))
    deriv = np.stack([p_j, 1 - p_j, -p_j, -(1 - p_j)], axis=2)

    coef = didp * deriv / n
    coef = np.where(stats.joints > 0, coef, 0.0)
    idx = np.arange(k)
    coef[idx, idx, :] = 0.0
    coef = np.ascontiguousarray(coef)

    # Consistency assertion: every occupied cell must have positive mass.
    bad = np.where(stats.joints > 0, 0.0, 1.0)
    bad[idx, idx, :] = 0.0
    if _kernels.mi_grad_gather(u, np.ascontiguousarray(bad)).any():
        raise ShapeError(
            "codes occupy a zero-probability cell; stats do not match codes")

    return _kernels.mi_grad_gather(u, coef)
