"""Numerical laboratory for the approximation's convergence behaviour.

Two experiments live here:

* simulate_slack -- a two-bit probability recursion driven by the
  approximated joint derivative.  The association log-ratio
  d = ln(P_ij / (P_i P_j)) plays the role of the loss derivative: its sign
  says which way the joint must move to approach independence, and the
  slack variable eps = P_ij - P_i P_j is recorded each step.  Marginals
  receive coupled updates (scaled by `coupling`) because in the real system
  a bit flip moves marginal and joint together.  Probabilities are kept
  inside the Frechet box [max(0, P_i+P_j-1), min(P_i, P_j)] (joint) and
  [0, 1] (marginals); every clamp is logged.  The box also enforces
  |eps| <= 1/4 at every step.

* scatter_experiment -- MI-only training from a collapsed encoder, with
  each K-bit code split into two K/2-bit integers so successive frames show
  the codes spreading over a 2-D grid.  The collapsed start is a saturating
  bias: bias = -min(X W) + margin, which sends every sample to the all-+1
  code while preserving the per-sample spread of X W (a fully zeroed model
  would give all samples identical gradients and never diverge).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import encoder, mutual_info
from .errors import ConfigError, ShapeError
from .tensor import SeededRng

_TINY = 1e-12


@dataclass
class SlackTrace:
    steps: int
    epsilon_series: np.ndarray   # steps+1 values, eps[0] is the init
    lr_series: np.ndarray        # steps values
    delta_i_series: np.ndarray   # marginal-update magnitudes |Delta_i^t|
    delta_j_series: np.ndarray
    clamp_steps: list            # step indices where a clamp fired


@dataclass
class ScatterFrame:
    step: int
    points: np.ndarray          # N x 2 int64 grid coordinates


def harmonic_schedule(eta0: float):
    """eta_t = eta0 / (1 + t): summable-decay default of the lab."""
    return lambda t: eta0 / (1.0 + t)


def constant_schedule(eta: float):
    return lambda t: eta


def simulate_slack(init_joint: float, init_marginals, schedule, steps: int,
                   coupling: float = 0.1) -> SlackTrace:
    """Iterate the approximated update on (P_ij, P_i, P_j) for `steps` steps."""
    p_i, p_j = (float(x) for x in init_marginals)
    p_ij = float(init_joint)
    for name, v in (("P_i", p_i), ("P_j", p_j), ("P_ij", p_ij)):
        if not 0.0 <= v <= 1.0 or not np.isfinite(v):
            raise ConfigError(f"{name}={v} is not a probability")
    if not (max(0.0, p_i + p_j - 1.0) - 1e-12 <= p_ij
            <= min(p_i, p_j) + 1e-12):
        raise ConfigError(
            f"P_ij={p_ij} inconsistent with marginals ({p_i}, {p_j})")
    if steps < 1:
        raise ConfigError("steps must be >= 1")

    eps = np.empty(steps + 1)
    lrs = np.empty(steps)
    d_i_abs = np.empty(steps)
    d_j_abs = np.empty(steps)
    clamp_steps = []
    eps[0] = p_ij - p_i * p_j
    for t in range(steps):
        eta = float(schedule(t))
        if eta <= 0:
            raise ConfigError(f"schedule produced non-positive eta at t={t}")
        lrs[t] = eta
        d = np.log((p_ij + _TINY) / (p_i * p_j + _TINY))
        p_ij_new = p_ij - eta * d * p_j
        delta_i = eta * d * coupling * p_j
        delta_j = eta * d * coupling * p_i
        d_i_abs[t] = abs(delta_i)
        d_j_abs[t] = abs(delta_j)
        p_i_new = min(max(p_i - delta_i, 0.0), 1.0)
        p_j_new = min(max(p_j - delta_j, 0.0), 1.0)
        lo = max(0.0, p_i_new + p_j_new - 1.0)
        hi = min(p_i_new, p_j_new)
        if p_ij_new < lo or p_ij_new > hi:
            clamp_steps.append(t)
            p_ij_new = min(max(p_ij_new, lo), hi)
        p_i, p_j, p_ij = p_i_new, p_j_new, p_ij_new
        eps[t + 1] = p_ij - p_i * p_j
    return SlackTrace(steps, eps, lrs, d_i_abs, d_j_abs, clamp_steps)


def collapsed_model(features: np.ndarray, code_len: int, rng: SeededRng,
                    margin: float = 0.01) -> encoder.HashModel:
    """Encoder whose bias saturates every sample to the all-+1 code."""
    model = encoder.init_model(features.shape[1], code_len, rng)
    h, _ = encoder.forward(model, features)
    model.bias = -h.min(axis=0) + margin
    return model


def _split_points(codes: np.ndarray) -> np.ndarray:
    n, k = codes.shape
    half = k // 2
    if half > 62:
        raise ShapeError("scatter grid supports at most 124-bit codes")
    weights = (np.int64(1) << np.arange(half, dtype=np.int64))
    bits = (codes > 0).astype(np.int64)
    x = bits[:, :half] @ weights
    y = bits[:, half:] @ weights
    return np.stack([x, y], axis=1)


def distinct_points(frame: ScatterFrame) -> int:
    return np.unique(frame.points, axis=0).shape[0]


def scatter_experiment(features: np.ndarray, config, steps: int = 30,
                       margin: float = 0.01, model=None):
    """MI-only training; returns steps+1 frames (frame 0 is the init).

    The update is beta * mi_gradient through the straight-through estimator
    and the linear layer, applied with plain SGD at config.lr.  K must be
    even so codes split into two equal halves.
    """
    k = config.code_len
    if k % 2:
        raise ShapeError("scatter_experiment requires an even code length")
    if model is None:
        model = collapsed_model(features, k, SeededRng(config.seed), margin)
    frames = []
    for step in range(steps + 1):
        _, codes = encoder.forward(model, features)
        frames.append(ScatterFrame(step, _split_points(codes)))
        if step == steps:
            break
        stats = mutual_info.estimate_stats(codes)
        grad_b = config.beta * mutual_info.mi_gradient(codes, stats)
        grad_h = encoder.backward_straight_through(grad_b)
        grads = encoder.backward_linear(grad_h, features)
        from .training import plain_sgd_step
        model = plain_sgd_step(model, grads, config.lr)
    return frames
