"""Optimizers and the main training loop.

Each epoch: one full-dataset shuffle step (plain SGD against beta * L_m
through the straight-through estimator), then minibatch momentum-SGD on
L_r = L_sim + alpha * L_reg.  The shuffle optimizer deliberately carries no
momentum and no weight decay; both optimizers share the decayed learning
rate schedule.

Determinism: the model-init stream and the data-loader stream are two
independent SeededRng instances, both derived from config.seed.  Identical
config implies bit-identical trajectories, logs, and final parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from . import encoder, mutual_info, objectives
from .errors import ConfigError, ShapeError, TrainingError
from .tensor import SeededRng


def default_beta(code_len: int) -> float:
    """Per-width default MI weight: 1e-4 / 1e-3 / 1e-2 for 16 / 32 / 64 bits.

    Other widths take the nearest bucket (<=24 bits: 1e-4; <=48: 1e-3).
    """
    if code_len <= 24:
        return 1e-4
    if code_len <= 48:
        return 1e-3
    return 1e-2


@dataclass
class TrainConfig:
    code_len: int = 16
    batch_size: int = 32
    lr: float = 1e-3
    alpha: float = 0.1
    beta: float | None = None   # None -> default_beta(code_len)
    epochs: int = 300
    lr_decay_every: int = 100
    lr_decay_factor: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    seed: int = 0
    shuffle_iters: int = 1

    def __post_init__(self):
        if self.beta is None:
            self.beta = default_beta(self.code_len)
        self.validate()

    def validate(self):
        checks = [
            (self.code_len >= 2, "code_len must be >= 2"),
            (self.batch_size >= 2, "batch_size must be >= 2"),
            (self.lr > 0, "lr must be > 0"),
            (self.alpha >= 0, "alpha must be >= 0"),
            (self.beta >= 0, "beta must be >= 0"),
            (self.epochs >= 0, "epochs must be >= 0"),
            (self.lr_decay_every >= 1, "lr_decay_every must be >= 1"),
            (self.lr_decay_factor > 0, "lr_decay_factor must be > 0"),
            (0 <= self.momentum < 1, "momentum must be in [0, 1)"),
            (self.weight_decay >= 0, "weight_decay must be >= 0"),
            (self.shuffle_iters >= 1, "shuffle_iters must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    def field_names(self):
        return [f.name for f in fields(self)]


@dataclass
class OptimizerState:
    momentum: float
    weight_decay: float
    vel_w: np.ndarray = None
    vel_b: np.ndarray = None

    @classmethod
    def for_model(cls, model, momentum, weight_decay):
        return cls(momentum, weight_decay,
                   np.zeros_like(model.weights), np.zeros_like(model.bias))


def sgd_step(model, grads, state: OptimizerState, lr: float):
    """Momentum SGD with decoupled-from-nothing classic weight decay:
    v <- m*v + (g + wd*p); p <- p - lr*v.  Updates in place."""
    grad_w, grad_b = grads
    if grad_w.shape != model.weights.shape or grad_b.shape != model.bias.shape:
        raise ShapeError("gradient shapes do not match model parameters")
    state.vel_w = state.momentum * state.vel_w + (
        grad_w + state.weight_decay * model.weights)
    state.vel_b = state.momentum * state.vel_b + (
        grad_b + state.weight_decay * model.bias)
    model.weights = model.weights - lr * state.vel_w
    model.bias = model.bias - lr * state.vel_b
    return model, state


def plain_sgd_step(model, grads, lr: float):
    """p <- p - lr*g; no momentum, no weight decay (the shuffle optimizer)."""
    grad_w, grad_b = grads
    if grad_w.shape != model.weights.shape or grad_b.shape != model.bias.shape:
        raise ShapeError("gradient shapes do not match model parameters")
    model.weights = model.weights - lr * grad_w
    model.bias = model.bias - lr * grad_b
    return model


def lr_at_epoch(config: TrainConfig, epoch: int) -> float:
    return config.lr * config.lr_decay_factor ** (epoch // config.lr_decay_every)


def shuffle_step(model, features, config: TrainConfig, epoch: int):
    """One (or shuffle_iters) full-dataset MI minimization updates.

    Returns (model, l_m_before, l_m_after).  beta == 0 leaves the model
    untouched and reports the current L_m twice.
    """
    _, codes = encoder.forward(model, features)
    stats = mutual_info.estimate_stats(codes)
    lm_before = mutual_info.mi_loss(stats)
    if config.beta == 0:
        return model, lm_before, lm_before
    lr = lr_at_epoch(config, epoch)
    for _ in range(config.shuffle_iters):
        grad_b = config.beta * mutual_info.mi_gradient(codes, stats)
        grad_h = encoder.backward_straight_through(grad_b)
        grads = encoder.backward_linear(grad_h, features)
        model = plain_sgd_step(model, grads, lr)
        _, codes = encoder.forward(model, features)
        stats = mutual_info.estimate_stats(codes)
    return model, lm_before, mutual_info.mi_loss(stats)


def _epoch_batches(order: np.ndarray, batch_size: int):
    n = order.shape[0]
    for s in range(0, n, batch_size):
        idx = order[s:s + batch_size]
        if idx.shape[0] < 2:
            break
        yield idx


def distinct_code_count(codes: np.ndarray) -> int:
    packed = encoder.pack(codes)
    return np.unique(packed.words, axis=0).shape[0]


def train(model, features, config: TrainConfig, callbacks=None):
    """Run the full loop; returns (model, log) where log is a list of dicts
    with keys epoch, lr, L_m, L_sim, L_reg, distinct_codes.

    Per-epoch quantities: L_m and distinct_codes are measured on the full
    dataset at epoch end; L_sim and L_reg are minibatch means seen during
    the epoch.  Raises TrainingError on a non-finite loss.
    """
    if features.shape[0] < 1:
        raise ShapeError("empty dataset")
    loader_rng = SeededRng(config.seed)
    state = OptimizerState.for_model(model, config.momentum,
                                     config.weight_decay)
    log = []
    for epoch in range(config.epochs):
        lr = lr_at_epoch(config, epoch)
        if config.beta > 0:
            model, _, _ = shuffle_step(model, features, config, epoch)
        sim_sum = reg_sum = 0.0
        n_batches = 0
        order = loader_rng.permutation(features.shape[0])
        for idx in _epoch_batches(order, config.batch_size):
            x = features[idx]
            h, b = encoder.forward(model, x)
            sim = objectives.sim_loss(h, b)
            reg = objectives.reg_loss(h, b)
            batch_loss = sim.value + config.alpha * reg.value
            if not np.isfinite(batch_loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches}: "
                    f"L_sim={sim.value!r} L_reg={reg.value!r}")
            grad_h = encoder.backward_straight_through(
                sim.grad_h + config.alpha * reg.grad_h)
            grads = encoder.backward_linear(grad_h, x)
            model, state = sgd_step(model, grads, state, lr)
            sim_sum += sim.value
            reg_sum += reg.value
            n_batches += 1
        _, codes = encoder.forward(model, features)
        stats = mutual_info.estimate_stats(codes)
        row = {
            "epoch": epoch,
            "lr": lr,
            "L_m": mutual_info.mi_loss(stats),
            "L_sim": sim_sum / max(n_batches, 1),
            "L_reg": reg_sum / max(n_batches, 1),
            "distinct_codes": distinct_code_count(codes),
        }
        log.append(row)
        if callbacks:
            for cb in callbacks:
                cb(epoch, row)
    return model, log
