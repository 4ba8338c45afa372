"""Synthetic labeled Gaussian-cluster datasets for desk-scale experiments.

Two layouts:

* gaussian_clusters -- c independent centers drawn N(0, center_scale^2)
  per coordinate, isotropic noise around each.

* paired_clusters -- c/2 "sibling" pairs: each pair shares a base center g
  and sits at g +/- delta with a small offset scale.  Sibling clusters have
  strongly correlated features, which makes an unregularized encoder prone
  to assigning both siblings one code; useful for studying code conflicts.

Labels are integers 0..c-1 assigned round-robin, so cluster sizes are
balanced (within one sample).
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .tensor import SeededRng


def gaussian_clusters(n: int, dim: int, clusters: int, rng: SeededRng,
                      center_scale: float = 1.0, noise: float = 0.35):
    if n < 1 or dim < 1 or clusters < 1:
        raise ConfigError("n, dim, clusters must all be >= 1")
    centers = rng.normal(0.0, center_scale, (clusters, dim))
    labels = np.arange(n) % clusters
    feats = centers[labels] + rng.normal(0.0, noise, (n, dim))
    return feats, labels


def paired_clusters(n: int, dim: int, clusters: int, rng: SeededRng,
                    base_scale: float = 1.0, pair_offset: float = 0.25,
                    noise: float = 0.30):
    if clusters % 2:
        raise ConfigError("paired_clusters needs an even cluster count")
    if n < 1 or dim < 1 or clusters < 2:
        raise ConfigError("n, dim must be >= 1 and clusters >= 2")
    half = clusters // 2
    g = rng.normal(0.0, base_scale, (half, dim))
    delta = rng.normal(0.0, pair_offset, (half, dim))
    centers = np.empty((clusters, dim))
    centers[0::2] = g + delta
    centers[1::2] = g - delta
    labels = np.arange(n) % clusters
    feats = centers[labels] + rng.normal(0.0, noise, (n, dim))
    return feats, labels
