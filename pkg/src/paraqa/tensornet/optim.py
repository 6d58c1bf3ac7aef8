"""RMSProp with gradient-norm clipping, plus uniform initialization."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidArgumentError
from .store import ParamStore


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float = 5.0):
    """Scale all gradients by max_norm/g when the global L2 norm g exceeds it."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads
    factor = max_norm / total
    return {name: g * factor for name, g in grads.items()}


def rmsprop_update(store: ParamStore, grads: dict[str, np.ndarray],
                   lr: float = 0.01, decay: float = 0.95, eps: float = 1e-8):
    """a <- decay*a + (1-decay)*g^2; p <- p - lr*g/sqrt(a+eps).

    Non-trainable parameters receive no update even if a gradient is
    passed for them.
    """
    for name, g in grads.items():
        t = store[name]
        if not t.requires_grad:
            continue
        a = store.accum[name]
        a *= decay
        a += (1.0 - decay) * g * g
        t.data = t.data - lr * g / np.sqrt(a + eps)
    return store


def init_uniform(store: ParamStore, lo: float = -0.08, hi: float = 0.08,
                 seed: int | np.random.Generator = 0):
    """Fill every trainable parameter i.i.d. uniform[lo, hi), deterministically."""
    if lo >= hi:
        raise InvalidArgumentError(f"init bounds require lo < hi: [{lo}, {hi}]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for name in store.trainable_names():
        t = store[name]
        t.data = rng.uniform(lo, hi, size=t.data.shape)
    return store
