"""Central finite-difference check of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .model import PARAM_ORDER, ModelConfig, backward, forward, init_params, make_batch


@dataclass
class GradCheckReport:
    max_rel_error: dict  # parameter group -> worst relative error
    n_checked: dict

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values())

    def passed(self, tol=1e-4) -> bool:
        return self.worst < tol

    def lines(self):
        for name in PARAM_ORDER:
            yield f"{name}\t{self.max_rel_error[name]:.3e}\t{self.n_checked[name]}"


def standard_tiny_batch(vocab_size=20, seed=0):
    """Two pairs of unequal lengths, so padding paths are exercised."""
    rng = np.random.default_rng(seed)
    lo = 4
    sources = [rng.integers(lo, vocab_size, size=4).tolist(), rng.integers(lo, vocab_size, size=6).tolist()]
    targets = [
        [1] + rng.integers(lo, vocab_size, size=3).tolist() + [2],
        [1] + rng.integers(lo, vocab_size, size=1).tolist() + [2],
    ]
    return sources, targets


def gradient_check(config: ModelConfig, sources, targets, vocab_size, epsilon=1e-4, seed=0, dtype=np.longdouble, params=None) -> GradCheckReport:
    """Compare analytic gradients with (L(p+eps) - L(p-eps)) / (2 eps), element by element.

    Relative error is ``|a - n| / max(|a|, |n|, 1e-8)``. Runs in extended
    precision by default so round-off stays far below the tolerance.
    """
    if not epsilon > 0:
        raise ContractError("epsilon must be positive")
    if params is None:
        params = init_params(config, vocab_size, seed=seed, dtype=dtype)
    else:
        params = {k: np.array(v, dtype=dtype) for k, v in params.items()}
    batch = make_batch(sources, targets, dtype=dtype)
    grads = backward(params, config, forward(params, config, batch))
    eps = dtype(epsilon)
    errors, counts = {}, {}
    for name in PARAM_ORDER:
        p = params[name]
        flat = p.reshape(-1)
        g = grads[name].reshape(-1)
        worst = 0.0
        for j in range(flat.size):
            old = flat[j]
            flat[j] = old + eps
            up = forward(params, config, batch).loss
            flat[j] = old - eps
            down = forward(params, config, batch).loss
            flat[j] = old
            num = (up - down) / (2 * eps)
            rel = abs(g[j] - num) / max(abs(g[j]), abs(num), 1e-8)
            worst = max(worst, float(rel))
        errors[name] = worst
        counts[name] = flat.size
    return GradCheckReport(errors, counts)
