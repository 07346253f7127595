"""Adam training loop with global-norm clipping and a seeded batch schedule."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, NumericError
from .checkpoint import Checkpoint
from .model import PARAM_ORDER, ModelConfig, backward, forward, init_params, make_batch
from .vocab import Vocabulary, encode_ids

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-3
    steps: int = 1000
    batch_size: int = 16
    seed: int = 0
    clip_norm: float = 5.0
    log_every: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1 or self.log_every < 1:
            raise ContractError("steps, batch_size and log_every must be >= 1")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise ContractError("learning_rate and clip_norm must be positive")


def batch_schedule(n_items: int, batch_size: int, steps: int, seed: int) -> list[np.ndarray]:
    """Index batches for every step: one seeded permutation per epoch, cut into chunks.

    The final chunk of an epoch may be smaller than ``batch_size``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed & ((1 << 63) - 1), 1]))
    out = []
    while len(out) < steps:
        perm = rng.permutation(n_items)
        for k in range(0, n_items, batch_size):
            out.append(perm[k : k + batch_size])
            if len(out) == steps:
                break
    return out


def clip_by_global_norm(grads: dict, max_norm: float) -> float:
    """Scale ``grads`` in place so their joint L2 norm is at most ``max_norm``; returns the norm before clipping."""
    total = float(np.sqrt(sum(float(np.sum(grads[k] * grads[k])) for k in PARAM_ORDER)))
    if total > max_norm:
        factor = max_norm / total
        for k in PARAM_ORDER:
            grads[k] *= factor
    return total


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.beta1**self.t
        c2 = 1 - self.beta2**self.t
        for k in PARAM_ORDER:
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def encode_pairs(pairs, vocab: Vocabulary, config: ModelConfig):
    """Id sequences for (source, target) pairs; returns (sources, targets, n_truncated)."""
    sources, targets = [], []
    truncated = 0
    for pair in pairs:
        src, tgt = (pair.source, pair.target) if hasattr(pair, "source") else pair
        s = encode_ids(src, vocab, "source", config.max_source_len)
        t = encode_ids(tgt, vocab, "target", config.max_target_len)
        if not s.ids:
            raise ContractError(f"source without words: {src!r}")
        truncated += s.truncated + t.truncated
        sources.append(s.ids)
        targets.append(t.ids)
    return sources, targets, truncated


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    loss_trace: list  # [(step, loss), ...]

    def trace_csv(self) -> str:
        return "step,loss\n" + "".join(f"{s},{loss!r}\n" for s, loss in self.loss_trace)


def train(pairs, vocab: Vocabulary, config: ModelConfig, train_config: TrainConfig, schedule=None, params=None) -> TrainResult:
    """Fit the model to ``pairs`` and return the checkpoint plus loss trace.

    The loss is recorded at step 1, every ``log_every`` steps and at the
    last step. ``schedule`` overrides the seeded batch schedule (a list of
    index arrays into ``pairs``).
    """
    pairs = list(pairs)
    if not pairs:
        raise ContractError("cannot train on an empty corpus")
    sources, targets, truncated = encode_pairs(pairs, vocab, config)
    if truncated:
        logger.info("truncated %d sequences to the configured maximum length", truncated)
    tc = train_config
    if params is None:
        params = init_params(config, len(vocab), seed=tc.seed)
    else:
        params = {k: v.copy() for k, v in params.items()}
    if schedule is None:
        schedule = batch_schedule(len(pairs), tc.batch_size, tc.steps, tc.seed)
    opt = Adam(params, tc.learning_rate, tc.beta1, tc.beta2, tc.adam_eps)
    trace = []
    loss = float("nan")
    for step, idx in enumerate(schedule, start=1):
        batch = make_batch([sources[i] for i in idx], [targets[i] for i in idx])
        try:
            result = forward(params, config, batch)
        except NumericError as exc:
            raise NumericError(f"step {step}: {exc}; trace so far: {trace[-5:]}") from None
        loss = float(result.loss)
        if not np.isfinite(loss):
            raise NumericError(f"training diverged at step {step}; trace so far: {trace[-5:]}")
        if step == 1 or step % tc.log_every == 0 or step == len(schedule):
            trace.append((step, loss))
            logger.debug("step %d loss %.6f", step, loss)
        grads = backward(params, config, result)
        clip_by_global_norm(grads, tc.clip_norm)
        opt.step(params, grads)
    ckpt = Checkpoint(config=config, vocab=vocab, params=params, steps=len(schedule), final_loss=loss)
    return TrainResult(ckpt, trace)
