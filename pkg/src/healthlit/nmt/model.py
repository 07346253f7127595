"""BiLSTM encoder with a bilinear-attention LSTM decoder, in numpy.

Forward and backward passes are written by hand and work on padded batches.
Every array follows the dtype of the parameters, so the same code runs in
float64 for training and in extended precision for gradient checks.

Shapes: B batch, S source length, T target steps, E embedding size,
H hidden size per encoder direction, D = 2H decoder size, V vocabulary.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ContractError, NumericError
from .vocab import PAD

PARAM_ORDER = (
    "src_embed",
    "tgt_embed",
    "enc_fwd_W",
    "enc_fwd_b",
    "enc_bwd_W",
    "enc_bwd_b",
    "dec_W",
    "dec_b",
    "attn_W",
    "out_W",
    "out_b",
)

INIT_SCALE = 0.08


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 32
    hidden_dim: int = 64
    max_source_len: int = 60
    max_target_len: int = 60

    def __post_init__(self):
        for name, value in asdict(self).items():
            if int(value) < 1:
                raise ContractError(f"{name} must be >= 1, got {value}")

    @property
    def decoder_dim(self) -> int:
        return 2 * self.hidden_dim

    def param_shapes(self, vocab_size: int) -> dict:
        E, H, D, V = self.embed_dim, self.hidden_dim, self.decoder_dim, vocab_size
        return {
            "src_embed": (V, E),
            "tgt_embed": (V, E),
            "enc_fwd_W": (4 * H, E + H),
            "enc_fwd_b": (4 * H,),
            "enc_bwd_W": (4 * H, E + H),
            "enc_bwd_b": (4 * H,),
            "dec_W": (4 * D, E + D),
            "dec_b": (4 * D,),
            "attn_W": (D, 2 * H),
            "out_W": (V, D + 2 * H),
            "out_b": (V,),
        }


def init_params(config: ModelConfig, vocab_size: int, seed=0, dtype=np.float64) -> dict:
    """Uniform(-0.08, 0.08) weights, zero output bias."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in config.param_shapes(vocab_size).items():
        if name == "out_b":
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape).astype(dtype)
    return params


def check_params(params, config: ModelConfig, vocab_size: int):
    shapes = config.param_shapes(vocab_size)
    for name in PARAM_ORDER:
        if name not in params:
            raise ContractError(f"missing parameter {name}")
        if params[name].shape != shapes[name]:
            raise ContractError(f"{name} has shape {params[name].shape}, expected {shapes[name]}")
        if not np.all(np.isfinite(params[name])):
            raise NumericError(f"parameter {name} is not finite")


def _sigmoid(x):
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


@dataclass
class Batch:
    src: np.ndarray  # (B, S) ids, PAD-filled
    src_mask: np.ndarray  # (B, S) 1.0 on real tokens
    src_len: np.ndarray  # (B,)
    tgt_in: np.ndarray  # (B, T) BOS w1 ... wn
    tgt_out: np.ndarray  # (B, T) w1 ... wn EOS
    tgt_mask: np.ndarray  # (B, T)

    @property
    def n_tokens(self) -> int:
        return int(self.tgt_mask.sum())


def make_batch(sources, targets=None, dtype=np.float64) -> Batch:
    """Pad id sequences into a :class:`Batch`.

    ``targets`` must already carry BOS/EOS; when omitted the target arrays
    are empty (encoder-only use).
    """
    sources = [list(s) for s in sources]
    if not sources:
        raise ContractError("empty batch")
    if any(len(s) == 0 for s in sources):
        raise ContractError("source sequence of length zero")
    B = len(sources)
    S = max(len(s) for s in sources)
    src = np.full((B, S), PAD, dtype=np.int64)
    src_mask = np.zeros((B, S), dtype=dtype)
    for i, s in enumerate(sources):
        src[i, : len(s)] = s
        src_mask[i, : len(s)] = 1
    src_len = np.array([len(s) for s in sources], dtype=np.int64)
    if targets is None:
        T = 0
        tgt_in = np.zeros((B, 0), dtype=np.int64)
        tgt_out = np.zeros((B, 0), dtype=np.int64)
        tgt_mask = np.zeros((B, 0), dtype=dtype)
    else:
        targets = [list(t) for t in targets]
        if len(targets) != B:
            raise ContractError("sources and targets differ in batch size")
        if any(len(t) < 2 for t in targets):
            raise ContractError("target sequences need at least BOS and one more id")
        T = max(len(t) for t in targets) - 1
        tgt_in = np.full((B, T), PAD, dtype=np.int64)
        tgt_out = np.full((B, T), PAD, dtype=np.int64)
        tgt_mask = np.zeros((B, T), dtype=dtype)
        for i, t in enumerate(targets):
            n = len(t) - 1
            tgt_in[i, :n] = t[:-1]
            tgt_out[i, :n] = t[1:]
            tgt_mask[i, :n] = 1
    return Batch(src, src_mask, src_len, tgt_in, tgt_out, tgt_mask)


# -- LSTM ---------------------------------------------------------------------


def lstm_cell(W, b, x, h, c):
    """One LSTM step; gate order in W/b is input, forget, cell, output."""
    n = h.shape[-1]
    xh = np.concatenate([x, h], axis=-1)
    z = xh @ W.T + b
    i = _sigmoid(z[..., :n])
    f = _sigmoid(z[..., n : 2 * n])
    g = np.tanh(z[..., 2 * n : 3 * n])
    o = _sigmoid(z[..., 3 * n :])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    return h_new, c_new, (xh, i, f, g, o, c, tc)


def _lstm_forward(W, b, xs, mask, h0, c0):
    """Masked LSTM over a (B, L, In) sequence; padded steps carry state unchanged."""
    B, L, _ = xs.shape
    n = h0.shape[-1]
    hs = np.zeros((B, L, n), dtype=xs.dtype)
    h, c = h0, c0
    caches = []
    for t in range(L):
        h_new, c_new, cache = lstm_cell(W, b, xs[:, t], h, c)
        m = mask[:, t, None]
        h = m * h_new + (1 - m) * h
        c = m * c_new + (1 - m) * c
        hs[:, t] = h
        caches.append(cache + (m,))
    return hs, h, c, caches


def _lstm_backward(W, caches, dhs, dh_last, dc_last, in_dim):
    """Backprop through :func:`_lstm_forward`.

    ``dhs`` is the gradient on every step's output, ``dh_last``/``dc_last``
    the gradient on the final carried state.
    """
    B, L, n = dhs.shape
    dW = np.zeros_like(W)
    db = np.zeros(W.shape[0], dtype=W.dtype)
    dxs = np.zeros((B, L, in_dim), dtype=W.dtype)
    dh_next, dc_next = dh_last, dc_last
    for t in reversed(range(L)):
        xh, i, f, g, o, c_prev, tc, m = caches[t]
        dh = dhs[:, t] + dh_next
        dh_new = m * dh
        dc_new = m * dc_next + dh_new * o * (1 - tc * tc)
        do = dh_new * tc
        di = dc_new * g
        dg = dc_new * i
        df = dc_new * c_prev
        dz = np.concatenate([di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)], axis=-1)
        dW += dz.T @ xh
        db += dz.sum(axis=0)
        dxh = dz @ W
        dxs[:, t] = dxh[:, :in_dim]
        dh_next = dxh[:, in_dim:] + (1 - m) * dh
        dc_next = dc_new * f + (1 - m) * dc_next
    return dxs, dW, db, dh_next, dc_next


def _check_finite(name, arr, axis_steps=None):
    if np.all(np.isfinite(arr)):
        return
    if axis_steps is not None:
        bad = np.argwhere(~np.isfinite(arr))
        step = int(bad[0][axis_steps])
        raise NumericError(f"non-finite value in {name} at step {step}")
    raise NumericError(f"non-finite value in {name}")


def _reverse_index(src_len, S):
    """perm[b, p] = len_b-1-p on the real prefix, identity on padding (an involution)."""
    pos = np.arange(S)[None, :]
    lens = src_len[:, None]
    return np.where(pos < lens, lens - 1 - pos, pos)


# -- encoder / decoder -------------------------------------------------------


def encode(params, batch: Batch):
    """Run both encoder directions.

    Returns ``(enc_out, h0, c0, cache)`` where ``enc_out`` is (B, S, 2H) and
    ``h0``/``c0`` are the concatenated final directional states.
    """
    src, mask = batch.src, batch.src_mask
    B, S = src.shape
    W_f, W_b = params["enc_fwd_W"], params["enc_bwd_W"]
    n = W_f.shape[0] // 4
    dtype = W_f.dtype
    zeros = np.zeros((B, n), dtype=dtype)

    x_f = params["src_embed"][src]
    hf, hf_T, cf_T, cache_f = _lstm_forward(W_f, params["enc_fwd_b"], x_f, mask, zeros, zeros)
    _check_finite("forward encoder", hf, axis_steps=1)

    perm = _reverse_index(batch.src_len, S)
    rows = np.arange(B)[:, None]
    src_rev = src[rows, perm]
    x_b = params["src_embed"][src_rev]
    hb_rev, hb_T, cb_T, cache_b = _lstm_forward(W_b, params["enc_bwd_b"], x_b, mask, zeros, zeros)
    _check_finite("backward encoder", hb_rev, axis_steps=1)
    hb = hb_rev[rows, perm]

    enc_out = np.concatenate([hf, hb], axis=-1)
    h0 = np.concatenate([hf_T, hb_T], axis=-1)
    c0 = np.concatenate([cf_T, cb_T], axis=-1)
    cache = {"perm": perm, "src_rev": src_rev, "cache_f": cache_f, "cache_b": cache_b}
    return enc_out, h0, c0, cache


def attend(params, dec_h, enc_out, keys, src_mask):
    """Bilinear attention for decoder states ``dec_h`` (..., D).

    Returns ``(weights, context)``. Padding positions get weight exactly 0.
    """
    if dec_h.ndim == 2:
        scores = np.einsum("bd,bsd->bs", dec_h, keys)
        valid = src_mask > 0
    else:
        scores = np.einsum("btd,bsd->bts", dec_h, keys)
        valid = (src_mask > 0)[:, None, :]
    scores = np.where(valid, scores, -np.inf)
    scores = scores - scores.max(axis=-1, keepdims=True)
    w = np.where(valid, np.exp(scores), 0.0)
    w = w / w.sum(axis=-1, keepdims=True)
    if dec_h.ndim == 2:
        ctx = np.einsum("bs,bsk->bk", w, enc_out)
    else:
        ctx = np.einsum("bts,bsk->btk", w, enc_out)
    return w, ctx


def output_logprobs(params, dec_h, ctx):
    u = np.concatenate([dec_h, ctx], axis=-1)
    logits = u @ params["out_W"].T + params["out_b"]
    logits = logits - logits.max(axis=-1, keepdims=True)
    logp = logits - np.log(np.exp(logits).sum(axis=-1, keepdims=True))
    return logp, u


@dataclass
class ForwardResult:
    loss: float
    probs: np.ndarray  # (B, T, V) per-step output distributions
    attention: np.ndarray  # (B, T, S)
    batch: Batch
    cache: dict


def forward(params, config: ModelConfig, batch: Batch) -> ForwardResult:
    """Teacher-forced forward pass; loss is the mean NLL over non-PAD targets."""
    if batch.tgt_in.shape[1] == 0:
        raise ContractError("forward needs target sequences")
    if batch.src.shape[1] > config.max_source_len or batch.tgt_in.shape[1] + 1 > config.max_target_len:
        raise ContractError("batch exceeds the configured maximum lengths")
    enc_out, h0, c0, enc_cache = encode(params, batch)
    keys = enc_out @ params["attn_W"].T  # (B, S, D)

    y = params["tgt_embed"][batch.tgt_in]
    dec_h, _, _, dec_cache = _lstm_forward(params["dec_W"], params["dec_b"], y, batch.tgt_mask, h0, c0)
    _check_finite("decoder", dec_h, axis_steps=1)

    attn, ctx = attend(params, dec_h, enc_out, keys, batch.src_mask)
    logp, u = output_logprobs(params, dec_h, ctx)
    _check_finite("output distribution", logp, axis_steps=1)

    B, T = batch.tgt_out.shape
    picked = np.take_along_axis(logp, batch.tgt_out[..., None], axis=-1)[..., 0]
    n_tok = batch.tgt_mask.sum()
    loss = -(picked * batch.tgt_mask).sum() / n_tok
    cache = {
        "enc": enc_cache,
        "enc_out": enc_out,
        "keys": keys,
        "dec": dec_cache,
        "dec_h": dec_h,
        "u": u,
        "n_tok": n_tok,
    }
    return ForwardResult(loss, np.exp(logp), attn, batch, cache)


def backward(params, config: ModelConfig, result: ForwardResult, scale=1.0) -> dict:
    """Exact gradients of ``scale * result.loss`` for every parameter."""
    batch, cache = result.batch, result.cache
    E, H = config.embed_dim, config.hidden_dim
    D = config.decoder_dim
    enc_out, keys, dec_h, u = cache["enc_out"], cache["keys"], cache["dec_h"], cache["u"]
    attn = result.attention
    grads = {k: np.zeros_like(v) for k, v in params.items()}

    # output layer
    dlogits = result.probs.copy()
    B, T, V = dlogits.shape
    bi, ti = np.meshgrid(np.arange(B), np.arange(T), indexing="ij")
    dlogits[bi, ti, batch.tgt_out] -= 1.0
    dlogits *= (batch.tgt_mask * (scale / cache["n_tok"]))[..., None]
    grads["out_W"] = np.einsum("btv,btk->vk", dlogits, u)
    grads["out_b"] = dlogits.sum(axis=(0, 1))
    du = dlogits @ params["out_W"]
    d_dec_h = du[..., :D].copy()
    d_ctx = du[..., D:]

    # attention
    d_attn = np.einsum("btk,bsk->bts", d_ctx, enc_out)
    d_enc = np.einsum("bts,btk->bsk", attn, d_ctx)
    d_scores = attn * (d_attn - (attn * d_attn).sum(axis=-1, keepdims=True))
    d_dec_h += np.einsum("bts,bsd->btd", d_scores, keys)
    d_keys = np.einsum("bts,btd->bsd", d_scores, dec_h)
    grads["attn_W"] = np.einsum("bsd,bsk->dk", d_keys, enc_out)
    d_enc += d_keys @ params["attn_W"]

    # decoder LSTM
    zeros_d = np.zeros((B, D), dtype=dlogits.dtype)
    dy, grads["dec_W"], grads["dec_b"], dh0, dc0 = _lstm_backward(
        params["dec_W"], cache["dec"], d_dec_h, zeros_d, zeros_d, E
    )
    np.add.at(grads["tgt_embed"], batch.tgt_in, dy)

    # encoder
    enc = cache["enc"]
    rows = np.arange(B)[:, None]
    dx_f, grads["enc_fwd_W"], grads["enc_fwd_b"], _, _ = _lstm_backward(
        params["enc_fwd_W"], enc["cache_f"], d_enc[..., :H], dh0[:, :H], dc0[:, :H], E
    )
    d_hb_rev = d_enc[..., H:][rows, enc["perm"]]
    dx_b, grads["enc_bwd_W"], grads["enc_bwd_b"], _, _ = _lstm_backward(
        params["enc_bwd_W"], enc["cache_b"], d_hb_rev, dh0[:, H:], dc0[:, H:], E
    )
    np.add.at(grads["src_embed"], batch.src, dx_f)
    np.add.at(grads["src_embed"], enc["src_rev"], dx_b)

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
    return grads


def loss_and_grads(params, config: ModelConfig, batch: Batch):
    result = forward(params, config, batch)
    return result.loss, backward(params, config, result)
