"""Greedy and beam-search decoding from a trained checkpoint."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..text import Sentence, detokenize
from .checkpoint import Checkpoint
from .model import attend, encode, lstm_cell, make_batch, output_logprobs
from .vocab import BOS, EOS, PAD, encode_ids


@dataclass(frozen=True)
class Translation:
    sentence: Sentence
    tokens: tuple[str, ...]
    scores: tuple[float, ...]  # log-probability of each output token
    finished: bool  # True when EOS was produced
    truncated_input: bool = False

    @property
    def empty(self) -> bool:
        return not self.tokens

    @property
    def log_prob(self) -> float:
        return float(sum(self.scores))


class _Decoder:
    """Encoder outputs for one source sentence plus a stepping function."""

    def __init__(self, ckpt: Checkpoint, src_ids):
        self.params = ckpt.params
        batch = make_batch([src_ids], dtype=self.params["out_W"].dtype)
        self.enc_out, self.h0, self.c0, _ = encode(self.params, batch)
        self.keys = self.enc_out @ self.params["attn_W"].T
        self.mask = batch.src_mask

    def step(self, prev_ids, h, c):
        k = len(prev_ids)
        x = self.params["tgt_embed"][prev_ids]
        h, c, _ = lstm_cell(self.params["dec_W"], self.params["dec_b"], x, h, c)
        enc = np.broadcast_to(self.enc_out, (k,) + self.enc_out.shape[1:])
        keys = np.broadcast_to(self.keys, (k,) + self.keys.shape[1:])
        mask = np.broadcast_to(self.mask, (k,) + self.mask.shape[1:])
        _, ctx = attend(self.params, h, enc, keys, mask)
        logp, _ = output_logprobs(self.params, h, ctx)
        logp = logp.copy()
        logp[:, PAD] = -np.inf
        logp[:, BOS] = -np.inf
        return logp, h, c


def _greedy(dec: _Decoder, max_len: int):
    h, c = dec.h0, dec.c0
    prev = np.array([BOS])
    ids, scores = [], []
    while True:
        logp, h, c = dec.step(prev, h, c)
        nxt = int(np.argmax(logp[0]))
        if nxt == EOS:
            return ids, scores, True
        if len(ids) == max_len:
            return ids, scores, False
        ids.append(nxt)
        scores.append(float(logp[0, nxt]))
        prev = np.array([nxt])


def _beam(dec: _Decoder, k: int, max_len: int):
    # live hypotheses: token ids, per-token scores, cumulative log-prob
    live = [([], [], 0.0)]
    h, c = dec.h0, dec.c0
    finished = []  # (normalized score, order, ids, scores, ended)
    order = 0
    for _ in range(max_len + 1):
        prev = np.array([hyp[0][-1] if hyp[0] else BOS for hyp in live])
        logp, h_new, c_new = dec.step(prev, h, c)
        cum = np.array([hyp[2] for hyp in live])[:, None] + logp
        flat = cum.ravel()
        top = np.argsort(-flat, kind="stable")[:k]
        next_live, rows = [], []
        for f in top:
            if not np.isfinite(flat[f]):
                continue
            r, tok = divmod(int(f), logp.shape[1])
            ids, scores, _ = live[r]
            if tok == EOS:
                finished.append((flat[f] / (len(ids) + 1), order, ids, scores, True))
                order += 1
            elif len(ids) < max_len:
                next_live.append((ids + [tok], scores + [float(logp[r, tok])], float(flat[f])))
                rows.append(r)
            else:
                finished.append((live[r][2] / max(len(ids), 1), order, ids, scores, False))
                order += 1
        if len(finished) >= k or not next_live:
            break
        live = next_live
        h, c = h_new[rows], c_new[rows]
    else:
        for ids, scores, total in live:
            finished.append((total / max(len(ids), 1), order, ids, scores, False))
            order += 1
    best = max(finished, key=lambda f: (f[0], -f[1]))
    return best[2], best[3], best[4]


def translate(checkpoint: Checkpoint, sentence, mode="greedy", beam_size=4, max_len=None) -> Translation:
    """Decode ``sentence`` until EOS or ``max_len`` output tokens.

    ``mode`` is ``"greedy"`` or ``"beam"``; beam hypotheses are ranked by
    log-probability divided by their token count (EOS included when
    present). PAD and BOS are never emitted.
    """
    if mode not in ("greedy", "beam"):
        raise ContractError(f"unknown decoding mode {mode!r}")
    if mode == "beam" and beam_size < 1:
        raise ContractError("beam_size must be >= 1")
    config, vocab = checkpoint.config, checkpoint.vocab
    if max_len is None:
        max_len = config.max_target_len - 2
    if max_len < 0:
        raise ContractError("max_len must be >= 0")
    enc = encode_ids(sentence, vocab, "source", config.max_source_len)
    if not enc.ids:
        return Translation(Sentence(""), (), (), False, enc.truncated)
    dec = _Decoder(checkpoint, enc.ids)
    if mode == "greedy":
        ids, scores, done = _greedy(dec, max_len)
    else:
        ids, scores, done = _beam(dec, beam_size, max_len)
    tokens = tuple(vocab.token(i) for i in ids)
    return Translation(Sentence(detokenize(tokens)), tokens, tuple(scores), done, enc.truncated)
