"""Shared source/target vocabulary over normalized word tokens."""

from __future__ import annotations

from collections import Counter, namedtuple

from ..errors import ContractError
from ..text import Sentence, as_sentence

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")

EncodedIds = namedtuple("EncodedIds", ["ids", "truncated"])


class Vocabulary:
    """Dense token <-> id map with the four special tokens at ids 0-3."""

    def __init__(self, tokens, min_frequency=1, max_size=None):
        tokens = list(tokens)
        if tuple(tokens[: len(SPECIALS)]) != SPECIALS:
            tokens = list(SPECIALS) + [t for t in tokens if t not in SPECIALS]
        self.tokens = tuple(tokens)
        self.index = {t: i for i, t in enumerate(tokens)}
        if len(self.index) != len(tokens):
            raise ContractError("vocabulary tokens must be unique")
        self.min_frequency = min_frequency
        self.max_size = max_size

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    __hash__ = None

    def id(self, token: str) -> int:
        return self.index.get(token, UNK)

    def token(self, idx: int) -> str:
        return self.tokens[idx]

    def to_dict(self) -> dict:
        return {"tokens": list(self.tokens), "min_frequency": self.min_frequency, "max_size": self.max_size}

    @classmethod
    def from_dict(cls, d) -> "Vocabulary":
        return cls(d["tokens"], d.get("min_frequency", 1), d.get("max_size"))


def _pair_sides(pair):
    if hasattr(pair, "source") and hasattr(pair, "target"):
        return pair.source, pair.target
    src, tgt = pair
    return src, tgt


def words_of(x) -> tuple[str, ...]:
    if isinstance(x, (Sentence, str)):
        return as_sentence(x).words
    return tuple(x)


def build_vocab(pairs, min_frequency=1, max_size=None) -> Vocabulary:
    """Count words on both sides and keep the most frequent.

    Tokens seen fewer than ``min_frequency`` times are dropped; of the rest
    at most ``max_size`` (specials not counted) are kept, most frequent
    first, ties broken lexicographically.
    """
    counts = Counter()
    n = 0
    for pair in pairs:
        src, tgt = _pair_sides(pair)
        counts.update(words_of(src))
        counts.update(words_of(tgt))
        n += 1
    if n == 0:
        raise ContractError("cannot build a vocabulary from an empty corpus")
    ranked = sorted((t for t, c in counts.items() if c >= min_frequency and t not in SPECIALS), key=lambda t: (-counts[t], t))
    if max_size is not None:
        ranked = ranked[:max_size]
    return Vocabulary(list(SPECIALS) + ranked, min_frequency, max_size)


def encode_ids(sentence, vocab: Vocabulary, role="source", max_len=60) -> EncodedIds:
    """Map words to ids; targets are wrapped in BOS ... EOS.

    The result never exceeds ``max_len`` ids (BOS/EOS included for
    targets); ``truncated`` reports whether words were cut.
    """
    if role not in ("source", "target"):
        raise ContractError(f"role must be 'source' or 'target', got {role!r}")
    ids = [vocab.id(w) for w in words_of(sentence)]
    room = max_len - 2 if role == "target" else max_len
    if room < 1:
        raise ContractError(f"max_len {max_len} leaves no room for words")
    truncated = len(ids) > room
    ids = ids[:room]
    if role == "target":
        ids = [BOS] + ids + [EOS]
    return EncodedIds(ids, truncated)
