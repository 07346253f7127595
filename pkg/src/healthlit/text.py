"""Tokenization, sentence splitting, normalization and markup stripping.

Everything here is a pure function of its input. The word rule is the single
definition of "word" used by the lexicon matcher, the HIR denominator and the
BLEU n-gram counts.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

__all__ = [
    "DEFAULT_ABBREVIATIONS",
    "Sentence",
    "Token",
    "TokenKind",
    "as_sentence",
    "detokenize",
    "load_abbreviations",
    "normalize",
    "split_sentences",
    "strip_markup",
    "tokenize",
]

DEFAULT_ABBREVIATIONS = ("Dr", "Mr", "Mrs", "Ms", "e.g", "i.e", "vs")

# letters/digits plus trailing combining marks; underscore is punctuation
_ALNUM = r"(?:[^\W_][\u0300-\u036f]*)+"
_TOKEN_RE = re.compile(rf"{_ALNUM}(?:['’-]{_ALNUM})*|\S")
_TERMINATOR_RE = re.compile(r"[.!?]+[\"')\]”’]*")
_NEXT_START_RE = re.compile(r"\s+[\"'(\[“‘]?(?=[^\W\d_])")
_TAG_RE = re.compile(r"<[^<>]*>")
_ENTITY_RE = re.compile(r"&(?:(amp|lt|gt|quot|apos)|#(\d+)|#[xX]([0-9a-fA-F]+));")
_NAMED_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'"}
_WS_RE = re.compile(r"\s+")


class TokenKind(str, Enum):
    WORD = "word"
    NUMBER = "number"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_word(self) -> bool:
        """True for tokens counted as words (words and numbers)."""
        return self.kind is not TokenKind.PUNCTUATION


def _kind(text: str) -> TokenKind:
    if text.isdigit():
        return TokenKind.NUMBER
    if text[0].isalnum():
        return TokenKind.WORD
    return TokenKind.PUNCTUATION


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into word, number and punctuation tokens.

    A word is a maximal run of letters/digits that may contain internal
    apostrophes or hyphens (``can't``, ``risk-free``). Every other
    non-whitespace character becomes its own punctuation token.

    >>> [t.text for t in tokenize("The test can't detect all cancers.")]
    ['The', 'test', "can't", 'detect', 'all', 'cancers', '.']
    """
    return [Token(m.group(), _kind(m.group()), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def normalize(token_text: str) -> str:
    """Case-fold and NFC-normalize a token; idempotent."""
    return unicodedata.normalize("NFC", unicodedata.normalize("NFC", token_text).casefold())


@dataclass(frozen=True)
class Sentence:
    """A raw sentence string with its tokens.

    Tokens are derived from ``raw`` so the two can never disagree; equality
    and hashing use ``raw`` only.
    """

    raw: str
    tokens: tuple[Token, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(tokenize(self.raw)))

    @property
    def word_tokens(self) -> list[Token]:
        return [t for t in self.tokens if t.is_word]

    @property
    def words(self) -> tuple[str, ...]:
        """Normalized word tokens, the unit for matching, HIR and BLEU."""
        return tuple(normalize(t.text) for t in self.tokens if t.is_word)

    @property
    def word_count(self) -> int:
        return sum(1 for t in self.tokens if t.is_word)

    def __str__(self) -> str:
        return self.raw


def as_sentence(value) -> Sentence:
    """Accept a :class:`Sentence` or a plain string."""
    if isinstance(value, Sentence):
        return value
    if isinstance(value, str):
        return Sentence(value)
    raise TypeError(f"expected Sentence or str, got {type(value).__name__}")


def _ends_with_abbreviation(text: str, end: int, abbreviations) -> bool:
    chunk = text[:end].split()
    if not chunk:
        return False
    last = chunk[-1].lstrip("\"'([“‘")
    return last in abbreviations


def split_sentences(text: str, abbreviations=DEFAULT_ABBREVIATIONS) -> list[Sentence]:
    """Rule-based sentence segmentation.

    A boundary is a run of ``.``/``!``/``?`` (plus closing quotes or
    brackets) followed by whitespace and an uppercase letter, or by the end
    of the text. A single period directly after an abbreviation in
    ``abbreviations`` is not a boundary.
    """
    abbreviations = frozenset(abbreviations)
    sentences = []
    start = 0
    n = len(text)
    for m in _TERMINATOR_RE.finditer(text):
        end = m.end()
        rest = text[end:]
        at_end = not rest.strip()
        if not at_end:
            nxt = _NEXT_START_RE.match(rest)
            if nxt is None or not rest[nxt.end()].isupper():
                continue
        if m.group().startswith(".") and m.group().rstrip("\"')]”’") == "." and _ends_with_abbreviation(
            text, m.start(), abbreviations
        ):
            continue
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(Sentence(chunk))
        start = end
        if at_end:
            break
    tail = text[start:n].strip()
    if tail:
        sentences.append(Sentence(tail))
    return sentences


def load_abbreviations(path) -> tuple[str, ...]:
    """Read an abbreviation guard list, one entry per line (UTF-8)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#"))


def _decode_entity(m: re.Match) -> str:
    named, dec, hexa = m.groups()
    if named:
        return _NAMED_ENTITIES[named]
    code = int(dec) if dec else int(hexa, 16)
    try:
        return chr(code)
    except (ValueError, OverflowError):
        return m.group()


def strip_markup(text: str) -> str:
    """Remove ``<...>`` tags, decode basic entities and collapse whitespace.

    An unterminated ``<`` is kept as literal text. Tags are removed before
    entities are decoded, so ``&lt;b&gt;`` survives as the text ``<b>``.
    """
    text = _TAG_RE.sub(" ", text)
    text = _ENTITY_RE.sub(_decode_entity, text)
    return _WS_RE.sub(" ", text).strip()


def detokenize(tokens) -> str:
    """Join token strings: one space between tokens, none before punctuation."""
    out = []
    for tok in tokens:
        if out and not (len(tok) == 1 and not tok.isalnum()):
            out.append(" ")
        out.append(tok)
    return "".join(out)
