"""Plain-language lexicon: loading, validation, phrase matching, HIR, substitution.

Phrases are matched over normalized word tokens with a token trie, scanning
left to right and taking the longest entry at each position. Punctuation
tokens break phrase continuity.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ContractError, LexiconError
from .text import Sentence, as_sentence, normalize, tokenize

__all__ = [
    "HealthIlliterateRate",
    "Lexicon",
    "LexiconEntry",
    "MatchSpan",
    "Violation",
    "find_matches",
    "hir",
    "load_lexicon",
    "load_sample_lexicon",
    "substitute",
    "validate_lexicon",
]

logger = logging.getLogger(__name__)

_END = object()


@dataclass(frozen=True)
class LexiconEntry:
    id: int
    illiterate: tuple[str, ...]
    replacements: tuple[tuple[str, ...], ...]

    @property
    def phrase(self) -> str:
        return " ".join(self.illiterate)


@dataclass(frozen=True)
class MatchSpan:
    """A matched phrase, in word-token indices (end exclusive)."""

    entry_id: int
    token_start: int
    token_end: int

    def __len__(self):
        return self.token_end - self.token_start


@dataclass(frozen=True)
class Violation:
    """A replacement that itself contains an illiterate phrase."""

    entry: LexiconEntry
    replacement: tuple[str, ...]
    contained: LexiconEntry

    def __str__(self):
        return f"{self.entry.phrase}\t{' '.join(self.replacement)}\t{self.contained.phrase}"


class Lexicon:
    """Immutable collection of entries plus a trie over their phrases."""

    def __init__(self, entries, allow_empty_replacement=False):
        self.entries = tuple(entries)
        self._by_id = {}
        self._trie = {}
        for entry in self.entries:
            if not entry.illiterate:
                raise LexiconError(f"entry {entry.id} has an empty phrase")
            if not entry.replacements:
                raise LexiconError(f"entry {entry.id} ({entry.phrase!r}) has no replacement")
            for rep in entry.replacements:
                if rep == entry.illiterate:
                    raise LexiconError(f"entry {entry.phrase!r} maps to itself")
                if not rep and not allow_empty_replacement:
                    raise LexiconError(f"entry {entry.phrase!r} has an empty replacement")
            if entry.id in self._by_id:
                raise LexiconError(f"duplicate entry id {entry.id}")
            self._by_id[entry.id] = entry
            node = self._trie
            for word in entry.illiterate:
                node = node.setdefault(word, {})
            if _END in node:
                raise LexiconError(f"duplicate illiterate phrase {entry.phrase!r}")
            node[_END] = entry.id

    @classmethod
    def from_pairs(cls, pairs, **kwargs) -> "Lexicon":
        """Build from ``(phrase, [replacement, ...])`` string pairs; ids follow order."""
        entries = []
        for i, (phrase, reps) in enumerate(pairs):
            if isinstance(reps, str):
                reps = [reps]
            entries.append(
                LexiconEntry(i, _phrase_words(phrase), tuple(_phrase_words(r) for r in reps))
            )
        return cls(entries, **kwargs)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, entry_id: int) -> LexiconEntry:
        return self._by_id[entry_id]

    def longest_at(self, words, start, stop=None) -> tuple[int, int] | None:
        """Longest entry beginning at ``words[start]`` and ending before ``stop``.

        Returns ``(entry_id, end)`` or None.
        """
        stop = len(words) if stop is None else stop
        node = self._trie
        best = None
        for k in range(start, stop):
            node = node.get(words[k])
            if node is None:
                break
            if _END in node:
                best = (node[_END], k + 1)
        return best

    def all_at(self, words, start):
        """Every entry whose phrase begins at ``words[start]``."""
        node = self._trie
        for k in range(start, len(words)):
            node = node.get(words[k])
            if node is None:
                return
            if _END in node:
                yield node[_END]


def _phrase_words(text: str) -> tuple[str, ...]:
    toks = tokenize(text)
    bad = [t.text for t in toks if not t.is_word]
    if bad:
        raise LexiconError(f"phrase {text!r} contains non-word characters {bad}")
    return tuple(normalize(t.text) for t in toks)


def validate_lexicon(lexicon: Lexicon) -> list[Violation]:
    """List every (entry, replacement, contained entry) containment triple."""
    violations = []
    for entry in lexicon:
        for rep in entry.replacements:
            seen = set()
            for i in range(len(rep)):
                for eid in lexicon.all_at(rep, i):
                    if eid not in seen:
                        seen.add(eid)
                        violations.append(Violation(entry, rep, lexicon[eid]))
    return violations


def load_lexicon(source, format="tsv", strict=True, allow_empty_replacement=False) -> Lexicon:
    """Load a TSV lexicon: ``phrase<TAB>rep1|rep2``; ``#`` starts a comment line.

    ``source`` may be a path, a text stream or a byte stream. With
    ``strict`` (the default) replacement-containment violations raise
    :class:`LexiconError`; otherwise they are logged as warnings.
    """
    if format != "tsv":
        raise ContractError(f"unsupported lexicon format {format!r}")
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexiconError(f"lexicon is not valid UTF-8: {exc}") from None

    entries = []
    seen = {}
    for lineno, line in enumerate(io.StringIO(data), start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise LexiconError(f"expected 2 tab-separated columns, got {len(cols)}", line=lineno)
        try:
            phrase = _phrase_words(cols[0])
            reps = tuple(_phrase_words(r) for r in cols[1].split("|"))
        except LexiconError as exc:
            raise LexiconError(str(exc), line=lineno) from None
        if not phrase:
            raise LexiconError("empty illiterate phrase", line=lineno)
        if phrase in seen:
            raise LexiconError(
                f"duplicate illiterate phrase {' '.join(phrase)!r} (first on line {seen[phrase]})", line=lineno
            )
        seen[phrase] = lineno
        entries.append(LexiconEntry(len(entries), phrase, reps))
    try:
        lexicon = Lexicon(entries, allow_empty_replacement=allow_empty_replacement)
    except LexiconError as exc:
        raise LexiconError(str(exc)) from None

    violations = validate_lexicon(lexicon)
    if violations:
        listing = "; ".join(str(v).replace("\t", " -> ", 1).replace("\t", " contains ") for v in violations)
        if strict:
            raise LexiconError(f"{len(violations)} replacement(s) contain illiterate phrases: {listing}")
        for v in violations:
            logger.warning("replacement contains illiterate phrase: %s", v)
    return lexicon


def load_sample_lexicon(**kwargs) -> Lexicon:
    """The bundled ~40-entry demonstration lexicon."""
    data = resources.files("healthlit.data").joinpath("sample_lexicon.tsv").read_bytes()
    return load_lexicon(io.BytesIO(data), **kwargs)


def find_matches(sentence, lexicon: Lexicon) -> list[MatchSpan]:
    """Leftmost-longest, non-overlapping phrase matches in ``sentence``.

    Span indices count word tokens only. A phrase never spans a
    punctuation token.
    """
    sentence = as_sentence(sentence)
    words = []
    segment_ends = []  # for each word index, the index one past its punctuation-free run
    run_start = 0
    for tok in sentence.tokens:
        if tok.is_word:
            words.append(normalize(tok.text))
        else:
            segment_ends.extend([len(words)] * (len(words) - run_start))
            run_start = len(words)
    segment_ends.extend([len(words)] * (len(words) - run_start))

    spans = []
    i = 0
    while i < len(words):
        hit = lexicon.longest_at(words, i, segment_ends[i])
        if hit is None:
            i += 1
        else:
            spans.append(MatchSpan(hit[0], i, hit[1]))
            i = hit[1]
    return spans


def hir(sentence, lexicon: Lexicon) -> Fraction:
    """Health Illiterate Rate: matched words over all words, as an exact fraction."""
    sentence = as_sentence(sentence)
    total = sentence.word_count
    if total == 0:
        raise ContractError(f"HIR is undefined for a sentence with no words: {sentence.raw!r}")
    covered = sum(len(m) for m in find_matches(sentence, lexicon))
    return Fraction(covered, total)


def substitute(sentence, span: MatchSpan, replacement) -> Sentence:
    """Replace the words under ``span`` with ``replacement`` tokens.

    Replacement tokens are joined by single spaces; the text around the span
    is kept verbatim. When the span starts the sentence and the original
    first word was capitalized, the first replacement token is capitalized.
    """
    sentence = as_sentence(sentence)
    if isinstance(replacement, str):
        replacement = replacement.split()
    replacement = list(replacement)
    words = sentence.word_tokens
    if not (0 <= span.token_start < span.token_end <= len(words)):
        raise ContractError(f"span {span} out of range for {len(words)} words")
    first, last = words[span.token_start], words[span.token_end - 1]
    if replacement and span.token_start == 0 and first.text[:1].isupper():
        replacement[0] = replacement[0][:1].upper() + replacement[0][1:]
    head, tail = sentence.raw[: first.start], sentence.raw[last.end :]
    if not replacement:
        # drop one adjoining space so no double gap is left behind
        if head.endswith(" ") and (tail.startswith(" ") or not tail):
            head = head[:-1]
        elif not head and tail.startswith(" "):
            tail = tail[1:]
    return Sentence(head + " ".join(replacement) + tail)


class HealthIlliterateRate(TransformerMixin, BaseEstimator):
    """Transformer mapping sentences to their HIR values.

    Parameters
    ----------
    lexicon : Lexicon or path, optional
        Defaults to the bundled sample lexicon.
    """

    def __init__(self, lexicon=None):
        self.lexicon = lexicon

    def fit(self, X=None, y=None):
        if self.lexicon is None:
            self.lexicon_ = load_sample_lexicon()
        elif isinstance(self.lexicon, Lexicon):
            self.lexicon_ = self.lexicon
        else:
            self.lexicon_ = load_lexicon(self.lexicon)
        return self

    def transform(self, X):
        check_is_fitted(self, "lexicon_")
        return np.array([float(hir(s, self.lexicon_)) for s in X], dtype=float)
