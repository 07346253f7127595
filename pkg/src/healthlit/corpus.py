"""Document ingestion, snippet filtering and silver-standard corpus generation.

The silver standard pairs each eligible sentence (source) with a copy in
which exactly one randomly chosen illiterate phrase has been replaced by one
of its plain-language alternatives (target). Randomness is derived per
snippet from ``(global_seed, index)`` so results never depend on processing
order.
"""

from __future__ import annotations

import json
import logging
import math
import random
import re
import shlex
import subprocess
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ContractError, CorpusError, PolishError
from .text import DEFAULT_ABBREVIATIONS, Sentence, as_sentence, split_sentences, strip_markup
from .thesaurus import Lexicon, MatchSpan, find_matches, hir, load_lexicon, load_sample_lexicon, substitute

__all__ = [
    "CommandPolisher",
    "Document",
    "SentencePair",
    "SilverStandard",
    "Site",
    "SnippetRecord",
    "SplitSpec",
    "StatsRow",
    "corpus_stats",
    "filter_snippets",
    "has_hyperlink",
    "identity_polish",
    "ingest",
    "make_silver",
    "mix_seed",
    "read_parallel",
    "read_snippets",
    "sample_documents_path",
    "split_corpus",
    "write_parallel",
    "write_snippets",
]

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class Site(str, Enum):
    MAYOCLINIC = "mayoclinic"
    MEDLINEPLUS = "medlineplus"
    DRUGS = "drugs"
    REDDIT = "reddit"
    OTHER = "other"

    @property
    def display(self) -> str:
        return _SITE_DISPLAY[self]

    @classmethod
    def parse(cls, value) -> "Site":
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            logger.warning("unknown source_site %r mapped to 'other'", value)
            return cls.OTHER


_SITE_DISPLAY = {
    Site.MAYOCLINIC: "MayoClinic.org",
    Site.MEDLINEPLUS: "MedlinePlus.gov",
    Site.DRUGS: "Drugs.com",
    Site.REDDIT: "Reddit.com",
    Site.OTHER: "Other",
}


@dataclass(frozen=True)
class Document:
    id: str
    source_site: Site
    title: str
    body: str
    fetched_at: datetime | None = None


@dataclass(frozen=True)
class SnippetRecord:
    sentence: Sentence
    doc_id: str
    source_site: Site
    match_count: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "doc_id": self.doc_id,
                "source_site": self.source_site.value,
                "text": self.sentence.raw,
                "match_count": self.match_count,
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class SentencePair:
    source: Sentence
    target: Sentence
    entry_id: int
    span: MatchSpan
    replacement_index: int
    rng_seed_used: int
    doc_id: str = ""
    source_site: Site = field(default=Site.OTHER)

    def meta(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "source_site": self.source_site.value,
            "entry_id": self.entry_id,
            "span": [self.span.token_start, self.span.token_end],
            "replacement_index": self.replacement_index,
            "rng_seed_used": self.rng_seed_used,
        }


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ContractError(f"train_fraction must be in (0, 1), got {self.train_fraction}")

    @property
    def valid_fraction(self) -> float:
        return 1 - self.train_fraction


def sample_documents_path() -> Path:
    """Path of the bundled synthetic document dump."""
    return Path(str(resources.files("healthlit.data").joinpath("sample_documents.jsonl")))


def _parse_timestamp(value):
    if value in (None, ""):
        return None
    text = str(value)
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def ingest(path, format="jsonl", skip_bad=False, stats=None):
    """Yield :class:`Document` objects from a JSON-lines dump, in file order.

    Each line holds ``id``, ``source_site``, ``title``, ``body`` and an
    optional ``fetched_at``. Bodies are passed through :func:`strip_markup`;
    documents whose body is empty afterwards are skipped. A malformed line
    raises :class:`CorpusError` unless ``skip_bad`` is set, in which case it
    is counted in ``stats["skipped"]``.
    """
    if format != "jsonl":
        raise ContractError(f"unsupported document format {format!r}")
    if stats is None:
        stats = {}
    stats.setdefault("skipped", 0)
    stats.setdefault("empty", 0)
    seen_ids = set()
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                missing = [k for k in ("id", "source_site", "title", "body") if k not in obj]
                if missing:
                    raise ValueError(f"missing keys {missing}")
                doc_id = str(obj["id"])
                if doc_id in seen_ids:
                    raise ValueError(f"duplicate document id {doc_id!r}")
                doc = Document(
                    id=doc_id,
                    source_site=Site.parse(obj["source_site"]),
                    title=str(obj["title"]),
                    body=strip_markup(str(obj["body"])),
                    fetched_at=_parse_timestamp(obj.get("fetched_at")),
                )
            except ValueError as exc:
                if not skip_bad:
                    raise CorpusError(f"{path}: line {lineno}: {exc}") from None
                stats["skipped"] += 1
                logger.warning("%s: skipping bad line %d: %s", path, lineno, exc)
                continue
            seen_ids.add(doc_id)
            if not doc.body:
                stats["empty"] += 1
                continue
            yield doc


_WWW_RE = re.compile(r"(?:^|[\s(\[<\"'])www\.", re.IGNORECASE)


def has_hyperlink(text: str) -> bool:
    lowered = text.lower()
    return "http://" in lowered or "https://" in lowered or _WWW_RE.search(text) is not None


def filter_snippets(docs, lexicon: Lexicon, min_words=5, abbreviations=DEFAULT_ABBREVIATIONS):
    """Yield the sentences worth translating.

    A sentence is kept when it has at least ``min_words`` words, contains no
    hyperlink and has at least one lexicon match.
    """
    if min_words < 1:
        raise ContractError("min_words must be >= 1")
    for doc in docs:
        for sentence in split_sentences(doc.body, abbreviations):
            if sentence.word_count < min_words or has_hyperlink(sentence.raw):
                continue
            n = len(find_matches(sentence, lexicon))
            if n:
                yield SnippetRecord(sentence, doc.id, doc.source_site, n)


def write_snippets(snippets, path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in snippets:
            fh.write(rec.to_json() + "\n")
            n += 1
    return n


def read_snippets(path) -> list[SnippetRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out.append(
                    SnippetRecord(
                        Sentence(obj["text"]), str(obj["doc_id"]), Site.parse(obj["source_site"]), int(obj["match_count"])
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from None
    return out


def mix_seed(global_seed: int, index: int) -> int:
    """Per-item 64-bit seed: SplitMix64 finalizer over ``seed + (index+1)*golden``."""
    z = (global_seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def identity_polish(sentences):
    """Default polish hook: returns the sentences unchanged."""
    return list(sentences)


class CommandPolisher:
    """Polish hook backed by an external line-in/line-out command.

    All sentences are written to the command's standard input, one per line;
    it must print exactly one corrected sentence per input line.
    """

    def __init__(self, command, timeout=None):
        self.command = command
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout

    def __repr__(self):
        return f"CommandPolisher({self.command!r})"

    def __call__(self, sentences):
        sentences = list(sentences)
        if not sentences:
            return []
        payload = "".join(_one_line(s.raw) + "\n" for s in sentences)
        try:
            proc = subprocess.run(
                self.argv, input=payload.encode("utf-8"), capture_output=True, timeout=self.timeout
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise PolishError(f"polish command {self.command!r} failed to run: {exc}") from None
        if proc.returncode != 0:
            err = proc.stderr.decode("utf-8", "replace").strip()
            raise PolishError(f"polish command {self.command!r} exited with status {proc.returncode}: {err}")
        lines = proc.stdout.decode("utf-8").splitlines()
        if len(lines) != len(sentences):
            raise PolishError(
                f"polish command {self.command!r} returned {len(lines)} lines for {len(sentences)} inputs"
            )
        return [Sentence(line.strip()) for line in lines]


def _silver_one(index, snippet, lexicon, global_seed):
    matches = find_matches(snippet.sentence, lexicon)
    if not matches:
        raise ContractError(f"snippet {index} ({snippet.sentence.raw!r}) has no lexicon match")
    seed = mix_seed(global_seed, index)
    rng = random.Random(seed)
    span = matches[rng.randrange(len(matches))]
    entry = lexicon[span.entry_id]
    rep_idx = rng.randrange(len(entry.replacements))
    target = substitute(snippet.sentence, span, entry.replacements[rep_idx])
    return SentencePair(
        snippet.sentence, target, span.entry_id, span, rep_idx, seed, snippet.doc_id, snippet.source_site
    )


def make_silver(snippets, lexicon: Lexicon, global_seed: int, polish=None, n_jobs=1) -> list[SentencePair]:
    """Build silver-standard pairs by substituting one phrase per snippet.

    Snippet ``i`` draws, with ``random.Random(mix_seed(global_seed, i))``, a
    match uniformly and then one of its replacements uniformly. The result
    depends only on the inputs, whatever ``n_jobs`` is.
    """
    global_seed &= MASK64
    snippets = list(snippets)
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            pairs = list(pool.map(lambda a: _silver_one(a[0], a[1], lexicon, global_seed), enumerate(snippets)))
    else:
        pairs = [_silver_one(i, s, lexicon, global_seed) for i, s in enumerate(snippets)]

    polish = identity_polish if polish is None else polish
    polished = list(polish([p.target for p in pairs]))
    if len(polished) != len(pairs):
        raise PolishError(f"polish hook returned {len(polished)} sentences for {len(pairs)} inputs")
    out = []
    for pair, target in zip(pairs, polished):
        target = as_sentence(target)
        if target == pair.source:
            raise CorpusError(f"polish undid the substitution in {pair.source.raw!r}")
        out.append(
            SentencePair(
                pair.source,
                target,
                pair.entry_id,
                pair.span,
                pair.replacement_index,
                pair.rng_seed_used,
                pair.doc_id,
                pair.source_site,
            )
        )
    return out


def split_corpus(pairs, spec: SplitSpec) -> dict:
    """Seeded shuffle then prefix split into ``{"train": [...], "valid": [...]}``."""
    items = list(pairs)
    if len(items) < 2:
        raise ContractError(f"need at least 2 items to split, got {len(items)}")
    order = list(range(len(items)))
    random.Random(spec.seed).shuffle(order)
    n_train = math.floor(spec.train_fraction * len(items) + 0.5)
    return {
        "train": [items[i] for i in order[:n_train]],
        "valid": [items[i] for i in order[n_train:]],
    }


def _one_line(text: str) -> str:
    return " ".join(text.split()) if ("\n" in text or "\r" in text) else text


def write_parallel(pairs, directory) -> Path:
    """Write ``src.txt``, ``tgt.txt`` and ``meta.jsonl``, line aligned."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "src.txt", "w", encoding="utf-8", newline="\n") as src, open(
        directory / "tgt.txt", "w", encoding="utf-8", newline="\n"
    ) as tgt, open(directory / "meta.jsonl", "w", encoding="utf-8", newline="\n") as meta:
        for pair in pairs:
            src.write(_one_line(pair.source.raw) + "\n")
            tgt.write(_one_line(pair.target.raw) + "\n")
            meta.write(json.dumps(pair.meta(), ensure_ascii=False) + "\n")
    return directory


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        raise CorpusError(f"missing file {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        data = fh.read()
    if not data:
        return []
    if not data.endswith("\n"):
        raise CorpusError(f"{path} is truncated (no final newline)")
    return data[:-1].split("\n")


def read_parallel(directory) -> list[SentencePair]:
    """Inverse of :func:`write_parallel`."""
    directory = Path(directory)
    src = _read_lines(directory / "src.txt")
    tgt = _read_lines(directory / "tgt.txt")
    meta = _read_lines(directory / "meta.jsonl")
    if not len(src) == len(tgt) == len(meta):
        raise CorpusError(
            f"{directory}: line counts differ (src={len(src)}, tgt={len(tgt)}, meta={len(meta)})"
        )
    pairs = []
    for lineno, (s, t, m) in enumerate(zip(src, tgt, meta), start=1):
        try:
            obj = json.loads(m)
            span = MatchSpan(int(obj["entry_id"]), int(obj["span"][0]), int(obj["span"][1]))
            pairs.append(
                SentencePair(
                    Sentence(s),
                    Sentence(t),
                    int(obj["entry_id"]),
                    span,
                    int(obj["replacement_index"]),
                    int(obj["rng_seed_used"]),
                    str(obj["doc_id"]),
                    Site.parse(obj["source_site"]),
                )
            )
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            raise CorpusError(f"{directory / 'meta.jsonl'}: line {lineno}: {exc}") from None
    return pairs


StatsRow = namedtuple("StatsRow", ["label", "count", "mean_hir"])


def corpus_stats(items, lexicon: Lexicon, side="source") -> list[StatsRow]:
    """Per-site sentence counts and mean HIR, followed by a pooled "Average" row.

    ``items`` are :class:`SnippetRecord` or :class:`SentencePair` objects;
    for pairs ``side`` picks ``"source"`` or ``"target"``.
    """
    per_site = {}
    for item in items:
        if isinstance(item, SentencePair):
            sentence = item.source if side == "source" else item.target
        else:
            sentence = item.sentence
        per_site.setdefault(item.source_site, []).append(hir(sentence, lexicon))
    rows = []
    pooled = []
    for site in Site:
        values = per_site.get(site)
        if values:
            rows.append(StatsRow(site.display, len(values), float(sum(values, Fraction(0)) / len(values))))
            pooled.extend(values)
    mean = float(sum(pooled, Fraction(0)) / len(pooled)) if pooled else float("nan")
    rows.append(StatsRow("Average", len(pooled), mean))
    return rows


class SilverStandard(TransformerMixin, BaseEstimator):
    """Transformer producing silver-standard targets for source sentences.

    ``transform`` returns the target strings; ``pairs_`` keeps the full
    :class:`SentencePair` records of the last call.
    """

    def __init__(self, lexicon=None, seed=0, polish_command=None, n_jobs=1):
        self.lexicon = lexicon
        self.seed = seed
        self.polish_command = polish_command
        self.n_jobs = n_jobs

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
        snippets = []
        for x in X:
            s = as_sentence(x)
            snippets.append(SnippetRecord(s, "", Site.OTHER, len(find_matches(s, self.lexicon_))))
        polish = CommandPolisher(self.polish_command) if self.polish_command else None
        self.pairs_ = make_silver(snippets, self.lexicon_, self.seed, polish=polish, n_jobs=self.n_jobs)
        return [p.target.raw for p in self.pairs_]
