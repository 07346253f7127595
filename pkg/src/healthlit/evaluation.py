"""BLEU, score summaries, BLEU interpretation bands, paired t-tests and HIR grids."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ContractError
from .text import Sentence, as_sentence
from .thesaurus import Lexicon, hir

__all__ = [
    "BLEU_BANDS",
    "BleuResult",
    "HirReport",
    "PairedTTestResult",
    "ScoreSummary",
    "betainc",
    "corpus_bleu",
    "format_table",
    "hir_report",
    "interpret_bleu",
    "paired_t_test",
    "sentence_bleu",
    "student_t_two_sided_p",
    "summarize",
    "summary_table",
]

logger = logging.getLogger(__name__)

SMOOTHING = ("none", "add_one_higher_order")

# (lower bound, label); upper bound is the next lower bound, last band is closed at 100
BLEU_BANDS = (
    (0.0, "Almost useless"),
    (10.0, "Hard to get the gist"),
    (20.0, "The gist is clear, but has significant grammatical errors"),
    (30.0, "Understandable to good translations"),
    (40.0, "High quality translations"),
    (50.0, "Very high quality, adequate, and fluent translations"),
    (60.0, "Quality often better than human"),
)

SUMMARY_COLUMNS = ("25th Percentile", "50th Percentile", "75th Percentile", "Mean")


@dataclass(frozen=True)
class BleuResult:
    score: float
    precisions: tuple[float, ...]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    empty_hypothesis: bool = False


def _words(x) -> tuple[str, ...]:
    if isinstance(x, (Sentence, str)):
        return as_sentence(x).words
    return tuple(x)


def _ngram_stats(hyp, ref, max_n):
    """Clipped match counts and hypothesis totals for orders 1..max_n."""
    matches, totals = [], []
    for n in range(1, max_n + 1):
        h = Counter(tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1))
        r = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        matches.append(sum(min(c, r[g]) for g, c in h.items()))
        totals.append(sum(h.values()))
    return matches, totals


def _combine(matches, totals, c, r, smoothing) -> BleuResult:
    if smoothing not in SMOOTHING:
        raise ContractError(f"unknown smoothing {smoothing!r}")
    if c == 0:
        return BleuResult(0.0, tuple(0.0 for _ in matches), 0.0, 0, r, empty_hypothesis=True)
    precisions = []
    for n, (m, t) in enumerate(zip(matches, totals), start=1):
        if t == 0:
            # the hypothesis has no n-grams of this order: vacuous
            p = 1.0
        elif m == 0 and n >= 2 and smoothing == "add_one_higher_order":
            p = 1.0 / (t + 1)
        else:
            p = m / t
        precisions.append(p)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    if min(precisions) == 0.0:
        score = 0.0
    else:
        log_mean = math.fsum(math.log(p) for p in precisions) / len(precisions)
        score = 100.0 * bp * math.exp(log_mean)
    return BleuResult(min(score, 100.0), tuple(precisions), bp, c, r)


def sentence_bleu(hypothesis, reference, max_n=4, smoothing="add_one_higher_order") -> BleuResult:
    """BLEU of one hypothesis against one reference, on normalized word tokens.

    With ``add_one_higher_order`` smoothing an order n >= 2 whose clipped
    match count is zero gets precision 1/(total+1). An order for which the
    hypothesis has no n-grams at all is treated as vacuous (precision 1).
    An empty hypothesis scores 0 with brevity penalty 0 and
    ``empty_hypothesis=True``.
    """
    hyp, ref = _words(hypothesis), _words(reference)
    if not ref:
        raise ContractError("reference has no words")
    matches, totals = _ngram_stats(hyp, ref, max_n)
    return _combine(matches, totals, len(hyp), len(ref), smoothing)


def corpus_bleu(hypotheses, references, max_n=4, smoothing="none") -> BleuResult:
    """Corpus BLEU: n-gram counts and lengths are summed before combining."""
    hypotheses, references = list(hypotheses), list(references)
    if len(hypotheses) != len(references):
        raise ContractError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    if not hypotheses:
        raise ContractError("corpus_bleu needs at least one pair")
    matches, totals = [0] * max_n, [0] * max_n
    c = r = 0
    for hyp, ref in zip(hypotheses, references):
        h, rf = _words(hyp), _words(ref)
        if not rf:
            raise ContractError("reference has no words")
        m, t = _ngram_stats(h, rf, max_n)
        matches = [a + b for a, b in zip(matches, m)]
        totals = [a + b for a, b in zip(totals, t)]
        c += len(h)
        r += len(rf)
    return _combine(matches, totals, c, r, smoothing)


@dataclass(frozen=True)
class ScoreSummary:
    p25: float
    p50: float
    p75: float
    mean: float

    def as_row(self):
        return (self.p25, self.p50, self.p75, self.mean)


def summarize(scores) -> ScoreSummary:
    """Quartiles (linear interpolation, rank = q*(n-1)) and the mean."""
    arr = np.asarray(list(scores), dtype=float)
    if arr.size == 0:
        raise ContractError("cannot summarize an empty score list")
    p25, p50, p75 = np.percentile(arr, [25, 50, 75], method="linear")
    return ScoreSummary(float(p25), float(p50), float(p75), float(arr.mean()))


def interpret_bleu(score: float) -> str:
    """Map a BLEU score in [0, 100] to its interpretation band (half-open bands)."""
    if not 0.0 <= score <= 100.0 or math.isnan(score):
        raise ContractError(f"BLEU score {score} outside [0, 100]")
    label = BLEU_BANDS[0][1]
    for lower, name in BLEU_BANDS:
        if score >= lower:
            label = name
    return label


# -- Student t --------------------------------------------------------------


def _betacf(a, b, x, max_iter=1000, tol=1e-15):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ContractError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ContractError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class PairedTTestResult:
    t: float
    df: int
    p: float
    degenerate: bool = False
    mean_difference: float = 0.0

    def __str__(self):
        return f"t={self.t:.6g}, df={self.df}, p={self.p:.6g}"


def paired_t_test(a, b) -> PairedTTestResult:
    """Two-sided paired t-test on ``a - b``.

    When every difference is identical the statistic is undefined; the
    result is flagged ``degenerate`` with p = 1 if the mean difference is
    zero and p = 0 otherwise.
    """
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise ContractError(f"paired samples differ in length ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise ContractError("paired t-test needs at least 2 pairs")
    d = [x - y for x, y in zip(a, b)]
    mean = math.fsum(d) / n
    var = math.fsum((x - mean) ** 2 for x in d) / (n - 1)
    df = n - 1
    if var == 0.0:
        if mean == 0.0:
            return PairedTTestResult(0.0, df, 1.0, degenerate=True, mean_difference=mean)
        return PairedTTestResult(math.copysign(math.inf, mean), df, 0.0, degenerate=True, mean_difference=mean)
    t = mean / math.sqrt(var / n)
    return PairedTTestResult(t, df, student_t_two_sided_p(t, df), mean_difference=mean)


# -- report rendering ---------------------------------------------------------


def format_table(header, rows, fmt="text") -> str:
    """Render rows as an aligned text table or as CSV."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for k, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def summary_table(named_summaries, fmt="text", corpus_scores=None) -> str:
    """Quartile/mean BLEU table, one row per system.

    ``named_summaries`` maps a system name to a :class:`ScoreSummary`;
    ``corpus_scores`` optionally maps the same names to corpus BLEU, which
    is shown in an extra column after the mean.
    """
    header = ["Model", *SUMMARY_COLUMNS]
    if corpus_scores is not None:
        header.append("Corpus BLEU")
    header.append("Interpretation")
    rows = []
    for name, s in named_summaries.items():
        row = [name, *(f"{v:.3f}" for v in s.as_row())]
        if corpus_scores is not None:
            row.append(f"{corpus_scores[name]:.3f}")
        row.append(interpret_bleu(min(max(s.mean, 0.0), 100.0)))
        rows.append(row)
    return format_table(header, rows, fmt)


@dataclass
class HirReport:
    """Mean HIR per (row label, stage). Missing cells are None."""

    columns: list[str]
    rows: list[str]
    cells: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)

    def cell(self, row, column):
        return self.cells.get((row, column))

    def to_rows(self):
        out = []
        for r in self.rows:
            out.append([r] + ["–" if self.cell(r, c) is None else f"{self.cell(r, c):.3f}" for c in self.columns])
        return out

    def to_text(self) -> str:
        return format_table(["Data Source", *self.columns], self.to_rows(), "text")

    def to_csv(self) -> str:
        return format_table(["Data Source", *self.columns], self.to_rows(), "csv")


def hir_report(stages, sites, lexicon: Lexicon, site_order=None) -> HirReport:
    """Grid of mean HIR per source site and stage, plus a pooled "Average" row.

    ``stages`` maps a stage name to a list of sentences; ``sites`` maps the
    same names to equally long lists of site labels. Sentences without any
    word are left out of the means and counted in ``report.skipped``.
    """
    columns = list(stages)
    per_cell = {}
    seen_sites = []
    skipped = {}
    for col in columns:
        sentences = list(stages[col])
        tags = list(sites[col])
        if len(tags) != len(sentences):
            raise ContractError(f"stage {col!r}: {len(sentences)} sentences but {len(tags)} site labels")
        for s, tag in zip(sentences, tags):
            s = as_sentence(s)
            if s.word_count == 0:
                skipped[col] = skipped.get(col, 0) + 1
                continue
            if tag not in seen_sites:
                seen_sites.append(tag)
            per_cell.setdefault((tag, col), []).append(hir(s, lexicon))
    if skipped:
        logger.warning("left %s word-less sentences out of the HIR report", skipped)
    if site_order is not None:
        row_labels = [s for s in site_order if s in seen_sites] + [s for s in seen_sites if s not in site_order]
    else:
        row_labels = seen_sites
    report = HirReport(columns, row_labels + ["Average"], skipped=skipped)
    for col in columns:
        pooled = []
        for tag in row_labels:
            values = per_cell.get((tag, col))
            if values:
                report.cells[(tag, col)] = float(sum(values, Fraction(0)) / len(values))
                pooled.extend(values)
        if pooled:
            report.cells[("Average", col)] = float(sum(pooled, Fraction(0)) / len(pooled))
    return report
