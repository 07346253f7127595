"""Health-literacy translation toolkit.

Lexicon-driven detection of hard medical phrases, silver-standard corpus
generation, a small numpy BiLSTM translator and BLEU/HIR evaluation.
"""

from .corpus import SilverStandard, ingest, make_silver, read_parallel, split_corpus, write_parallel
from .errors import ContractError, CorpusError, HealthLitError, LexiconError, NumericError, PolishError
from .evaluation import corpus_bleu, hir_report, interpret_bleu, paired_t_test, sentence_bleu, summarize
from .nmt import BiLSTMTranslator
from .text import Sentence, split_sentences, strip_markup, tokenize
from .thesaurus import HealthIlliterateRate, Lexicon, find_matches, hir, load_lexicon, load_sample_lexicon, substitute

__version__ = "0.1.0"

__all__ = [
    "BiLSTMTranslator",
    "ContractError",
    "CorpusError",
    "HealthIlliterateRate",
    "HealthLitError",
    "Lexicon",
    "LexiconError",
    "NumericError",
    "PolishError",
    "Sentence",
    "SilverStandard",
    "corpus_bleu",
    "find_matches",
    "hir",
    "hir_report",
    "ingest",
    "interpret_bleu",
    "load_lexicon",
    "load_sample_lexicon",
    "make_silver",
    "paired_t_test",
    "read_parallel",
    "sentence_bleu",
    "split_corpus",
    "split_sentences",
    "strip_markup",
    "substitute",
    "summarize",
    "tokenize",
    "write_parallel",
]
