import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from healthlit.text import (
    Sentence,
    TokenKind,
    detokenize,
    load_abbreviations,
    normalize,
    split_sentences,
    strip_markup,
    tokenize,
)

# printable text with letters, digits, punctuation, accents and odd whitespace
text_strategy = st.text(
    alphabet=st.one_of(
        st.characters(whitelist_categories=("Lu", "Ll", "Nd", "Po", "Ps", "Pe", "Pd", "Zs")),
        st.sampled_from(list("\n\t'’-.!?\"<>&;é")),
    ),
    max_size=80,
)


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_contraction_sentence(self):
        toks = tokenize("The test can't detect all cancers.")
        assert [t.text for t in toks] == ["The", "test", "can't", "detect", "all", "cancers", "."]
        assert [t.kind for t in toks][-1] is TokenKind.PUNCTUATION
        assert sum(t.is_word for t in toks) == 6

    def test_internal_hyphen(self):
        toks = tokenize("risk-free")
        assert len(toks) == 1 and toks[0].kind is TokenKind.WORD

    def test_trailing_hyphen_is_punctuation(self):
        assert [t.text for t in tokenize("risk- free")] == ["risk", "-", "free"]

    def test_numbers(self):
        toks = tokenize("Take 2 pills")
        assert toks[1].kind is TokenKind.NUMBER
        assert Sentence("Take 2 pills").word_count == 3

    def test_decomposed_accent_stays_in_word(self):
        toks = tokenize("café au lait")
        assert toks[0].text == "café"

    def test_spans_index_raw(self):
        raw = "  Heart, attack!"
        for t in tokenize(raw):
            assert raw[t.start : t.end] == t.text

    @given(text_strategy)
    def test_round_trip(self, raw):
        toks = tokenize(raw)
        rebuilt, pos = [], 0
        for t in toks:
            gap = raw[pos : t.start]
            assert gap.strip() == ""
            rebuilt.append(gap + t.text)
            pos = t.end
        rebuilt.append(raw[pos:])
        assert "".join(rebuilt) == raw

    @given(text_strategy)
    def test_every_non_space_char_in_one_token(self, raw):
        covered = [0] * len(raw)
        for t in tokenize(raw):
            assert t.start < t.end
            for i in range(t.start, t.end):
                covered[i] += 1
        for ch, n in zip(raw, covered):
            assert n == (0 if ch.isspace() else 1)

    @given(text_strategy)
    def test_retokenizing_sentence_is_stable(self, raw):
        s = Sentence(raw)
        assert Sentence(s.raw).tokens == s.tokens


class TestNormalize:
    @pytest.mark.parametrize("raw, expected", [("Risk", "risk"), ("risk", "risk"), ("CAN'T", "can't")])
    def test_examples(self, raw, expected):
        assert normalize(raw) == expected

    def test_composition(self):
        assert normalize("Café") == "café"

    @given(st.text(max_size=30))
    def test_idempotent(self, x):
        assert normalize(normalize(x)) == normalize(x)

    @given(st.text(alphabet=st.characters(max_codepoint=127), max_size=30))
    def test_ascii_length_stable(self, x):
        assert len(normalize(x)) == len(x)


class TestSplitSentences:
    def test_single_letters(self):
        assert [s.raw for s in split_sentences("A. B.")] == ["A.", "B."]

    def test_no_terminator(self):
        assert [s.raw for s in split_sentences("One sentence only")] == ["One sentence only"]

    def test_abbreviation_guard(self):
        assert [s.raw for s in split_sentences("See Dr. Smith. Then rest.")] == ["See Dr. Smith.", "Then rest."]

    def test_custom_abbreviations(self, tmp_path):
        path = tmp_path / "abbr.txt"
        path.write_text("# guard list\nProf\n\n", encoding="utf-8")
        abbr = load_abbreviations(path)
        assert abbr == ("Prof",)
        assert len(split_sentences("Ask Prof. Lee. Then rest.", abbr)) == 2
        assert len(split_sentences("Ask Prof. Lee. Then rest.")) == 3

    def test_lowercase_continuation_is_not_a_boundary(self):
        assert len(split_sentences("Take 2.5 mg. then rest.")) == 1

    def test_question_and_exclamation(self):
        assert [s.raw for s in split_sentences("Is it bad? Yes! Call now.")] == ["Is it bad?", "Yes!", "Call now."]

    def test_opening_quote_after_boundary(self):
        assert len(split_sentences('He said no. "Stop it." Then left.')) == 3

    def test_empty(self):
        assert split_sentences("   ") == []

    @given(text_strategy)
    def test_never_drops_characters_or_yields_empty(self, text):
        sentences = split_sentences(text)
        assert all(s.raw.strip() for s in sentences)
        assert re.sub(r"\s", "", "".join(s.raw for s in sentences)) == re.sub(r"\s", "", text)


class TestStripMarkup:
    @pytest.mark.parametrize(
        "raw, expected",
        [
            ("<p>hello</p>", "hello"),
            ("a &amp; b", "a & b"),
            ("x  <b>y</b>\n z", "x y z"),
            ("&lt;b&gt; &#65;&#x42; &quot;q&quot; &apos;", "<b> AB \"q\" '"),
            ("risk <", "risk <"),
            ("a<br/>b", "a b"),
        ],
    )
    def test_examples(self, raw, expected):
        assert strip_markup(raw) == expected

    @given(st.text(max_size=60))
    def test_no_double_spaces_or_padding(self, raw):
        out = strip_markup(raw)
        assert out == out.strip()
        assert "  " not in out


class TestDetokenize:
    def test_no_space_before_punctuation(self):
        assert detokenize(["The", "risk", "is", "low", "."]) == "The risk is low."

    def test_empty(self):
        assert detokenize([]) == ""
