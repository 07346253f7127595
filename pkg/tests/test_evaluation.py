import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from healthlit.errors import ContractError
from healthlit.evaluation import (
    BLEU_BANDS,
    SUMMARY_COLUMNS,
    betainc,
    corpus_bleu,
    hir_report,
    interpret_bleu,
    paired_t_test,
    sentence_bleu,
    student_t_two_sided_p,
    summarize,
    summary_table,
)
from healthlit.text import Sentence
from healthlit.thesaurus import hir
from oracles import corpus_bleu_oracle, paired_t_oracle, sentence_bleu_oracle, two_sided_p_quadrature

HYP6 = "the test can find all cancers"
REF7 = "the test can spot all the cancers"
# p = (5/6, 2/5, 1/4, smoothed 1/4), BP = exp(1 - 7/6)
HYP6_REF7_BLEU = 32.159351091190125

VOCAB = ["a", "b", "c", "d", "e", "f"]


def random_pair(rng, lo=1, hi=12):
    h = [rng.choice(VOCAB) for _ in range(rng.randint(lo, hi))]
    r = [rng.choice(VOCAB) for _ in range(rng.randint(lo, hi))]
    return h, r


class TestSentenceBleu:
    def test_identical(self):
        assert sentence_bleu("The risk is low.", "the risk is low").score == 100.0

    def test_single_word_identical(self):
        assert sentence_bleu("risk", "risk").score == 100.0

    def test_disjoint(self):
        assert sentence_bleu("alpha beta gamma", "delta epsilon").score == 0.0

    def test_frozen_oracle_value(self):
        res = sentence_bleu(HYP6, REF7)
        assert res.score == pytest.approx(HYP6_REF7_BLEU, rel=1e-12)
        assert res.score == pytest.approx(100 * math.exp(-1 / 6) * (1 / 48) ** 0.25, rel=1e-12)
        assert res.precisions == pytest.approx((5 / 6, 2 / 5, 1 / 4, 1 / 4))
        assert (res.hyp_len, res.ref_len) == (6, 7)

    def test_unsmoothed_zero(self):
        assert sentence_bleu(HYP6, REF7, smoothing="none").score == 0.0

    def test_empty_hypothesis(self):
        res = sentence_bleu("", "risk is low")
        assert res.score == 0.0 and res.brevity_penalty == 0.0 and res.empty_hypothesis

    def test_empty_reference(self):
        with pytest.raises(ContractError):
            sentence_bleu("risk", "...")

    def test_punctuation_and_case_ignored(self):
        assert sentence_bleu("Risk, is LOW!", "risk is low").score == 100.0

    def test_matches_oracle_randomized(self):
        rng = random.Random(11)
        for _ in range(200):
            h, r = random_pair(rng)
            for smooth in (True, False):
                ours = sentence_bleu(h, r, smoothing="add_one_higher_order" if smooth else "none").score
                assert ours == pytest.approx(sentence_bleu_oracle(h, r, smooth=smooth), rel=1e-9, abs=1e-12)

    @given(st.lists(st.sampled_from(VOCAB), min_size=1, max_size=10), st.lists(st.sampled_from(VOCAB), min_size=1, max_size=10))
    def test_100_iff_equal(self, h, r):
        assert (sentence_bleu(h, r).score == 100.0) == (h == r)

    @given(st.lists(st.sampled_from(VOCAB), min_size=2, max_size=12), st.lists(st.sampled_from(VOCAB), min_size=1, max_size=12))
    def test_brevity_penalty_monotone(self, h, r):
        shorter = h[:-1]
        if len(h) <= len(r):
            assert sentence_bleu(shorter, r).brevity_penalty <= sentence_bleu(h, r).brevity_penalty

    def test_range(self):
        rng = random.Random(5)
        for _ in range(100):
            h, r = random_pair(rng)
            assert 0.0 <= sentence_bleu(h, r).score <= 100.0


class TestCorpusBleu:
    def test_all_identical(self):
        assert corpus_bleu(["a b c", "d e"], ["a b c", "d e"]).score == 100.0

    def test_single_pair_equals_unsmoothed_sentence(self):
        rng = random.Random(2)
        for _ in range(50):
            h, r = random_pair(rng)
            assert corpus_bleu([h], [r]).score == sentence_bleu(h, r, smoothing="none").score

    def test_two_pair_oracle(self):
        pairs = [(HYP6.split(), REF7.split()), ("a test can find cancers early".split(), "a doctor can find cancers early".split())]
        ours = corpus_bleu([h for h, _ in pairs], [r for _, r in pairs]).score
        assert ours == pytest.approx(corpus_bleu_oracle(pairs), rel=1e-9)
        assert ours > 0

    def test_randomized_oracle(self):
        rng = random.Random(9)
        for _ in range(50):
            pairs = [random_pair(rng) for _ in range(rng.randint(1, 5))]
            ours = corpus_bleu([h for h, _ in pairs], [r for _, r in pairs]).score
            assert ours == pytest.approx(corpus_bleu_oracle(pairs), rel=1e-9, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            corpus_bleu(["a"], ["a", "b"])


class TestSummarize:
    def test_linear_interpolation(self):
        s = summarize([1, 2, 3, 4])
        assert (s.p25, s.p50, s.p75, s.mean) == (1.75, 2.5, 3.25, 2.5)

    def test_constant(self):
        s = summarize([7.5] * 5)
        assert s.as_row() == (7.5, 7.5, 7.5, 7.5)

    def test_empty(self):
        with pytest.raises(ContractError):
            summarize([])

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=30), st.randoms())
    def test_order_statistics(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        a, b = summarize(xs), summarize(ys)
        assert (a.p25, a.p50, a.p75) == (b.p25, b.p50, b.p75)
        assert a.p25 <= a.p50 <= a.p75
        assert min(xs) - 1e-9 <= a.mean <= max(xs) + 1e-9


class TestInterpret:
    @pytest.mark.parametrize(
        "score, label",
        [
            (41.578, "High quality translations"),
            (5, "Almost useless"),
            (40.0, "High quality translations"),
            (39.999, "Understandable to good translations"),
            (0, "Almost useless"),
            (100, "Quality often better than human"),
        ],
    )
    def test_bands(self, score, label):
        assert interpret_bleu(score) == label

    @pytest.mark.parametrize("score", [-0.1, 100.1, float("nan")])
    def test_out_of_range(self, score):
        with pytest.raises(ContractError):
            interpret_bleu(score)

    def test_bands_partition(self):
        lows = [lo for lo, _ in BLEU_BANDS]
        assert lows[0] == 0 and lows == sorted(lows)
        labels = [interpret_bleu(float(x)) for x in np.linspace(0, 100, 1001)]
        assert set(labels) == {label for _, label in BLEU_BANDS}
        for lo, label in BLEU_BANDS:
            assert interpret_bleu(lo) == label


T_FIXTURES = [
    (
        [34.846, 25.579, 56.706, 23.64, 59.662, 65.309, 26.652, 22.583, 44.865, 79.318],
        [45.047, 28.185, 56.778, 18.301, 68.366, 69.359, 27.168, 20.483, 52.279, 88.975],
        -2.119908523603604,
        0.06304695401682696,
    ),
    (
        [34.965, 23.737, 76.687, 59.017, 39.301, 25.002, 33.155, 25.051, 23.128, 32.315],
        [40.598, 30.962, 75.452, 52.846, 39.272, 22.335, 38.927, 26.547, 12.349, 31.813],
        0.07095088202471891,
        0.9449884413693868,
    ),
    (
        [48.016, 37.241, 77.269, 55.968, 49.945, 61.89, 45.785, 20.173],
        [38.286, 33.191, 81.423, 54.512, 43.593, 54.643, 52.802, 9.859],
        1.5609857185742588,
        0.16249538128967986,
    ),
    (
        [60.726, 63.007, 59.021, 46.836, 22.706, 50.771, 48.619, 49.162, 74.472, 51.114, 52.58, 49.02],
        [52.617, 61.872, 55.215, 40.48, 17.775, 47.998, 45.692, 49.425, 70.049, 45.62, 47.956, 44.124],
        6.304118836454597,
        5.803974849106022e-05,
    ),
    (
        [59.652, 73.946, 26.803, 79.147, 52.152],
        [48.05, 65.355, 12.571, 67.322, 48.882],
        5.255056024653001,
        0.006275564560166079,
    ),
]


class TestTTest:
    @pytest.mark.parametrize("a, b, t_frozen, p_frozen", T_FIXTURES)
    def test_frozen_quadrature_values(self, a, b, t_frozen, p_frozen):
        res = paired_t_test(a, b)
        assert res.t == pytest.approx(t_frozen, abs=1e-9)
        assert res.p == pytest.approx(p_frozen, abs=1e-9)
        assert res.df == len(a) - 1 and not res.degenerate

    @pytest.mark.parametrize("a, b, t_frozen, p_frozen", T_FIXTURES)
    def test_live_quadrature(self, a, b, t_frozen, p_frozen):
        t, df, p = paired_t_oracle(a, b)
        res = paired_t_test(a, b)
        assert abs(res.t - t) <= 1e-6 and abs(res.p - p) <= 1e-6

    def test_equal(self):
        res = paired_t_test([1, 2, 3], [1, 2, 3])
        assert res.p == 1.0 and res.degenerate and res.t == 0.0

    def test_constant_nonzero_difference(self):
        res = paired_t_test([2, 3, 4], [1, 2, 3])
        assert res.p == 0.0 and res.degenerate and res.t == math.inf

    def test_antisymmetry(self):
        for a, b, *_ in T_FIXTURES:
            ab, ba = paired_t_test(a, b), paired_t_test(b, a)
            assert ab.t == -ba.t and ab.p == ba.p

    def test_errors(self):
        with pytest.raises(ContractError):
            paired_t_test([1], [2])
        with pytest.raises(ContractError):
            paired_t_test([1, 2], [1, 2, 3])

    def test_str(self):
        assert str(paired_t_test(*T_FIXTURES[0][:2])).startswith("t=-2.1199")
        assert ", df=9, p=" in str(paired_t_test(*T_FIXTURES[0][:2]))

    def test_p_decreasing_in_t(self):
        for df in (1, 2, 5, 30, 300):
            ps = [student_t_two_sided_p(t, df) for t in np.linspace(0, 12, 121)]
            assert all(x > y for x, y in zip(ps, ps[1:]))

    def test_tiny_p(self):
        # far tail, checked against the quadrature oracle in relative terms
        assert student_t_two_sided_p(9.0, 40) == pytest.approx(two_sided_p_quadrature(9.0, 40), rel=1e-6)

    def test_betainc_against_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            a, b = rng.uniform(0.05, 60, size=2)
            x = rng.uniform(0, 1)
            assert abs(betainc(a, b, x) - special.betainc(a, b, x)) <= 1e-10

    def test_betainc_edges(self):
        assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0
        with pytest.raises(ContractError):
            betainc(2, 3, 1.5)


class TestReports:
    def test_summary_table_columns(self):
        text = summary_table({"BiLSTM": summarize([25.363, 40.221, 56.140])})
        header = text.splitlines()[0]
        positions = [header.index(c) for c in SUMMARY_COLUMNS]
        assert positions == sorted(positions)
        csv = summary_table({"BiLSTM": summarize([1, 2])}, fmt="csv", corpus_scores={"BiLSTM": 3.0})
        assert csv.splitlines()[0] == "Model,25th Percentile,50th Percentile,75th Percentile,Mean,Corpus BLEU,Interpretation"

    def test_hir_report_grid(self, lexicon):
        stages = {"Source": ["Risk is high.", "Walk daily now.", "..."], "Outputs": ["Walk daily now."]}
        sites = {"Source": ["A", "B", "A"], "Outputs": ["B"]}
        rep = hir_report(stages, sites, lexicon)
        assert rep.rows == ["A", "B", "Average"]
        assert rep.cell("A", "Source") == pytest.approx(1 / 3)
        assert rep.cell("B", "Outputs") == 0.0
        assert rep.cell("A", "Outputs") is None
        assert rep.skipped == {"Source": 1}
        assert "–" in rep.to_text()
        assert rep.to_csv().splitlines()[-1] == "Average,0.167,0.000"

    def test_single_sentence_full_cover(self, lexicon):
        rep = hir_report({"S": ["risk"]}, {"S": ["x"]}, lexicon)
        assert rep.cell("x", "S") == 1.0

    def test_cells_equal_mean_of_hir(self, silver, lexicon):
        stages = {"src": [p.source for p in silver], "tgt": [p.target for p in silver]}
        sites = {k: [p.source_site.display for p in silver] for k in stages}
        rep = hir_report(stages, sites, lexicon)
        for site in set(sites["src"]):
            values = [float(hir(p.source, lexicon)) for p in silver if p.source_site.display == site]
            assert rep.cell(site, "src") == pytest.approx(sum(values) / len(values), abs=1e-12)
        assert rep.cell("Average", "src") > rep.cell("Average", "tgt")

    def test_mismatched_sites(self, lexicon):
        with pytest.raises(ContractError):
            hir_report({"S": [Sentence("risk")]}, {"S": []}, lexicon)
