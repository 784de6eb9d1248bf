import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asrbias import scoring
from asrbias.errors import ScoringError

# Published WERs for the seven systems: (model, norm {style: rate},
# rates {style: {group: rate}}). Used as golden inputs for the bias math.
GROUPS = ("DC", "DT", "NnT", "NnA", "DOA")
WER_ROWS = [
    ("none | none", (9.6, 23.9), (42.9, 22.1, 54.0, 59.0, 28.1), (50.2, 40.1, 59.9, 60.6, 41.8)),
    ("sp | none", (7.0, 22.0), (36.7, 20.5, 55.6, 61.2, 27.2), (43.8, 35.4, 60.3, 60.8, 41.2)),
    ("sp+specaug | none", (7.0, 20.2), (36.1, 18.8, 51.1, 58.8, 26.0), (40.1, 27.8, 52.6, 55.9, 38.0)),
    ("none | vtln-norm", (9.3, 23.6), (38.8, 21.2, 53.4, 58.3, 27.2), (45.9, 34.9, 59.0, 61.1, 41.5)),
    ("none | vtln-diverse", (9.3, 24.2), (37.5, 23.0, 55.8, 60.2, 29.6), (44.4, 38.3, 60.5, 61.5, 42.4)),
    ("sp+specaug | vtln-norm", (7.3, 20.2), (34.0, 17.9, 50.5, 56.6, 24.1), (37.5, 27.4, 52.2, 55.1, 35.4)),
    ("sp+specaug | vtln-diverse", (7.2, 20.3), (32.6, 17.8, 49.8, 55.4, 23.7), (37.7, 29.0, 52.4, 54.7, 36.4)),
]
EXPECTED_BIAS = {
    "none | none": (31.62, 26.62, 29.12),
    "sp | none": (33.24, 26.30, 29.77),
    "sp+specaug | none": (31.16, 22.68, 26.92),
    "none | vtln-norm": (30.48, 24.88, 27.68),
    "none | vtln-diverse": (31.92, 25.22, 28.57),
    "sp+specaug | vtln-norm": (29.32, 21.32, 25.32),
    "sp+specaug | vtln-diverse": (28.66, 21.74, 25.20),
}


def row_rates(row):
    _, (rd, cts), read, hmi = row
    return (
        {"Read": dict(zip(GROUPS, read)), "HMI": dict(zip(GROUPS, hmi))},
        {"Read": rd, "HMI": cts},
    )


def oracle_distance(a, b, memo=None):
    """Definitional minimum-edit-cost recursion, memoized."""
    if memo is None:
        memo = {}
    if not a:
        return len(b)
    if not b:
        return len(a)
    key = (a, b)
    if key not in memo:
        memo[key] = min(
            oracle_distance(a[1:], b[1:], memo) + (a[0] != b[0]),
            oracle_distance(a[1:], b, memo) + 1,
            oracle_distance(a, b[1:], memo) + 1,
        )
    return memo[key]


class TestTokenize:
    def test_word(self):
        assert scoring.tokenize("ab c", "word") == ["ab", "c"]

    def test_char_excludes_whitespace(self):
        assert scoring.tokenize("ab c", "char") == ["a", "b", "c"]

    def test_empty(self):
        assert scoring.tokenize("", "word") == []
        assert scoring.tokenize("", "char") == []

    def test_flags(self):
        assert scoring.tokenize("Ab, c!", "word", lowercase=True, strip_punct=True) == ["ab", "c"]

    def test_unknown_mode(self):
        with pytest.raises(ScoringError):
            scoring.tokenize("x", "phoneme")


class TestAlign:
    def test_identical(self):
        r = scoring.align(["a", "b", "c"], ["a", "b", "c"])
        assert (r.substitutions, r.deletions, r.insertions) == (0, 0, 0)
        assert r.matches == 3 and r.error_rate == 0.0

    def test_sub_plus_ins(self):
        r = scoring.align("a b c".split(), "a x c d".split())
        assert (r.substitutions, r.insertions, r.deletions) == (1, 1, 0)
        assert r.error_rate == pytest.approx(66.67, abs=0.005)

    def test_empty_hypothesis(self):
        r = scoring.align("a b c".split(), [])
        assert r.deletions == 3 and r.error_rate == 100.0

    def test_empty_reference_defined(self):
        r = scoring.align([], ["x", "y"])
        assert r.n_ref == 0 and r.insertions == 2
        with pytest.raises(ScoringError):
            r.error_rate

    def test_counts_consistent(self):
        r = scoring.align("a b c d".split(), "b c x".split())
        assert r.substitutions + r.deletions + r.matches == r.n_ref

    def test_backtrace_prefers_match_then_sub(self):
        ops = scoring.align(["a", "a"], ["a"]).ops
        # One deletion and one match; the match must be kept, and with the
        # del-before-ins preference the deletion comes first.
        assert [op for op, _, _ in ops] == ["del", "match"]

    def test_matches_oracle_small(self):
        alphabet = ("a", "b")
        strings = [()]
        for ln in range(1, 5):
            strings.extend(itertools.product(alphabet, repeat=ln))
        memo = {}
        for a in strings:
            for b in strings:
                assert scoring.align(a, b).n_errors == oracle_distance(a, b, memo)

    @settings(max_examples=100, deadline=None)
    @given(
        a=st.lists(st.sampled_from("abc"), max_size=8),
        b=st.lists(st.sampled_from("abc"), max_size=8),
    )
    def test_swap_symmetry(self, a, b):
        fwd = scoring.align(a, b)
        rev = scoring.align(b, a)
        assert fwd.n_errors == rev.n_errors
        assert fwd.deletions == rev.insertions and fwd.insertions == rev.deletions

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.lists(st.sampled_from("ab"), max_size=6),
        b=st.lists(st.sampled_from("ab"), max_size=6),
        c=st.lists(st.sampled_from("ab"), max_size=6),
    )
    def test_triangle_inequality(self, a, b, c):
        ab = scoring.align(a, b).n_errors
        bc = scoring.align(b, c).n_errors
        ac = scoring.align(a, c).n_errors
        assert ac <= ab + bc


class TestFormatAlignment:
    def test_block_layout(self):
        result = scoring.align("a b c".split(), "a x c d".split())
        block = scoring.format_alignment("u1", result)
        lines = block.splitlines()
        assert lines[0].startswith("id: u1")
        assert "S=1 D=0 I=1" in lines[0]
        assert lines[1].startswith("REF: ") and lines[2].startswith("HYP: ")
        assert "*" in lines[1]  # insertion shows a gap on the REF row

    def test_empty_reference(self):
        block = scoring.format_alignment("u2", scoring.align([], ["x"]))
        assert "rate=undefined" in block


class TestCorpusErrorRate:
    def test_all_identical(self):
        pairs = [("u1", "a b", "a b"), ("u2", "c", "c")]
        assert scoring.corpus_error_rate(pairs).error_rate == 0.0

    def test_pooled_not_averaged(self):
        pairs = [("u1", "a b", "a x"), ("u2", "c d", "c d")]
        gs = scoring.corpus_error_rate(pairs)
        assert gs.error_rate == 25.0
        assert gs.n_ref_total == 4 and gs.utterance_count == 2

    def test_empty_reference_names_utt(self):
        with pytest.raises(ScoringError, match="u7"):
            scoring.corpus_error_rate([("u7", "", "x")])

    def test_char_mode(self):
        gs = scoring.corpus_error_rate([("u1", "abc", "abd")], mode="char")
        assert gs.error_rate == pytest.approx(100.0 / 3)

    def test_matches_brute_force_recount(self):
        rng = random.Random(0)
        for _ in range(25):
            pairs = []
            for i in range(rng.randint(1, 8)):
                ref = " ".join(rng.choice("abc") for _ in range(rng.randint(1, 6)))
                hyp = " ".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
                pairs.append((f"u{i}", ref, hyp))
            gs = scoring.corpus_error_rate(pairs)
            memo = {}
            errs = sum(oracle_distance(tuple(r.split()), tuple(h.split()), memo) for _, r, h in pairs)
            n_ref = sum(len(r.split()) for _, r, _ in pairs)
            assert gs.error_rate == pytest.approx(100.0 * errs / n_ref)


class TestBiasMeasures:
    def test_individual_bias_golden(self):
        assert round(scoring.individual_bias(42.9, 9.6), 1) == 33.3
        assert round(scoring.individual_bias(23.7, 7.2), 1) == 16.5
        assert scoring.individual_bias(12.5, 12.5) == 0.0

    def test_overall_bias_golden(self):
        assert round(scoring.overall_bias([42.9, 22.1, 54.0, 59.0, 28.1], 9.6), 2) == 31.62
        assert round(scoring.overall_bias([37.7, 29.0, 52.4, 54.7, 36.4], 20.3), 2) == 21.74
        assert scoring.overall_bias([5.0, 5.0], 5.0) == 0.0

    def test_overall_bias_empty(self):
        with pytest.raises(ScoringError):
            scoring.overall_bias([], 1.0)

    @pytest.mark.parametrize("row", WER_ROWS, ids=[r[0] for r in WER_ROWS])
    def test_bias_table_reproduced(self, row):
        rates, norms = row_rates(row)
        rep = scoring.bias_report_from_rates(rates, norms, model=row[0])
        expect_read, expect_hmi, expect_avg = EXPECTED_BIAS[row[0]]
        assert round(rep.per_style_overall["Read"], 2) == expect_read
        assert round(rep.per_style_overall["HMI"], 2) == expect_hmi
        assert round(rep.average_overall, 2) == expect_avg

    def test_diverse_average_wer(self):
        rates, _ = row_rates(WER_ROWS[0])
        all_rates = [v for style in rates.values() for v in style.values()]
        assert round(sum(all_rates) / len(all_rates), 2) == 45.87
        rates_g, _ = row_rates(WER_ROWS[-1])
        all_g = [v for style in rates_g.values() for v in style.values()]
        assert round(sum(all_g) / len(all_g), 2) == 38.95

    def test_per_group_average(self):
        rates, norms = row_rates(WER_ROWS[0])
        rep = scoring.bias_report_from_rates(rates, norms)
        dc = ((42.9 - 9.6) + (50.2 - 23.9)) / 2
        assert rep.per_group_average["DC"] == pytest.approx(dc)

    def test_violation_flagged(self):
        rep = scoring.bias_report_from_rates(
            {"Read": {"DC": 5.0, "DT": 20.0}}, {"Read": 10.0}
        )
        assert ("Read", "DC") in rep.assumption_violations
        assert ("Read", "DT") not in rep.assumption_violations

    def test_single_group_equal_norm(self):
        rep = scoring.bias_report_from_rates(
            {"Read": {"DC": 10.0, "DT": 16.0}}, {"Read": 10.0}
        )
        assert rep.individual[("Read", "DC")] == 0.0
        assert rep.per_style_overall["Read"] == pytest.approx(3.0)

    def test_bias_report_from_group_scores(self):
        def gs(group, style, rate):
            return scoring.GroupScore(group, style, rate, 1000, 10)

        scores = [
            gs("Norm", "Read", 9.6),
            gs("Norm", "CTS", 23.9),
            gs("DC", "Read", 42.9),
            gs("DC", "HMI", 50.2),
        ]
        rep = scoring.bias_report(scores)
        # HMI diverse cells are referenced against the norm CTS rate.
        assert rep.norm_rates["HMI"] == 23.9
        assert rep.individual[("HMI", "DC")] == pytest.approx(26.3)
        assert rep.individual[("Read", "DC")] == pytest.approx(33.3)

    def test_missing_norm_score(self):
        scores = [scoring.GroupScore("DC", "Read", 42.9, 1000, 10)]
        with pytest.raises(ScoringError, match="norm"):
            scoring.bias_report(scores)
