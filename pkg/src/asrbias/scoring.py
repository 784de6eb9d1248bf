"""Token alignment, WER/CER, and speaker-group bias measures.

Error rates are pooled over a corpus: 100 * (S + D + I) / total reference
tokens, never a mean of per-utterance rates. Bias for a speaker group is its
pooled error rate minus the norm group's rate; the overall bias of a system
is the mean of the individual biases.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, field

from .errors import ScoringError

logger = logging.getLogger(__name__)

# Norm-group speaking style used as reference for each diverse style.
STYLE_NORM_MAP = {
    "Read": "Read",
    "HMI": "CTS",
    "CTS": "CTS",
    "Conversational": "Conversational",
}

_MATCH, _SUB, _DEL, _INS = "match", "sub", "del", "ins"


def tokenize(
    text: str,
    mode: str = "word",
    lowercase: bool = False,
    strip_punct: bool = False,
) -> list[str]:
    """Split text into word or character tokens.

    Character mode uses Unicode scalar values and excludes whitespace. The
    optional lowercase / punctuation-strip normalizations run first.
    """
    if lowercase:
        text = text.lower()
    if strip_punct:
        text = "".join(c for c in text if not unicodedata.category(c).startswith("P"))
    if mode == "word":
        return text.split()
    if mode == "char":
        return [c for c in text if not c.isspace()]
    raise ScoringError(f"unknown tokenize mode {mode!r}")


@dataclass
class AlignmentResult:
    """Minimum-edit-distance alignment counts plus the op sequence."""

    n_ref: int
    substitutions: int
    deletions: int
    insertions: int
    ops: list = field(default_factory=list, repr=False)

    @property
    def matches(self) -> int:
        return self.n_ref - self.substitutions - self.deletions

    @property
    def n_errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def error_rate(self) -> float:
        if self.n_ref == 0:
            raise ScoringError("error rate undefined for an empty reference")
        return 100.0 * self.n_errors / self.n_ref


def align(ref_tokens, hyp_tokens) -> AlignmentResult:
    """Levenshtein alignment with unit costs.

    Backtrace ties prefer match > substitution > deletion > insertion.
    An empty reference yields n_ref = 0 with len(hyp) insertions.
    """
    ref = list(ref_tokens)
    hyp = list(hyp_tokens)
    m, n = len(ref), len(hyp)
    # dist[i][j]: edit distance between ref[:i] and hyp[:j].
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = i
    for j in range(1, n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        row = dist[i]
        prev = dist[i - 1]
        ri = ref[i - 1]
        for j in range(1, n + 1):
            sub = prev[j - 1] + (ri != hyp[j - 1])
            dele = prev[j] + 1
            ins = row[j - 1] + 1
            row[j] = sub if sub <= dele else dele
            if ins < row[j]:
                row[j] = ins

    ops = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i - 1][j - 1] == here:
            ops.append((_MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i - 1][j - 1] + 1 == here:
            ops.append((_SUB, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            ops.append((_DEL, ref[i - 1], None))
            i = i - 1
        else:
            ops.append((_INS, None, hyp[j - 1]))
            j = j - 1
    ops.reverse()

    subs = sum(1 for op, _, _ in ops if op == _SUB)
    dels = sum(1 for op, _, _ in ops if op == _DEL)
    inss = sum(1 for op, _, _ in ops if op == _INS)
    return AlignmentResult(m, subs, dels, inss, ops)


@dataclass
class GroupScore:
    """Pooled error rate for one (group, style) cell."""

    group: str
    style: str
    error_rate: float
    n_ref_total: int
    utterance_count: int
    n_errors: int = 0
    model: str = ""


def corpus_error_rate(
    pairs,
    mode: str = "word",
    group: str = "",
    style: str = "",
    lowercase: bool = False,
    strip_punct: bool = False,
    model: str = "",
) -> GroupScore:
    """Pooled error rate over (utt_id, ref_text, hyp_text) triples."""
    total_ref = 0
    total_err = 0
    count = 0
    for utt_id, ref_text, hyp_text in pairs:
        ref = tokenize(ref_text, mode, lowercase, strip_punct)
        if not ref:
            raise ScoringError(f"utterance {utt_id!r} has an empty reference")
        hyp = tokenize(hyp_text, mode, lowercase, strip_punct)
        result = align(ref, hyp)
        total_ref += result.n_ref
        total_err += result.n_errors
        count += 1
    if count == 0:
        raise ScoringError("cannot score an empty utterance list")
    return GroupScore(
        group=group,
        style=style,
        error_rate=100.0 * total_err / total_ref,
        n_ref_total=total_ref,
        utterance_count=count,
        n_errors=total_err,
        model=model,
    )


def format_alignment(utt_id: str, result: AlignmentResult) -> str:
    """Human-readable aligned-text block: REF / HYP / op rows per utterance."""
    ref_row, hyp_row, op_row = [], [], []
    marks = {_MATCH: "", _SUB: "S", _DEL: "D", _INS: "I"}
    for op, ref_tok, hyp_tok in result.ops:
        r = ref_tok if ref_tok is not None else "*"
        h = hyp_tok if hyp_tok is not None else "*"
        width = max(len(r), len(h), 1)
        ref_row.append(r.ljust(width))
        hyp_row.append(h.ljust(width))
        op_row.append(marks[op].ljust(width))
    rate = f"{result.error_rate:.2f}%" if result.n_ref else "undefined"
    header = (
        f"id: {utt_id}  S={result.substitutions} D={result.deletions} "
        f"I={result.insertions} n_ref={result.n_ref} rate={rate}"
    )
    return "\n".join(
        [header, "REF: " + " ".join(ref_row), "HYP: " + " ".join(hyp_row),
         "OP:  " + " ".join(op_row)]
    )


def individual_bias(rate_group: float, rate_norm: float) -> float:
    """Signed difference between a group's error rate and the norm rate."""
    return rate_group - rate_norm


def overall_bias(group_rates, rate_norm: float) -> float:
    """Mean of the individual biases of the given group rates."""
    rates = list(group_rates)
    if not rates:
        raise ScoringError("overall bias needs at least one group rate")
    return sum(individual_bias(r, rate_norm) for r in rates) / len(rates)


@dataclass
class BiasReport:
    """Bias summary for one system.

    individual maps (style, group) to the group's bias against the
    style-matched norm rate; per_style_overall is the mean over groups;
    average_overall is the mean of the per-style values. per_group_average
    is each group's bias averaged across styles. assumption_violations
    lists (style, group) cells where the group outperformed the norm.
    """

    model: str
    styles: list[str]
    groups: list[str]
    norm_rates: dict[str, float]
    individual: dict[tuple[str, str], float]
    per_style_overall: dict[str, float]
    average_overall: float
    per_group_average: dict[str, float]
    assumption_violations: list[tuple[str, str]]

    @property
    def n_group_cells(self) -> int:
        return len(self.styles) * len(self.groups)


def bias_report_from_rates(
    group_rates: dict[str, dict[str, float]],
    norm_rates: dict[str, float],
    model: str = "",
) -> BiasReport:
    """Build a BiasReport from per-style group rates and style-matched norm
    rates: group_rates[style][group] and norm_rates[style]."""
    styles = list(group_rates.keys())
    if not styles:
        raise ScoringError("no styles to report on")
    groups = list(group_rates[styles[0]].keys())
    for style in styles:
        if style not in norm_rates:
            raise ScoringError(f"missing norm rate for style {style!r}")
        if list(group_rates[style].keys()) != groups:
            raise ScoringError("styles disagree on the speaker group set")

    individual = {}
    violations = []
    for style in styles:
        for group in groups:
            bias = individual_bias(group_rates[style][group], norm_rates[style])
            individual[(style, group)] = bias
            if bias <= 0:
                violations.append((style, group))
                logger.warning(
                    "group %s (%s) does not underperform the norm group "
                    "(bias %.2f); Individual Bias assumes it does",
                    group,
                    style,
                    bias,
                )
    per_style = {
        style: overall_bias(group_rates[style].values(), norm_rates[style])
        for style in styles
    }
    average = sum(per_style.values()) / len(styles)
    per_group = {
        group: sum(individual[(style, group)] for style in styles) / len(styles)
        for group in groups
    }
    return BiasReport(
        model=model,
        styles=styles,
        groups=groups,
        norm_rates=dict(norm_rates),
        individual=individual,
        per_style_overall=per_style,
        average_overall=average,
        per_group_average=per_group,
        assumption_violations=violations,
    )


def bias_report(
    scores: list[GroupScore],
    norm_group: str = "Norm",
    style_norm_map: dict[str, str] | None = None,
    model: str = "",
) -> BiasReport:
    """Build a BiasReport from GroupScore cells for the norm and diverse
    groups. Each diverse style is compared against the norm group's rate in
    the mapped style (HMI is matched to the norm CTS rate by default)."""
    style_map = dict(STYLE_NORM_MAP if style_norm_map is None else style_norm_map)
    norm_by_style: dict[str, float] = {}
    diverse: dict[str, dict[str, float]] = {}
    for s in scores:
        if s.group == norm_group:
            norm_by_style[s.style] = s.error_rate
        else:
            diverse.setdefault(s.style, {})[s.group] = s.error_rate
    if not diverse:
        raise ScoringError("no diverse-group scores to report on")
    norm_rates = {}
    for style in diverse:
        ref_style = style_map.get(style, style)
        if ref_style not in norm_by_style:
            raise ScoringError(
                f"missing norm-group score for style {ref_style!r} "
                f"(needed as reference for {style!r})"
            )
        norm_rates[style] = norm_by_style[ref_style]
    return bias_report_from_rates(diverse, norm_rates, model=model)
