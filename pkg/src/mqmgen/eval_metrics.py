"""Evaluation mathematics: span/severity/type F1, correlation coefficients
with p-values, bucket analysis, and inter-annotator agreement.

Span metrics match at token-position granularity, so overlapping spans earn
partial credit, and corpus scores micro-average TP/FP/FN pools over segments.
Correlations are computed from the direct formulas: Pearson on the values,
Spearman as Pearson on average-fractional ranks, Kendall as tie-corrected
tau-b. Pearson and Spearman p-values come from the two-tailed t-statistic
t = r * sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom; Kendall's from the
normal approximation of tau under independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .core import Annotation, Side
from .errors import ContractError, DegenerateInput


@dataclass(frozen=True)
class SpanScores:
    """Precision/recall/F1 for marked positions, (position, severity) pairs,
    and (position, category) pairs."""

    span_precision: float
    span_recall: float
    span_f1: float
    severity_precision: float
    severity_recall: float
    severity_f1: float
    type_precision: float
    type_recall: float
    type_f1: float


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int


@dataclass(frozen=True)
class BucketRow:
    label: str
    count: int
    pearson: Optional[CorrelationResult]
    spearman: Optional[CorrelationResult]
    kendall: Optional[CorrelationResult]


@dataclass(frozen=True)
class BucketReport:
    overall: BucketRow
    buckets: tuple[BucketRow, ...]


@dataclass(frozen=True)
class AgreementRow:
    rater_a: str
    rater_b: str
    n: int
    pearson: Optional[float]
    spearman: Optional[float]


# ---------------------------------------------------------------------------
# Span / severity / type F1

def _position_labels(a: Annotation, n_target: int, n_source: int):
    """Expand an annotation into its marked-position set plus the labeled
    (position, severity) and (position, category) sets. Source-side positions
    live in a separate namespace from target-side ones."""
    positions, with_severity, with_type = set(), set(), set()
    for err in a.errors:
        bound = n_source if err.side is Side.SOURCE else n_target
        start, end = err.span
        if not (0 <= start <= end < bound):
            raise ContractError(
                f"segment {a.segment_id}: span ({start}, {end}) exceeds "
                f"{bound} {err.side.value} tokens"
            )
        for pos in range(start, end + 1):
            key = (err.side.value, pos)
            positions.add(key)
            with_severity.add((key, err.severity.value))
            with_type.add((key, err.category.value))
    return positions, with_severity, with_type


def _counts(pred_set: set, gold_set: set) -> tuple[int, int, int]:
    tp = len(pred_set & gold_set)
    return tp, len(pred_set) - tp, len(gold_set) - tp


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _match_counts(pred: Annotation, gold: Annotation, n_target: int, n_source: int):
    if pred.segment_id != gold.segment_id:
        raise ContractError(
            f"span scores compare different segments: {pred.segment_id!r} vs {gold.segment_id!r}"
        )
    p_pos, p_sev, p_typ = _position_labels(pred, n_target, n_source)
    g_pos, g_sev, g_typ = _position_labels(gold, n_target, n_source)
    return _counts(p_pos, g_pos), _counts(p_sev, g_sev), _counts(p_typ, g_typ)


def _scores_from_counts(span, severity, type_) -> SpanScores:
    sp, sr, sf = _prf(*span)
    vp, vr, vf = _prf(*severity)
    tp_, tr, tf = _prf(*type_)
    return SpanScores(sp, sr, sf, vp, vr, vf, tp_, tr, tf)


def span_scores(pred: Annotation, gold: Annotation, n_target_tokens: int, n_source_tokens: int) -> SpanScores:
    """Span, severity, and error-type F1 for one segment's annotation pair."""
    return _scores_from_counts(*_match_counts(pred, gold, n_target_tokens, n_source_tokens))


def corpus_span_scores(items: Iterable[tuple[Annotation, Annotation, int, int]]) -> SpanScores:
    """Micro-averaged span scores: TP/FP/FN pooled over all segments."""
    totals = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for pred, gold, n_tgt, n_src in items:
        for total, counts in zip(totals, _match_counts(pred, gold, n_tgt, n_src)):
            for i in range(3):
                total[i] += counts[i]
    return _scores_from_counts(*(tuple(t) for t in totals))


# ---------------------------------------------------------------------------
# Correlation coefficients

def _as_float_arrays(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"paired vectors required, got shapes {x.shape} and {y.shape}")
    return x, y


def _pearson_coefficient(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Sample Pearson coefficient, or None when either vector is constant."""
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _t_test_p(r: float, n: int) -> float:
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * _scipy_stats.t.sf(abs(t), n - 2))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Pearson correlation with a two-tailed t-test p-value. Needs n >= 3 and
    non-zero variance in both vectors (DegenerateInput otherwise)."""
    x, y = _as_float_arrays(xs, ys)
    n = len(x)
    if n < 3:
        raise ValueError(f"pearson needs at least 3 observations, got {n}")
    r = _pearson_coefficient(x, y)
    if r is None:
        raise DegenerateInput("zero variance in at least one vector")
    return CorrelationResult(coefficient=r, p_value=_t_test_p(r, n), n=n)


def _fractional_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    return _scipy_stats.rankdata(x, method="average")


def spearman(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Spearman correlation: Pearson applied to average-fractional ranks."""
    x, y = _as_float_arrays(xs, ys)
    if len(x) < 3:
        raise ValueError(f"spearman needs at least 3 observations, got {len(x)}")
    r = _pearson_coefficient(_fractional_ranks(x), _fractional_ranks(y))
    if r is None:
        raise DegenerateInput("zero rank variance in at least one vector")
    return CorrelationResult(coefficient=r, p_value=_t_test_p(r, len(x)), n=len(x))


def _kendall_pair_counts(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int, int]:
    """Concordant, discordant, tied-in-x-only, and tied-in-y-only pair counts
    over all unordered pairs. Vectorized row-wise; pairs tied in both vectors
    count in none of the four."""
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n - 1):
        dx = np.sign(x[i + 1:] - x[i])
        dy = np.sign(y[i + 1:] - y[i])
        prod = dx * dy
        concordant += int((prod > 0).sum())
        discordant += int((prod < 0).sum())
        ties_x += int(((dx == 0) & (dy != 0)).sum())
        ties_y += int(((dy == 0) & (dx != 0)).sum())
    return concordant, discordant, ties_x, ties_y


def kendall(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Tie-corrected Kendall tau-b with a normal-approximation p-value."""
    x, y = _as_float_arrays(xs, ys)
    n = len(x)
    if n < 2:
        raise ValueError(f"kendall needs at least 2 observations, got {n}")
    c, d, tx, ty = _kendall_pair_counts(x, y)
    denom = math.sqrt(float(c + d + tx) * float(c + d + ty))
    if denom == 0.0:
        raise DegenerateInput("all pairs tied in at least one vector")
    tau = max(-1.0, min(1.0, (c - d) / denom))
    z = 3.0 * tau * math.sqrt(n * (n - 1)) / math.sqrt(2.0 * (2 * n + 5))
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return CorrelationResult(coefficient=tau, p_value=p, n=n)


def significance_marker(p_value: Optional[float]) -> str:
    """Table convention: ** for p < 0.001, * for p < 0.05, blank otherwise."""
    if p_value is None:
        return ""
    if p_value < 0.001:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


# ---------------------------------------------------------------------------
# Bucket analysis

def _format_bound(b: float) -> str:
    return f"{b:g}"


def _safe_correlations(golds: Sequence[float], preds: Sequence[float]):
    """All three correlations, with None standing in when a statistic is
    undefined (fewer than 3 points, or degenerate input)."""
    if len(golds) < 3:
        return None, None, None
    out = []
    for fn in (pearson, spearman, kendall):
        try:
            out.append(fn(golds, preds))
        except DegenerateInput:
            out.append(None)
    return tuple(out)


def bucket_analysis(
    pairs: Sequence[tuple[float, float]],
    boundaries: Sequence[float] = (0.8, 0.9),
) -> BucketReport:
    """Correlations between gold and predicted quality, overall and within
    gold-quality buckets.

    With boundaries (b0, .., bk) the buckets are [bk, 1.0], .., [b0, b1),
    [0, b0), reported top-down. An empty boundary list yields a single
    all-covering bucket, which reproduces the overall row exactly. Buckets
    with fewer than 3 pairs report their correlations as None.
    """
    bounds = sorted(set(float(b) for b in boundaries))
    if any(not (0.0 < b < 1.0) for b in bounds):
        raise ValueError(f"bucket boundaries must lie strictly inside (0, 1): {boundaries!r}")
    for g, p in pairs:
        if not (0.0 <= g <= 1.0 and 0.0 <= p <= 1.0):
            raise ValueError(f"quality scores must lie in [0, 1], got ({g}, {p})")

    if bounds:
        labels = [f"<{_format_bound(bounds[0])}"]
        labels += [f"{_format_bound(lo)}-{_format_bound(hi)}" for lo, hi in zip(bounds, bounds[1:])]
        labels += [f"{_format_bound(bounds[-1])}-1.0"]
    else:
        labels = ["0.0-1.0"]
    binned: list[list[tuple[float, float]]] = [[] for _ in labels]
    for g, p in pairs:
        idx = 0
        for b in bounds:
            if g >= b:
                idx += 1
        binned[idx].append((g, p))

    def row(label: str, bucket: Sequence[tuple[float, float]]) -> BucketRow:
        golds = [g for g, _ in bucket]
        preds = [p for _, p in bucket]
        pe, sp, ke = _safe_correlations(golds, preds)
        return BucketRow(label=label, count=len(bucket), pearson=pe, spearman=sp, kendall=ke)

    overall = row("0.0-1.0", list(pairs))
    buckets = tuple(row(lbl, binned[i]) for i, lbl in reversed(list(enumerate(labels))))
    return BucketReport(overall=overall, buckets=buckets)


# ---------------------------------------------------------------------------
# Inter-annotator agreement

def annotator_agreement(
    gold: Iterable[tuple[str, str, float]],
) -> list[AgreementRow]:
    """Pearson/Spearman agreement between every rater pair sharing >= 2
    segments, on their shared segments' quality scores, sorted by shared
    count descending. Coefficients are None when a rater's shared scores are
    constant. Input rows are (segment_id, rater, quality)."""
    scores: dict[str, dict[str, list[float]]] = {}
    for segment_id, rater, quality in gold:
        scores.setdefault(rater, {}).setdefault(segment_id, []).append(quality)
    per_rater = {
        rater: {seg: sum(vals) / len(vals) for seg, vals in segs.items()}
        for rater, segs in scores.items()
    }
    raters = sorted(per_rater)
    rows = []
    for i, ra in enumerate(raters):
        for rb in raters[i + 1:]:
            shared = sorted(set(per_rater[ra]) & set(per_rater[rb]))
            if len(shared) < 2:
                continue
            a = np.asarray([per_rater[ra][s] for s in shared])
            b = np.asarray([per_rater[rb][s] for s in shared])
            rows.append(AgreementRow(
                rater_a=ra,
                rater_b=rb,
                n=len(shared),
                pearson=_pearson_coefficient(a, b),
                spearman=_pearson_coefficient(_fractional_ranks(a), _fractional_ranks(b)),
            ))
    rows.sort(key=lambda r: (-r.n, r.rater_a, r.rater_b))
    return rows


# ---------------------------------------------------------------------------
# Report rendering (TSV mirrors the table layouts; JSON carries raw values)

def _corr_cell(c: Optional[CorrelationResult]) -> str:
    if c is None:
        return "-"
    return f"{c.coefficient:.3f}{significance_marker(c.p_value)}"


def _corr_json(c: Optional[CorrelationResult]):
    if c is None:
        return None
    return {
        "coefficient": c.coefficient,
        "p_value": c.p_value,
        "n": c.n,
        "marker": significance_marker(c.p_value),
    }


def span_scores_to_tsv(s: SpanScores) -> str:
    header = "metric\tprecision\trecall\tf1"
    rows = [
        f"span\t{s.span_precision:.4f}\t{s.span_recall:.4f}\t{s.span_f1:.4f}",
        f"severity\t{s.severity_precision:.4f}\t{s.severity_recall:.4f}\t{s.severity_f1:.4f}",
        f"type\t{s.type_precision:.4f}\t{s.type_recall:.4f}\t{s.type_f1:.4f}",
    ]
    return "\n".join([header] + rows) + "\n"


def span_scores_to_json(s: SpanScores) -> dict:
    return {
        "span": {"precision": s.span_precision, "recall": s.span_recall, "f1": s.span_f1},
        "severity": {"precision": s.severity_precision, "recall": s.severity_recall, "f1": s.severity_f1},
        "type": {"precision": s.type_precision, "recall": s.type_recall, "f1": s.type_f1},
    }


def correlations_to_tsv(pe: CorrelationResult, sp: CorrelationResult, ke: CorrelationResult) -> str:
    header = "statistic\tcoefficient\tp_value\tn\tmarked"
    rows = [
        f"pearson\t{pe.coefficient:.6f}\t{pe.p_value:.6g}\t{pe.n}\t{_corr_cell(pe)}",
        f"spearman\t{sp.coefficient:.6f}\t{sp.p_value:.6g}\t{sp.n}\t{_corr_cell(sp)}",
        f"kendall\t{ke.coefficient:.6f}\t{ke.p_value:.6g}\t{ke.n}\t{_corr_cell(ke)}",
    ]
    return "\n".join([header] + rows) + "\n"


def correlations_to_json(pe: CorrelationResult, sp: CorrelationResult, ke: CorrelationResult) -> dict:
    return {"pearson": _corr_json(pe), "spearman": _corr_json(sp), "kendall": _corr_json(ke)}


def bucket_report_to_tsv(report: BucketReport) -> str:
    lines = ["bucket\tn\tpearson\tspearman\tkendall"]
    for row in (report.overall, *report.buckets):
        lines.append(
            f"{row.label}\t{row.count}\t{_corr_cell(row.pearson)}"
            f"\t{_corr_cell(row.spearman)}\t{_corr_cell(row.kendall)}"
        )
    return "\n".join(lines) + "\n"


def bucket_report_to_json(report: BucketReport) -> dict:
    def row_json(row: BucketRow) -> dict:
        return {
            "bucket": row.label,
            "n": row.count,
            "pearson": _corr_json(row.pearson),
            "spearman": _corr_json(row.spearman),
            "kendall": _corr_json(row.kendall),
        }

    return {"overall": row_json(report.overall), "buckets": [row_json(b) for b in report.buckets]}


def agreement_to_tsv(rows: list[AgreementRow]) -> str:
    lines = ["rater_a\trater_b\tn\tpearson\tspearman"]
    for r in rows:
        pe = "-" if r.pearson is None else f"{r.pearson:.3f}"
        sp = "-" if r.spearman is None else f"{r.spearman:.3f}"
        lines.append(f"{r.rater_a}\t{r.rater_b}\t{r.n}\t{pe}\t{sp}")
    return "\n".join(lines) + "\n"


def agreement_to_json(rows: list[AgreementRow]) -> list[dict]:
    return [
        {"rater_a": r.rater_a, "rater_b": r.rater_b, "n": r.n, "pearson": r.pearson, "spearman": r.spearman}
        for r in rows
    ]
