"""Evaluation against gold annotations: span metrics, correlations with
significance markers, bucket analysis, and inter-annotator agreement."""

import random

from mqmgen.eval_metrics import (
    annotator_agreement,
    agreement_to_tsv,
    bucket_analysis,
    bucket_report_to_tsv,
    corpus_span_scores,
    correlations_to_tsv,
    kendall,
    pearson,
    span_scores,
    spearman,
)
from mqmgen.core import (
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Severity,
    SeverityScheme,
)
from mqmgen.scoring import penalty, quality


def annotation(seg_id, spans, severity=Severity.MINOR):
    errors = tuple(
        ErrorSpan(ErrorCategory.ACCURACY, severity, "w", span) for span in spans
    )
    pen = penalty(errors)
    return Annotation(seg_id, "demo", errors, SeverityScheme.BINARY_LABELS, pen, quality(pen))


# --- span metrics: token-position matching gives partial credit -----------
pred = annotation("s1", [(1, 2)])
gold = annotation("s1", [(2, 3)])
scores = span_scores(pred, gold, 10, 10)
print("one-token overlap out of two:")
print(f"  span P={scores.span_precision} R={scores.span_recall} F1={scores.span_f1}")

corpus = corpus_span_scores([
    (annotation("a", [(0, 1)]), annotation("a", [(0, 1)]), 6, 6),
    (annotation("b", [(2, 2)]), annotation("b", [(3, 3)]), 6, 6),
])
print(f"corpus micro-averaged span F1: {corpus.span_f1:.3f}")

# --- correlations with p-values --------------------------------------------
rng = random.Random(42)
gold_q = [rng.random() for _ in range(40)]
pred_q = [min(1.0, max(0.0, g + rng.gauss(0, 0.12))) for g in gold_q]
print("\ncorrelations on 40 noisy quality pairs:")
print(correlations_to_tsv(
    pearson(gold_q, pred_q), spearman(gold_q, pred_q), kendall(gold_q, pred_q),
), end="")

# --- bucket analysis --------------------------------------------------------
print("\nbucket analysis (gold-quality buckets, ** p<0.001, * p<0.05):")
print(bucket_report_to_tsv(bucket_analysis(list(zip(gold_q, pred_q)))), end="")

# --- inter-annotator agreement ---------------------------------------------
rows = []
for i in range(30):
    base = rng.random()
    rows.append((f"s{i}", "rater1", base))
    if i % 2 == 0:
        rows.append((f"s{i}", "rater2", min(1.0, base + rng.gauss(0, 0.2))))
    if i % 3 == 0:
        rows.append((f"s{i}", "rater3", rng.random()))
print("\nagreement between raters sharing segments:")
print(agreement_to_tsv(annotator_agreement(rows)), end="")
