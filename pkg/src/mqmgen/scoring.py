"""Severity mapping and penalty/quality score derivation.

Major errors weigh 5, minor errors 1, neutral 0. A segment's quality score
is its penalty normalized into [0, 1] against a cap of 25 (five errors at
the maximum weight); the divisor is configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .core import (
    DEFAULT_DIVISOR,
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Severity,
    SeverityScheme,
)
from .errors import ConfigError, ContractError

SEVERITY_WEIGHTS = {
    Severity.MAJOR: 5.0,
    Severity.MINOR: 1.0,
    Severity.NEUTRAL: 0.0,
}


class MappingResult(Enum):
    MAJOR = "major"
    MINOR = "minor"
    DISCARD = "discard"


def map_severity(raw_scale: int, scheme: SeverityScheme) -> MappingResult:
    """Map a 1-5 severity score onto major/minor/discard.

    The lenient mapping turns 1-3 into Minor; the strict one drops 1-2 and
    keeps only 3 as Minor. Both treat 4-5 as Major.
    """
    if scheme is SeverityScheme.BINARY_LABELS:
        raise ConfigError("binary-label annotations carry no 1-5 scale to map")
    if raw_scale not in (1, 2, 3, 4, 5):
        raise ValueError(f"raw severity scale {raw_scale!r} outside 1-5")
    if raw_scale >= 4:
        return MappingResult.MAJOR
    if scheme is SeverityScheme.SCALE_M13:
        return MappingResult.MINOR
    return MappingResult.MINOR if raw_scale == 3 else MappingResult.DISCARD


def penalty(errors: Iterable[ErrorSpan]) -> float:
    """Weighted error sum: major 5, minor 1, neutral 0."""
    return float(sum(SEVERITY_WEIGHTS[e.severity] for e in errors))


def quality(penalty_value: float, *, divisor: float = DEFAULT_DIVISOR) -> float:
    """Normalize a penalty into [0, 1]: 1 is error-free, 0 is at or past the cap."""
    if penalty_value < 0:
        raise ContractError(f"negative penalty {penalty_value}")
    if divisor <= 0:
        raise ConfigError(f"quality divisor must be positive, got {divisor}")
    return 1.0 - min(penalty_value, divisor) / divisor


@dataclass(frozen=True)
class AnnotatorStats:
    """Per-annotator error profile over a set of segments."""

    annotator: str
    segments: int
    avg_errors: float
    major_minor_ratio: float  # math.inf marks an undefined ratio (no minors)
    category_counts: dict[ErrorCategory, int]
    major_count: int
    minor_count: int
    neutral_count: int


def error_stats(annotations: Iterable[Annotation]) -> list[AnnotatorStats]:
    """Average error counts, major/minor ratio, and per-category counts for
    each annotator, sorted by annotator id. Averages include zero-error
    segments; the ratio is reported as infinity when there are no minors."""
    by_annotator: dict[str, list[Annotation]] = {}
    for a in annotations:
        by_annotator.setdefault(a.annotator, []).append(a)
    out = []
    for name in sorted(by_annotator):
        anns = by_annotator[name]
        counts = {cat: 0 for cat in ErrorCategory}
        sev = {Severity.MAJOR: 0, Severity.MINOR: 0, Severity.NEUTRAL: 0}
        total_errors = 0
        for a in anns:
            total_errors += len(a.errors)
            for e in a.errors:
                counts[e.category] += 1
                sev[e.severity] += 1
        ratio = (
            sev[Severity.MAJOR] / sev[Severity.MINOR]
            if sev[Severity.MINOR]
            else math.inf
        )
        out.append(AnnotatorStats(
            annotator=name,
            segments=len(anns),
            avg_errors=total_errors / len(anns),
            major_minor_ratio=ratio,
            category_counts=counts,
            major_count=sev[Severity.MAJOR],
            minor_count=sev[Severity.MINOR],
            neutral_count=sev[Severity.NEUTRAL],
        ))
    return out


def stats_to_tsv(stats: list[AnnotatorStats]) -> str:
    """Render annotator statistics as TSV (one row per annotator)."""
    cats = list(ErrorCategory)
    header = ["annotator", "segments", "avg_errors", "major_minor_ratio"]
    header += [c.value for c in cats]
    lines = ["\t".join(header)]
    for s in stats:
        ratio = "inf" if math.isinf(s.major_minor_ratio) else f"{s.major_minor_ratio:.4f}"
        row = [s.annotator, str(s.segments), f"{s.avg_errors:.4f}", ratio]
        row += [str(s.category_counts[c]) for c in cats]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def stats_to_json(stats: list[AnnotatorStats]) -> list[dict]:
    out = []
    for s in stats:
        out.append({
            "annotator": s.annotator,
            "segments": s.segments,
            "avg_errors": s.avg_errors,
            "major_minor_ratio": None if math.isinf(s.major_minor_ratio) else s.major_minor_ratio,
            "category_counts": {c.value: n for c, n in s.category_counts.items()},
            "major_count": s.major_count,
            "minor_count": s.minor_count,
            "neutral_count": s.neutral_count,
        })
    return out
