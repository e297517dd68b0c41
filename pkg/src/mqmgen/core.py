"""Domain types shared by the whole pipeline.

Types are immutable value objects. Validation is deliberately separate from
construction: invalid annotations must be representable so that
``validate_annotation`` can report their problems as data instead of refusing
to build them.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

from .tokenizer import joined_slice, tokenize

MAX_ERRORS = 5
DEFAULT_DIVISOR = 25.0  # 5 errors x weight 5, the cap implied by the prompt


class ErrorCategory(Enum):
    ACCURACY = "accuracy"
    OMISSION = "omission"
    FLUENCY = "fluency"
    STYLE = "style"
    TERMINOLOGY = "terminology"
    LOCALE_CONVENTION = "locale_convention"
    OTHER = "other"


class Severity(Enum):
    MAJOR = "major"
    MINOR = "minor"
    NEUTRAL = "neutral"  # ingested human gold only, never mapped model output


class Side(Enum):
    TARGET = "target"
    SOURCE = "source"


class SeverityScheme(Enum):
    BINARY_LABELS = "binary"  # prompt asks for major/minor directly
    SCALE_M13 = "m13"         # 1-5 scale, 1-3 -> Minor, 4-5 -> Major
    SCALE_M3 = "m3"           # 1-5 scale, 1-2 dropped, 3 -> Minor, 4-5 -> Major


_CATEGORY_ALIASES = {
    "accuracy": ErrorCategory.ACCURACY,
    "omission": ErrorCategory.OMISSION,
    "fluency": ErrorCategory.FLUENCY,
    "style": ErrorCategory.STYLE,
    "terminology": ErrorCategory.TERMINOLOGY,
    "locale convention": ErrorCategory.LOCALE_CONVENTION,
    "other": ErrorCategory.OTHER,
}

_WS = re.compile(r"\s+")


def _normalize_label(text: str) -> str:
    return _WS.sub(" ", text.strip().lower().replace("_", " ").replace("-", " "))


def parse_category(text: str) -> tuple[ErrorCategory, bool]:
    """Map an arbitrary category string onto the seven-value typology.

    Case, surrounding whitespace, and underscore/hyphen/space variation are
    all tolerated ("Locale_Convention" == "locale convention"). Anything
    outside the set maps to Other; the second element reports whether the
    input was recognized, so callers can record a warning.
    """
    cat = _CATEGORY_ALIASES.get(_normalize_label(text))
    if cat is None:
        return ErrorCategory.OTHER, False
    return cat, True


def parse_severity(text: str) -> Optional[Severity]:
    """Parse a major/minor/neutral label, case-insensitively. None if unknown."""
    try:
        return Severity(_normalize_label(text))
    except ValueError:
        return None


def parse_scheme(text: str) -> SeverityScheme:
    return SeverityScheme(text.strip().lower())


def parse_lang_pair(text: str) -> tuple[str, str]:
    """Parse "zh-en" / "zh->en" / "zh_en" into a (source, target) code pair."""
    parts = re.split(r"->|[-_:]", text.strip().lower())
    if len(parts) != 2 or not all(parts):
        raise ValueError(f"cannot parse language pair from {text!r}")
    return parts[0], parts[1]


@dataclass(frozen=True)
class Segment:
    """One source/target sentence pair, the unit of annotation."""

    id: str
    lang_pair: tuple[str, str]
    source: str
    target: str
    system: Optional[str] = None
    doc: Optional[str] = None


def segment_violations(seg: Segment) -> list[str]:
    """Check Segment invariants; returns human-readable problems, [] if fine."""
    problems = []
    if not seg.id:
        problems.append("empty segment id")
    if not seg.source.strip():
        problems.append("empty source text")
    if not seg.target.strip():
        problems.append("empty target text")
    if len(seg.lang_pair) != 2 or seg.lang_pair[0] == seg.lang_pair[1]:
        problems.append(f"bad language pair {seg.lang_pair!r}")
    return problems


@dataclass(frozen=True)
class ErrorSpan:
    """One marked error: category, severity, the quoted text, and the
    inclusive token span on the sentence named by ``side``."""

    category: ErrorCategory
    severity: Severity
    marked_text: str
    span: tuple[int, int]
    side: Side = Side.TARGET
    raw_scale: Optional[int] = None
    explanation: Optional[str] = None


@dataclass(frozen=True)
class Annotation:
    """All errors one annotator marked on one segment, with derived scores."""

    segment_id: str
    annotator: str
    errors: tuple[ErrorSpan, ...]
    scheme: SeverityScheme
    penalty: float
    quality: float


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_annotation."""

    kind: str
    message: str

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return f"{self.kind}: {self.message}"


SPAN_OUT_OF_BOUNDS = "SpanOutOfBounds"
SIDE_CATEGORY_MISMATCH = "SideCategoryMismatch"
MARKED_TEXT_MISMATCH = "MarkedTextMismatch"
RAW_SCALE_OUT_OF_RANGE = "RawScaleOutOfRange"
TOO_MANY_ERRORS = "TooManyErrors"
PENALTY_MISMATCH = "PenaltyMismatch"
QUALITY_MISMATCH = "QualityMismatch"


def fold_for_match(text: str) -> str:
    """Normalize text for marked-text comparison: trim, strip leading and
    trailing punctuation, case-fold, collapse whitespace runs.

    A mark that is nothing but punctuation (a comma-splice error marks ",")
    survives: punctuation stripping only applies when something remains.
    """
    t = text.strip()
    i, j = 0, len(t)
    while i < j and unicodedata.category(t[i]).startswith("P"):
        i += 1
    while j > i and unicodedata.category(t[j - 1]).startswith("P"):
        j -= 1
    stripped = t[i:j].strip()
    if stripped:
        t = stripped
    return _WS.sub(" ", t.casefold())


def validate_annotation(
    a: Annotation,
    seg: Segment,
    *,
    max_errors: Optional[int] = MAX_ERRORS,
    divisor: float = DEFAULT_DIVISOR,
) -> list[Violation]:
    """Return every invariant violation in ``a`` against its segment.

    An empty list means the annotation is valid. Violations are data, not
    failures; only the precondition ``seg.id == a.segment_id`` raises.

    The marked-text check accepts the folded marked text as a substring of
    the folded token slice: spans recovered by character-level search cover
    whole tokens and may legitimately include more than the marked text.
    """
    from .errors import ContractError
    from .scoring import penalty as penalty_of, quality as quality_of

    if seg.id != a.segment_id:
        raise ContractError(f"annotation for {a.segment_id!r} validated against segment {seg.id!r}")

    src_lang, tgt_lang = seg.lang_pair
    tokens = {
        Side.TARGET: tokenize(seg.target, tgt_lang),
        Side.SOURCE: tokenize(seg.source, src_lang),
    }
    out: list[Violation] = []
    if max_errors is not None and len(a.errors) > max_errors:
        out.append(Violation(TOO_MANY_ERRORS, f"{len(a.errors)} errors exceed the cap of {max_errors}"))
    for idx, err in enumerate(a.errors):
        side_tokens = tokens[err.side]
        start, end = err.span
        if err.category is ErrorCategory.OMISSION:
            if err.side is not Side.SOURCE:
                out.append(Violation(SIDE_CATEGORY_MISMATCH, f"error {idx}: omission must mark the source side"))
        elif err.side is not Side.TARGET:
            out.append(Violation(SIDE_CATEGORY_MISMATCH, f"error {idx}: {err.category.value} must mark the target side"))
        if not (0 <= start <= end < len(side_tokens)):
            out.append(Violation(
                SPAN_OUT_OF_BOUNDS,
                f"error {idx}: span ({start}, {end}) out of range for {len(side_tokens)} {err.side.value} tokens",
            ))
        else:
            marked = fold_for_match(err.marked_text)
            covered = fold_for_match(joined_slice(side_tokens, start, end))
            if marked and marked not in covered:
                out.append(Violation(
                    MARKED_TEXT_MISMATCH,
                    f"error {idx}: marked text {err.marked_text!r} not found in span text {covered!r}",
                ))
        if err.raw_scale is not None and err.raw_scale not in (1, 2, 3, 4, 5):
            out.append(Violation(RAW_SCALE_OUT_OF_RANGE, f"error {idx}: raw scale {err.raw_scale} outside 1-5"))
    expected_penalty = penalty_of(a.errors)
    if a.penalty != expected_penalty:
        out.append(Violation(PENALTY_MISMATCH, f"penalty {a.penalty} != recomputed {expected_penalty}"))
    else:
        expected_quality = quality_of(expected_penalty, divisor=divisor)
        if a.quality != expected_quality:
            out.append(Violation(QUALITY_MISMATCH, f"quality {a.quality} != recomputed {expected_quality}"))
    return out


# ---------------------------------------------------------------------------
# Canonical JSON representation (one object per line on disk).

def error_to_dict(err: ErrorSpan) -> dict[str, Any]:
    return {
        "category": err.category.value,
        "severity": err.severity.value,
        "raw_scale": err.raw_scale,
        "marked_text": err.marked_text,
        "span": {"start": err.span[0], "end": err.span[1]},
        "side": err.side.value,
        "explanation": err.explanation,
    }


def error_from_dict(d: dict[str, Any]) -> ErrorSpan:
    cat, _ = parse_category(d["category"])
    sev = parse_severity(d["severity"])
    if sev is None:
        raise ValueError(f"bad severity {d['severity']!r}")
    raw = d.get("raw_scale")
    return ErrorSpan(
        category=cat,
        severity=sev,
        marked_text=d["marked_text"],
        span=(int(d["span"]["start"]), int(d["span"]["end"])),
        side=Side(d.get("side", "target")),
        raw_scale=None if raw is None else int(raw),
        explanation=d.get("explanation"),
    )


def annotation_to_dict(a: Annotation) -> dict[str, Any]:
    return {
        "segment_id": a.segment_id,
        "annotator": a.annotator,
        "scheme": a.scheme.value,
        "errors": [error_to_dict(e) for e in a.errors],
        "penalty": a.penalty,
        "quality": a.quality,
    }


def annotation_from_dict(d: dict[str, Any]) -> Annotation:
    return Annotation(
        segment_id=d["segment_id"],
        annotator=d["annotator"],
        errors=tuple(error_from_dict(e) for e in d["errors"]),
        scheme=parse_scheme(d["scheme"]),
        penalty=float(d["penalty"]),
        quality=float(d["quality"]),
    )


def encode_annotation(a: Annotation) -> str:
    return json.dumps(annotation_to_dict(a), ensure_ascii=False)


def decode_annotation(line: str) -> Annotation:
    return annotation_from_dict(json.loads(line))


def segment_to_dict(seg: Segment) -> dict[str, Any]:
    return {
        "id": seg.id,
        "lang_pair": f"{seg.lang_pair[0]}-{seg.lang_pair[1]}",
        "source": seg.source,
        "target": seg.target,
        "system": seg.system,
        "doc": seg.doc,
    }


def segment_from_dict(d: dict[str, Any]) -> Segment:
    return Segment(
        id=d["id"],
        lang_pair=parse_lang_pair(d["lang_pair"]),
        source=d["source"],
        target=d["target"],
        system=d.get("system"),
        doc=d.get("doc"),
    )
