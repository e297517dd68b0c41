"""File ingestion and export: WMT-style gold TSV, annotation JSONL, and the
QE training CSV.

Gold ingestion is total: every input row either contributes to an annotation
or produces a diagnostic on the logger (which the CLI routes to stderr);
nothing is dropped silently. Inline ``<v>...</v>`` markup becomes token
spans via the frozen tokenizer; omission rows read their markup from the
source column, every other category from the target.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import (
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Segment,
    SeverityScheme,
    Side,
    annotation_from_dict,
    annotation_to_dict,
    parse_category,
    parse_severity,
    segment_from_dict,
    segment_to_dict,
)
from .errors import ConfigError, ContractError, DataError
from .scoring import penalty, quality
from .tokenizer import Token, tokenize

logger = logging.getLogger(__name__)

GOLD_COLUMNS = ("system", "doc", "doc_id", "seg_id", "rater", "source", "target", "category", "severity")


@dataclass(frozen=True)
class GoldRecord:
    """One raw gold TSV row, markup still inline."""

    system: str
    doc: str
    doc_id: str
    seg_id: str
    rater: str
    source: str
    target: str
    category: str
    severity: str


@dataclass(frozen=True)
class QETrainingRow:
    src: str
    mt: str
    score: float


_TAG = re.compile(r"</?v>")
_NEWLINES = re.compile(r"[\r\n]+")


def strip_markup(text: str) -> tuple[str, list[tuple[int, int]], bool]:
    """Remove ``<v>...</v>`` tags, returning the clean text, the marked
    character ranges in clean-text coordinates, and whether the tags were
    balanced. Unbalanced markup still returns best-effort clean text."""
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    balanced = True
    depth = 0
    open_at = 0
    out_len = 0
    pos = 0
    for m in _TAG.finditer(text):
        parts.append(text[pos:m.start()])
        out_len += m.start() - pos
        pos = m.end()
        if m.group() == "<v>":
            if depth:
                balanced = False
            depth = 1
            open_at = out_len
        else:
            if not depth:
                balanced = False
            else:
                spans.append((open_at, out_len))
            depth = 0
    if depth:
        balanced = False
    parts.append(text[pos:])
    return "".join(parts), spans, balanced


def collapse_category(raw: str) -> ErrorCategory:
    """Collapse a slash-separated MQM hierarchy string to the seven-value
    typology: accuracy/omission becomes Omission, everything else keeps its
    top-level label, unknown labels become Other."""
    norm = raw.strip().lower()
    head, _, tail = norm.partition("/")
    if head.strip() == "accuracy" and tail.strip().startswith("omission"):
        return ErrorCategory.OMISSION
    category, _ = parse_category(head)
    return category


def _is_no_error(value: str) -> bool:
    return re.sub(r"[\s_-]+", "", value.strip().lower()) in ("noerror", "noissue", "none")


def _covering_tokens(tokens: Sequence[Token], c0: int, c1: int) -> Optional[tuple[int, int]]:
    hits = [k for k, t in enumerate(tokens) if t.char_end > c0 and t.char_start < c1]
    if not hits:
        return None
    return hits[0], hits[-1]


def _clean_cell(text: str, where: str) -> str:
    if _NEWLINES.search(text):
        logger.warning("%s: embedded newline replaced by space", where)
        return _NEWLINES.sub(" ", text)
    return text


def load_gold_tsv(
    path: str | Path,
    lang_pair: tuple[str, str],
    *,
    scheme: SeverityScheme = SeverityScheme.BINARY_LABELS,
    divisor: float = 25.0,
) -> list[tuple[Segment, Annotation]]:
    """Ingest a WMT-format gold TSV into (Segment, Annotation) pairs, one
    annotation per (segment, rater).

    The file must be UTF-8 with a header row naming the columns: system,
    doc, doc_id, seg_id, rater, source, target, category, severity. Rows
    with unbalanced markup or unparsable severity are skipped with a logged
    diagnostic. A row whose category or severity says no-error contributes a
    zero-error annotation. Each ``<v>`` range becomes its own error span.
    """
    src_lang, tgt_lang = lang_pair
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        missing = [c for c in GOLD_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: header lacks columns {missing}")
        col = {name: header.index(name) for name in GOLD_COLUMNS}

        segments: dict[str, Segment] = {}
        token_cache: dict[str, tuple[list[Token], list[Token]]] = {}
        errors: dict[tuple[str, str], list[ErrorSpan]] = {}

        for lineno, row in enumerate(reader, 2):
            where = f"{path}:{lineno}"
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                logger.warning("%s: ragged row (%d of %d columns), skipped", where, len(row), len(header))
                continue
            rec = GoldRecord(*(row[col[c]] for c in GOLD_COLUMNS))

            clean_source, source_spans, src_ok = strip_markup(_clean_cell(rec.source, where))
            clean_target, target_spans, tgt_ok = strip_markup(_clean_cell(rec.target, where))
            if not (src_ok and tgt_ok):
                logger.warning("%s: unbalanced <v> markup, row skipped", where)
                continue

            seg_id = f"{rec.system}#{rec.doc}#{rec.seg_id}"
            if seg_id not in segments:
                segments[seg_id] = Segment(
                    id=seg_id,
                    lang_pair=lang_pair,
                    source=clean_source,
                    target=clean_target,
                    system=rec.system,
                    doc=rec.doc,
                )
                token_cache[seg_id] = (
                    tokenize(clean_source, src_lang),
                    tokenize(clean_target, tgt_lang),
                )
            elif segments[seg_id].source != clean_source or segments[seg_id].target != clean_target:
                logger.warning("%s: segment text differs from first occurrence of %s, keeping first", where, seg_id)

            key = (seg_id, rec.rater)
            errors.setdefault(key, [])

            if _is_no_error(rec.category) or _is_no_error(rec.severity):
                continue
            severity = parse_severity(rec.severity)
            if severity is None:
                logger.warning("%s: unparsable severity %r, row skipped", where, rec.severity)
                continue
            category = collapse_category(rec.category)

            src_tokens, tgt_tokens = token_cache[seg_id]
            if category is ErrorCategory.OMISSION:
                side, spans, tokens, clean = Side.SOURCE, source_spans, src_tokens, clean_source
                if not spans:
                    logger.warning("%s: omission row without source-side markup, row skipped", where)
                    continue
            else:
                side, spans, tokens, clean = Side.TARGET, target_spans, tgt_tokens, clean_target
                if not spans:
                    logger.warning("%s: error row without target-side markup, row skipped", where)
                    continue

            placed = 0
            for c0, c1 in spans:
                token_span = _covering_tokens(tokens, c0, c1)
                if token_span is None:
                    logger.warning("%s: markup covers no tokens (chars %d-%d), span skipped", where, c0, c1)
                    continue
                errors[key].append(ErrorSpan(
                    category=category,
                    severity=severity,
                    marked_text=clean[c0:c1],
                    span=token_span,
                    side=side,
                ))
                placed += 1
            if placed == 0:
                logger.warning("%s: row yielded no usable spans", where)

    out: list[tuple[Segment, Annotation]] = []
    for (seg_id, rater) in sorted(errors):
        spans = errors[(seg_id, rater)]
        pen = penalty(spans)
        out.append((
            segments[seg_id],
            Annotation(
                segment_id=seg_id,
                annotator=rater,
                errors=tuple(spans),
                scheme=scheme,
                penalty=pen,
                quality=quality(pen, divisor=divisor),
            ),
        ))
    return out


# ---------------------------------------------------------------------------
# Annotation / segment JSONL

def write_annotations_jsonl(path: str | Path, annotations: Iterable[Annotation]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write(json.dumps(annotation_to_dict(a), ensure_ascii=False) + "\n")


def read_annotations_jsonl(path: str | Path) -> list[Annotation]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(annotation_from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad annotation line: {exc}") from exc
    return out


def write_segments_jsonl(path: str | Path, segments: Iterable[Segment]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in segments:
            fh.write(json.dumps(segment_to_dict(s), ensure_ascii=False) + "\n")


def read_segments_jsonl(path: str | Path) -> list[Segment]:
    out = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                seg = segment_from_dict(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad segment line: {exc}") from exc
            if seg.id in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate segment id {seg.id!r} (first at line {seen[seg.id]})"
                )
            seen[seg.id] = lineno
            out.append(seg)
    return out


# ---------------------------------------------------------------------------
# QE training data

def segment_quality(
    annotations: Iterable[Annotation],
    mode: str = "average",
) -> dict[str, float]:
    """Reconcile multiple raters into one quality score per segment.

    ``average`` takes the mean over raters; ``first`` keeps only the
    lexicographically first annotator id (a stable stand-in for "first
    rater only").
    """
    if mode not in ("average", "first"):
        raise ConfigError(f"unknown reconciliation mode {mode!r}")
    per_segment: dict[str, list[tuple[str, float]]] = {}
    for a in annotations:
        per_segment.setdefault(a.segment_id, []).append((a.annotator, a.quality))
    out: dict[str, float] = {}
    for seg_id, scored in per_segment.items():
        if mode == "first":
            out[seg_id] = min(scored)[1]
        else:
            out[seg_id] = sum(q for _, q in scored) / len(scored)
    return out


def export_qe_csv(
    annotations: Iterable[Annotation],
    segments: Iterable[Segment],
    path: str | Path,
    *,
    mode: str = "average",
) -> int:
    """Write the src,mt,score training CSV, one row per segment, ordered by
    segment id. Returns the data row count. Raises ContractError naming the
    first annotation whose segment is missing."""
    by_id: dict[str, Segment] = {s.id: s for s in segments}
    annotations = list(annotations)
    for a in annotations:
        if a.segment_id not in by_id:
            raise ContractError(f"annotation references unknown segment {a.segment_id!r}")
    scores = segment_quality(annotations, mode)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "mt", "score"])
        for seg_id in sorted(scores):
            seg = by_id[seg_id]
            writer.writerow([seg.source, seg.target, repr(scores[seg_id])])
    return len(scores)


def read_qe_csv(path: str | Path) -> list[QETrainingRow]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["src", "mt", "score"]:
            raise DataError(f"{path}: expected header src,mt,score, got {header}")
        for lineno, row in enumerate(reader, 2):
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            try:
                score = float(row[2])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad score {row[2]!r}") from exc
            if not (0.0 <= score <= 1.0):
                raise DataError(f"{path}:{lineno}: score {score} outside [0, 1]")
            rows.append(QETrainingRow(src=row[0], mt=row[1], score=score))
    return rows
