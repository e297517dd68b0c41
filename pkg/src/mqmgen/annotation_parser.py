"""Turning raw LLM text into validated annotations.

The pipeline tolerates the formatting variance LLM replies actually show:
prose around the JSON, code fences, wrapper objects, aliased keys, cased
severity labels, and span indices that are off by a few tokens. Every
normalization that changes data is recorded as a repair so nothing is
silently rewritten. A reply only counts as unparsable when no error record
can be interpreted at all; a parse rate over a batch is itself a
model-quality signal, so the parser salvages whatever it defensibly can.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from .core import (
    MAX_ERRORS,
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Segment,
    Severity,
    SeverityScheme,
    Side,
    annotation_from_dict,
    annotation_to_dict,
    fold_for_match,
    parse_category,
    parse_severity,
)
from .errors import ContractError, DataError
from .llm_gateway import RawResponse, ResponseStatus
from .scoring import MappingResult, map_severity, penalty, quality
from .tokenizer import Token, joined_slice, slice_text, tokenize


class ParseStatus(Enum):
    PARSED = "parsed"
    UNPARSABLE = "unparsable"


@dataclass(frozen=True)
class RepairRecord:
    """One normalization applied while parsing: what kind, from what, to what."""

    kind: str
    original: Optional[str]
    resolved: Optional[str]


@dataclass(frozen=True)
class ParseOutcome:
    segment_id: str
    status: ParseStatus
    annotation: Optional[Annotation]
    repairs: tuple[RepairRecord, ...]


# ---------------------------------------------------------------------------
# JSON extraction

_JSON_START = re.compile(r"[\[{]")

_KEY_ALIASES = {
    "error type": "category",
    "error category": "category",
    "type": "category",
    "category": "category",
    "marked text": "marked_text",
    "marked_text": "marked_text",
    "marked": "marked_text",
    "text": "marked_text",
    "error span index": "span",
    "error span indices": "span",
    "error span": "span",
    "span index": "span",
    "span": "span",
    "index": "span",
    "indices": "span",
    "severity": "severity",
    "severity label": "severity",
    "severity scale": "severity",
    "severity score": "severity",
    "explanation": "explanation",
    "reason": "explanation",
    "start": "start",
    "end": "end",
}

_RECORD_KEYS = {"category", "marked_text", "span", "severity"}


def _normalize_key(key: str) -> str:
    return re.sub(r"\s+", " ", key.strip().lower().replace("_", " ").replace("-", " "))


def _normalize_record(rec: Mapping[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in rec.items():
        canonical = _KEY_ALIASES.get(_normalize_key(str(key)))
        if canonical is not None and canonical not in out:
            out[canonical] = value
    return out


def _looks_like_record(value: Any) -> bool:
    if not isinstance(value, Mapping):
        return False
    return bool(_RECORD_KEYS & set(_normalize_record(value)))


def _first_json_value(text: str) -> Optional[Any]:
    decoder = json.JSONDecoder()
    for m in _JSON_START.finditer(text):
        try:
            value, _ = decoder.raw_decode(text, m.start())
            return value
        except ValueError:
            continue
    return None


def _coerce_records(value: Any) -> Optional[list[dict]]:
    if isinstance(value, list):
        if not value:
            return []
        dicts = [v for v in value if isinstance(v, Mapping)]
        if any(_looks_like_record(d) for d in dicts):
            return [dict(d) for d in dicts]
        return None
    if isinstance(value, Mapping):
        if _looks_like_record(value):
            return [dict(value)]
        lists = [v for v in value.values() if isinstance(v, list)]
        if len(lists) == 1:
            return _coerce_records(lists[0])
        dicts = [v for v in value.values() if isinstance(v, Mapping)]
        if dicts and len(dicts) == len(value) and all(_looks_like_record(d) for d in dicts):
            return [dict(d) for d in dicts]
    return None


def extract_json(raw_text: str) -> Optional[list[dict]]:
    """Locate the first parseable JSON value in the text and normalize it
    into a list of error records.

    Code fences and surrounding prose are skipped by construction: scanning
    starts at every "{" or "[" until one parses. A single error object, an
    array of them, and one wrapper object around such an array are all
    accepted. An explicit empty list means "no errors found" and returns [].
    None means no usable JSON was present.
    """
    value = _first_json_value(raw_text)
    if value is None:
        return None
    return _coerce_records(value)


# ---------------------------------------------------------------------------
# Span reconciliation

_INT = re.compile(r"-?\d+")


def _parse_span_value(value: Any) -> Optional[tuple[int, int]]:
    if isinstance(value, Mapping):
        norm = {_normalize_key(str(k)): v for k, v in value.items()}
        start = norm.get("start")
        end = norm.get("end", start)
        try:
            return int(start), int(end)
        except (TypeError, ValueError):
            return None
    if isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            return int(value[0]), int(value[1])
        except (TypeError, ValueError):
            return None
    if isinstance(value, (int, float)) and float(value).is_integer():
        return int(value), int(value)
    if isinstance(value, str):
        ints = _INT.findall(value)
        if len(ints) == 1:
            return int(ints[0]), int(ints[0])
        if len(ints) >= 2:
            return int(ints[0]), int(ints[1])
    return None


def _reported_span(rec: Mapping[str, Any]) -> Optional[tuple[int, int]]:
    if "span" in rec:
        span = _parse_span_value(rec["span"])
        if span is not None:
            return span
    if "start" in rec:
        return _parse_span_value({"start": rec.get("start"), "end": rec.get("end", rec.get("start"))})
    return None


def _occurrences(needle: str, tokens: Sequence[Token]) -> list[tuple[int, int]]:
    """Every token span whose folded joined text equals the folded needle."""
    occs = []
    budget = len(needle) + 32
    for i in range(len(tokens)):
        parts: list[str] = []
        for j in range(i, len(tokens)):
            if j > i and tokens[j].char_start > tokens[j - 1].char_end:
                parts.append(" ")
            parts.append(tokens[j].text)
            joined = "".join(parts)
            if len(joined) > budget:
                break
            if fold_for_match(joined) == needle:
                occs.append((i, j))
    return occs


def _char_fallback(needle: str, tokens: Sequence[Token]) -> list[tuple[int, int]]:
    """Find the needle as a character substring of the token stream and map
    each hit back to the covering token span."""
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for k, tok in enumerate(tokens):
        if k > 0 and tok.char_start > tokens[k - 1].char_end:
            parts.append(" ")
            pos += 1
        parts.append(tok.text)
        spans.append((pos, pos + len(tok.text)))
        pos += len(tok.text)
    hay = "".join(parts)
    hay_cf = hay.casefold()
    if len(hay_cf) != len(hay):
        hay_cf = hay.lower()
    if len(hay_cf) != len(hay):
        hay_cf = hay

    out: list[tuple[int, int]] = []
    idx = hay_cf.find(needle)
    while idx != -1:
        lo, hi = idx, idx + len(needle)
        first = next((k for k, (_, e) in enumerate(spans) if e > lo), None)
        last = max((k for k, (s, _) in enumerate(spans) if s < hi), default=None)
        if first is not None and last is not None and first <= last:
            span = (first, last)
            if span not in out:
                out.append(span)
        idx = hay_cf.find(needle, idx + 1)
    return out


def _closest(occs: Sequence[tuple[int, int]], reported: Optional[tuple[int, int]]) -> tuple[int, int]:
    if reported is None:
        return occs[0]
    if reported in occs:
        return reported
    rs, re_ = reported
    return min(occs, key=lambda o: (abs(o[0] - rs) + abs(o[1] - re_), o[0], o[1]))


def reconcile_span(
    marked_text: str,
    reported_span: Optional[tuple[int, int]],
    tokens: Sequence[Token],
) -> Optional[tuple[int, int]]:
    """Resolve a claimed error span against the actual token sequence.

    Every occurrence of the marked text as a contiguous token subsequence is
    enumerated (comparison folds case and edge punctuation). The reported
    span is returned unchanged when it already matches an occurrence;
    otherwise the occurrence minimizing the L1 distance between the span
    endpoints wins, with exact ties broken by the earliest occurrence. When
    no token-level occurrence exists, a character-substring search maps the
    text back to covering tokens. None means the text cannot be located.

    Feeding a resolved span back in returns it unchanged (idempotence).
    """
    if not tokens:
        return None
    needle = fold_for_match(marked_text)
    if not needle:
        return None
    occs = _occurrences(needle, tokens)
    if not occs:
        occs = _char_fallback(needle, tokens)
    if not occs:
        return None
    return _closest(occs, reported_span)


# ---------------------------------------------------------------------------
# Assembly

def _parse_scale(value: Any) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        scale = value
    elif isinstance(value, float) and value.is_integer():
        scale = int(value)
    elif isinstance(value, str):
        m = _INT.search(value)
        if m is None:
            return None
        scale = int(m.group())
    else:
        return None
    return scale if scale in (1, 2, 3, 4, 5) else None


def _clamp_span(span: tuple[int, int], n_tokens: int) -> tuple[int, int]:
    start = min(max(span[0], 0), n_tokens - 1)
    end = max(start, min(span[1], n_tokens - 1))
    return start, end


def assemble(
    records: Sequence[Mapping[str, Any]],
    segment: Segment,
    scheme: SeverityScheme,
    annotator: str,
    *,
    divisor: float = 25.0,
) -> ParseOutcome:
    """Build a validated Annotation from extracted error records.

    Categories and severities are normalized, spans reconciled against the
    tokenized sentence (omissions against the source side), and the error
    list capped at the first five. Records missing both a marked text and a
    span are dropped with a repair note. The outcome is unparsable only when
    the reply contained records but none could be interpreted; an explicit
    empty list, or records that all map to scale discards, still parse to a
    zero-error annotation.
    """
    src_lang, tgt_lang = segment.lang_pair
    tokens = {
        Side.TARGET: tokenize(segment.target, tgt_lang),
        Side.SOURCE: tokenize(segment.source, src_lang),
    }
    texts = {Side.TARGET: segment.target, Side.SOURCE: segment.source}

    repairs: list[RepairRecord] = []
    kept: list[ErrorSpan] = []
    interpreted = 0

    def note(kind: str, original: Any = None, resolved: Any = None) -> None:
        repairs.append(RepairRecord(
            kind,
            None if original is None else str(original),
            None if resolved is None else str(resolved),
        ))

    for rec in records:
        if not _looks_like_record(rec):
            note("record_unrecognized", json.dumps(rec, ensure_ascii=False)[:120])
            continue
        fields = _normalize_record(rec)

        raw_cat = fields.get("category")
        if raw_cat is None:
            category = ErrorCategory.OTHER
            note("category_missing", None, ErrorCategory.OTHER.value)
        else:
            category, known = parse_category(str(raw_cat))
            if not known:
                note("category_unknown", raw_cat, category.value)

        raw_scale: Optional[int] = None
        raw_sev = fields.get("severity")
        if scheme is SeverityScheme.BINARY_LABELS:
            severity = parse_severity(str(raw_sev)) if raw_sev is not None else None
            if severity not in (Severity.MAJOR, Severity.MINOR):
                note("severity_unparsable", raw_sev)
                continue
        else:
            scale = _parse_scale(raw_sev)
            if scale is None:
                note("severity_unparsable", raw_sev)
                continue
            mapped = map_severity(scale, scheme)
            if mapped is MappingResult.DISCARD:
                interpreted += 1
                note("severity_discarded", scale)
                continue
            severity = Severity.MAJOR if mapped is MappingResult.MAJOR else Severity.MINOR
            raw_scale = scale

        marked_raw = fields.get("marked_text")
        marked = str(marked_raw).strip() if marked_raw is not None else ""
        reported = _reported_span(fields)
        if not marked and reported is None:
            note("record_incomplete", json.dumps(rec, ensure_ascii=False)[:120])
            continue

        side = Side.SOURCE if category is ErrorCategory.OMISSION else Side.TARGET
        side_tokens = tokens[side]
        side_text = texts[side]
        if side is Side.SOURCE:
            note("omission_source_side", marked or reported)

        if marked:
            resolved = reconcile_span(marked, reported, side_tokens)
            if resolved is not None:
                if reported is None:
                    note("span_from_text", None, resolved)
                elif resolved != reported:
                    note("span_repaired", reported, resolved)
                span = resolved
                final_marked = marked
            elif reported is not None:
                span = _clamp_span(reported, len(side_tokens))
                if span != reported:
                    note("span_clamped", reported, span)
                final_marked = slice_text(side_text, side_tokens, *span)
                note("marked_text_unlocated", marked, final_marked)
            else:
                note("span_unresolvable", marked)
                continue
        else:
            span = _clamp_span(reported, len(side_tokens))
            if span != reported:
                note("span_clamped", reported, span)
            final_marked = slice_text(side_text, side_tokens, *span)
            note("marked_text_from_span", None, final_marked)

        # Emitted annotations must satisfy the core invariants even when the
        # span came from a character-level fallback.
        covered = fold_for_match(joined_slice(side_tokens, *span))
        if fold_for_match(final_marked) and fold_for_match(final_marked) not in covered:
            replacement = slice_text(side_text, side_tokens, *span)
            note("marked_text_adjusted", final_marked, replacement)
            final_marked = replacement

        explanation_raw = fields.get("explanation")
        explanation = str(explanation_raw) if explanation_raw is not None else None
        interpreted += 1
        kept.append(ErrorSpan(
            category=category,
            severity=severity,
            marked_text=final_marked,
            span=span,
            side=side,
            raw_scale=raw_scale,
            explanation=explanation,
        ))

    if len(kept) > MAX_ERRORS:
        note("errors_truncated", len(kept), MAX_ERRORS)
        kept = kept[:MAX_ERRORS]

    if not kept and records and interpreted == 0:
        return ParseOutcome(segment.id, ParseStatus.UNPARSABLE, None, tuple(repairs))

    pen = penalty(kept)
    annotation = Annotation(
        segment_id=segment.id,
        annotator=annotator,
        errors=tuple(kept),
        scheme=scheme,
        penalty=pen,
        quality=quality(pen, divisor=divisor),
    )
    return ParseOutcome(segment.id, ParseStatus.PARSED, annotation, tuple(repairs))


def annotator_id(response: RawResponse) -> str:
    if response.system_fingerprint:
        return f"{response.model}:{response.system_fingerprint}"
    return response.model


def parse_response(
    response: RawResponse,
    segment: Segment,
    scheme: SeverityScheme,
    *,
    divisor: float = 25.0,
) -> ParseOutcome:
    """Full per-response parse: transport check, JSON extraction, assembly."""
    if response.segment_id != segment.id:
        raise ContractError(
            f"response for {response.segment_id!r} parsed against segment {segment.id!r}"
        )
    if response.status is not ResponseStatus.OK:
        return ParseOutcome(
            segment.id, ParseStatus.UNPARSABLE, None,
            (RepairRecord("transport", response.status.value, None),),
        )
    records = extract_json(response.raw_text)
    if records is None:
        return ParseOutcome(
            segment.id, ParseStatus.UNPARSABLE, None,
            (RepairRecord("no_json_found", None, None),),
        )
    return assemble(records, segment, scheme, annotator_id(response), divisor=divisor)


def parse_batch(
    responses: Iterable[RawResponse],
    segments: Mapping[str, Segment],
    scheme: SeverityScheme,
    *,
    divisor: float = 25.0,
) -> list[ParseOutcome]:
    out = []
    for response in responses:
        segment = segments.get(response.segment_id)
        if segment is None:
            raise ContractError(f"no segment {response.segment_id!r} for ledger response")
        out.append(parse_response(response, segment, scheme, divisor=divisor))
    return out


# ---------------------------------------------------------------------------
# Outcome JSONL

def outcome_to_dict(o: ParseOutcome) -> dict:
    return {
        "segment_id": o.segment_id,
        "status": o.status.value,
        "annotation": None if o.annotation is None else annotation_to_dict(o.annotation),
        "repairs": [
            {"kind": r.kind, "original": r.original, "resolved": r.resolved}
            for r in o.repairs
        ],
    }


def outcome_from_dict(d: dict) -> ParseOutcome:
    ann = d.get("annotation")
    return ParseOutcome(
        segment_id=d["segment_id"],
        status=ParseStatus(d["status"]),
        annotation=None if ann is None else annotation_from_dict(ann),
        repairs=tuple(
            RepairRecord(r["kind"], r.get("original"), r.get("resolved"))
            for r in d.get("repairs", ())
        ),
    )


def write_outcomes_jsonl(path: str | Path, outcomes: Iterable[ParseOutcome]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for o in outcomes:
            fh.write(json.dumps(outcome_to_dict(o), ensure_ascii=False) + "\n")


def read_outcomes_jsonl(path: str | Path) -> list[ParseOutcome]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(outcome_from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad outcome line: {exc}") from exc
    return out
