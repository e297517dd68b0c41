"""LLM-generated MQM error annotations for MT quality estimation.

Subpackage map: core (domain types), tokenizer (frozen word tokenization),
prompting (annotation and quiz prompts), llm_gateway (batch driving with a
deterministic mock), annotation_parser (reply repair and validation),
scoring (severity mapping, penalty/quality), eval_metrics (F1, correlations,
buckets, agreement), data_io (TSV/JSONL/CSV), cli (file-based pipeline).
"""

from .core import (
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Segment,
    Severity,
    SeverityScheme,
    Side,
    validate_annotation,
)
from .tokenizer import Token, char_span_of, tokenize

__all__ = [
    "Annotation",
    "ErrorCategory",
    "ErrorSpan",
    "Segment",
    "Severity",
    "SeverityScheme",
    "Side",
    "Token",
    "char_span_of",
    "tokenize",
    "validate_annotation",
]

__version__ = "0.1.0"
