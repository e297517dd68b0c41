"""Prompt construction for error annotation and the MQM knowledge quiz.

Prompt texts live as template files next to this module so they can be
audited and extended per language pair without touching code. Placeholders
use {{name}} markers; rendering is pure, so identical inputs always yield
byte-identical prompts.

Three annotation templates ship: the standard zero-shot prompt (tokenizer
index instruction), a basic zero-shot variant (whitespace index instruction,
kept for stability comparisons), and the few-shot prompt with per-category
explanations and a 1-5 severity scale.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Sequence

from .core import MAX_ERRORS, Segment, SeverityScheme, segment_violations
from .errors import ConfigError

LANGUAGE_NAMES = {
    "zh": "Chinese",
    "en": "English",
    "de": "German",
    "fr": "French",
    "es": "Spanish",
    "it": "Italian",
    "pt": "Portuguese",
    "nl": "Dutch",
    "ru": "Russian",
    "ja": "Japanese",
    "ko": "Korean",
    "cs": "Czech",
    "pl": "Polish",
    "uk": "Ukrainian",
    "tr": "Turkish",
    "ar": "Arabic",
    "hi": "Hindi",
}


class PromptMode(Enum):
    ZERO_SHOT = "zero"
    FEW_SHOT = "few"
    QUIZ = "quiz"


@dataclass(frozen=True)
class FewShotExample:
    """One worked example: a segment pair plus its rendered error lines."""

    source: str
    target: str
    error_lines: tuple[str, ...]


@dataclass(frozen=True)
class PromptTemplate:
    mode: PromptMode
    system_message: str
    instruction: str
    examples: tuple[FewShotExample, ...]
    scheme: SeverityScheme
    max_errors: int = MAX_ERRORS


@dataclass(frozen=True)
class RenderedPrompt:
    """A ready-to-send chat request tied back to its segment."""

    segment_id: str
    system: str
    user: str

    def messages(self) -> list[dict[str, str]]:
        return [
            {"role": "system", "content": self.system},
            {"role": "user", "content": self.user},
        ]


# The two worked zh-en examples shipped with the few-shot prompt: a comma
# splice (fluency, severity 2) and a tense mistranslation plus an omission
# whose marked text comes from the source sentence (severities 4 and 4).
DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN = (
    FewShotExample(
        source="产品特价的时候购买,价格不低,看评论也是很不错的产品。",
        target=(
            "I bought it when the product was on sale, the price is not low, "
            "and it is also a very good product after reading the reviews."
        ),
        error_lines=(
            "Error 1: error type: fluency, severity: 2, marked text:, , error span index: {start: 9, end: 9}",
        ),
    ),
    FewShotExample(
        source="用了很久,除了低音出不来,总体还不错。",
        target="I tried to use it for a long time, but all sounded good except for the bass.",
        error_lines=(
            "Error 1: error type: accuracy, severity: 4, marked text: tried to, error span index: {start: 1, end: 2}",
            "Error 2: error type: omission; severity: 4, marked text: 出不来, error span index: {start: 10, end: 10}",
        ),
    ),
)

QUIZ_QUESTIONS = (
    "Can you explain what machine translation quality estimation is in 100 words?",
    "Could you provide an overview of the Multidimensional Quality Metrics (MQM) "
    "annotation scheme in around 100 words?",
    "What are the core error categories of MQM?",
    "How can I effectively evaluate the {{src_name}} sentence and its {{tgt_name}} "
    "translation using the MQM annotation scheme? Provide a concise response "
    "within 100 words, please.",
    "How would you, as a language model, annotate the translation of a Chinese "
    "source sentence into English using the MQM scheme? Please provide an example.",
)

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")
_SEVERITY_LINE = re.compile(r"severity\s*[:=]?\s*([1-5])\b")


def language_name(code: str) -> str:
    name = LANGUAGE_NAMES.get(code.lower())
    if name is None:
        raise ConfigError(f"unsupported language code {code!r}")
    return name


def _render(template: str, values: dict[str, str]) -> str:
    def sub(m: re.Match) -> str:
        key = m.group(1)
        if key not in values:
            raise ConfigError(f"template placeholder {{{{{key}}}}} has no value")
        return values[key]

    return _PLACEHOLDER.sub(sub, template)


def _load_template(name: str) -> tuple[str, str]:
    text = resources.files("mqmgen.templates").joinpath(f"{name}.txt").read_text("utf-8")
    system, sep, instruction = text.partition("\n---\n")
    if not sep:
        raise ConfigError(f"template {name!r} is missing the system/instruction separator")
    return system.strip(), instruction.strip()


def _check_segment(lang_pair: tuple[str, str], segment: Segment) -> None:
    if tuple(segment.lang_pair) != tuple(lang_pair):
        raise ConfigError(
            f"segment {segment.id!r} is {segment.lang_pair!r}, prompt is for {lang_pair!r}"
        )
    problems = segment_violations(segment)
    if problems:
        raise ConfigError(f"segment {segment.id!r}: " + "; ".join(problems))


def build_zero_shot(
    lang_pair: tuple[str, str],
    segment: Segment,
    *,
    variant: str = "standard",
) -> RenderedPrompt:
    """Render the zero-shot annotation prompt (binary major/minor labels).

    ``variant="basic"`` selects the whitespace-index wording kept for the
    prompt-stability comparison.
    """
    _check_segment(lang_pair, segment)
    names = {"src_name": language_name(lang_pair[0]), "tgt_name": language_name(lang_pair[1])}
    template = {"standard": "zero_shot", "basic": "zero_shot_basic"}.get(variant)
    if template is None:
        raise ConfigError(f"unknown zero-shot variant {variant!r}")
    system, instruction = _load_template(template)
    values = dict(names, source=segment.source, target=segment.target)
    return RenderedPrompt(segment.id, _render(system, values), _render(instruction, values))


def _validate_example(ex: FewShotExample) -> None:
    if not ex.source.strip() or not ex.target.strip():
        raise ConfigError("few-shot example with empty source or target")
    if not ex.error_lines:
        raise ConfigError("few-shot example without error lines")
    for line in ex.error_lines:
        if not _SEVERITY_LINE.search(line):
            raise ConfigError(f"example error line lacks a 1-5 severity: {line!r}")


def _render_examples(examples: Sequence[FewShotExample]) -> str:
    blocks = []
    for ex in examples:
        lines = [f"Source: {ex.source}", f"Target: {ex.target}"]
        lines.extend(ex.error_lines)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def build_few_shot(
    lang_pair: tuple[str, str],
    segment: Segment,
    examples: Sequence[FewShotExample] = DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN,
    *,
    scheme: SeverityScheme = SeverityScheme.SCALE_M3,
) -> RenderedPrompt:
    """Render the few-shot annotation prompt (1-5 severity scale).

    The default worked examples are the shipped zh-en pair; other language
    pairs supply their own via ``examples`` (see load_examples_jsonl).
    """
    if scheme is SeverityScheme.BINARY_LABELS:
        raise ConfigError("few-shot prompting uses the 1-5 scale, not binary labels")
    if not examples:
        raise ConfigError("few-shot prompting needs at least one worked example")
    for ex in examples:
        _validate_example(ex)
    _check_segment(lang_pair, segment)
    names = {"src_name": language_name(lang_pair[0]), "tgt_name": language_name(lang_pair[1])}
    system, instruction = _load_template("few_shot")
    values = dict(
        names,
        source=segment.source,
        target=segment.target,
        examples=_render_examples(examples),
    )
    return RenderedPrompt(segment.id, _render(system, values), _render(instruction, values))


def quiz_prompts(lang_pair: tuple[str, str]) -> list[str]:
    """The five MQM knowledge-test questions, each sent as its own request.
    Question 4's language names are substituted for the pair."""
    names = {"src_name": language_name(lang_pair[0]), "tgt_name": language_name(lang_pair[1])}
    return [_render(q, names) for q in QUIZ_QUESTIONS]


def render_example_error(index: int, category: str, severity: int, marked_text: str, start: int, end: int) -> str:
    """Format one user-supplied example error in the shipped line style."""
    return (
        f"Error {index}: error type: {category}, severity: {severity}, "
        f"marked text: {marked_text}, error span index: {{start: {start}, end: {end}}}"
    )


def load_examples_jsonl(path) -> list[FewShotExample]:
    """Load user-supplied few-shot examples.

    One JSON object per line: {"source": .., "target": .., "errors": [{
    "category": .., "raw_scale": 1-5, "marked_text": .., "span": {"start": ..,
    "end": ..}}]}. Error records are validated against the 1-5 scale before
    rendering; nothing is invented for missing fields.
    """
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                lines = []
                for i, err in enumerate(obj["errors"], 1):
                    scale = int(err["raw_scale"])
                    if scale not in (1, 2, 3, 4, 5):
                        raise ValueError(f"raw_scale {scale} outside 1-5")
                    lines.append(render_example_error(
                        i, err["category"], scale, err["marked_text"],
                        int(err["span"]["start"]), int(err["span"]["end"]),
                    ))
                ex = FewShotExample(obj["source"], obj["target"], tuple(lines))
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigError(f"{path}:{lineno}: bad few-shot example: {exc}") from exc
            _validate_example(ex)
            examples.append(ex)
    if not examples:
        raise ConfigError(f"{path}: no few-shot examples found")
    return examples


def build_template(
    mode: PromptMode,
    scheme: SeverityScheme,
    examples: Sequence[FewShotExample] = (),
) -> PromptTemplate:
    """Assemble and validate a PromptTemplate for a mode/scheme pairing.

    Binary labels pair only with zero-shot; the 1-5 scale schemes pair only
    with few-shot. Other pairings are configuration errors.
    """
    if mode is PromptMode.ZERO_SHOT:
        if scheme is not SeverityScheme.BINARY_LABELS:
            raise ConfigError("zero-shot prompting pairs only with binary labels")
        if examples:
            raise ConfigError("zero-shot prompting takes no worked examples")
        system, instruction = _load_template("zero_shot")
    elif mode is PromptMode.FEW_SHOT:
        if scheme is SeverityScheme.BINARY_LABELS:
            raise ConfigError("few-shot prompting pairs only with the 1-5 scale schemes")
        if not examples:
            raise ConfigError("few-shot prompting needs at least one worked example")
        system, instruction = _load_template("few_shot")
    else:
        system, instruction = "", "\n".join(QUIZ_QUESTIONS)
    return PromptTemplate(
        mode=mode,
        system_message=system,
        instruction=instruction,
        examples=tuple(examples),
        scheme=scheme,
    )
