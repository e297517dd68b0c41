#!/usr/bin/env python3
"""Regenerate the committed end-to-end fixtures.

Twenty hand-written zh-en segment pairs, a mock-reply table for the
zero-shot pipeline (17 parsable replies in assorted shapes, 3 deliberately
unparsable), and a gold annotation file for the same segments. Reply span
indices are deliberately nudged off the true token spans so the offline run
exercises reconciliation. Everything is deterministic; run from the repo
root:

    python scripts/gen_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from mqmgen.core import (
    Annotation,
    ErrorCategory,
    ErrorSpan,
    Segment,
    Severity,
    SeverityScheme,
    Side,
    validate_annotation,
)
from mqmgen.data_io import write_annotations_jsonl, write_segments_jsonl
from mqmgen.scoring import penalty, quality
from mqmgen.tokenizer import tokenize

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# (source, target, model_errors, gold_errors) where each error is
# (marked_text, category, severity, span_nudge). Omission marks source text.
SEGMENTS = [
    ("用了很久,除了低音出不来,总体还不错。",
     "I tried to use it for a long time, but all sounded good except for the bass.",
     [("tried to", "accuracy", "major", 1), ("出不来", "omission", "major", -2)],
     [("tried to", "accuracy", "major", 0)]),
    ("产品特价的时候购买,价格不低,看评论也是很不错的产品。",
     "I bought it when the product was on sale, the price is not low, and it is also a very good product after reading the reviews.",
     [(",", "fluency", "minor", 0)],
     [(",", "fluency", "minor", 0), ("very good", "style", "minor", 0)]),
    ("电池在用。", "The battery is working.",
     [("working", "accuracy", "major", 2)],
     [("working", "accuracy", "major", 0)]),
    ("防骗提示:", "Anti-fraud tips:",
     [("Anti-fraud", "accuracy", "minor", 0)],
     []),
    ("屏幕显示效果非常好。", "The screen display effect is very good.",
     [("display effect", "style", "minor", -1)],
     [("effect", "style", "minor", 0)]),
    ("快递包装很严实。", "The delivery packaging is very strict.",
     [("strict", "accuracy", "major", 1), ("very", "style", "minor", 0)],
     [("strict", "accuracy", "major", 0)]),
    ("这款耳机戴着很舒服。", "These headphones is comfortable to wear.",
     [("is", "fluency", "minor", 0)],
     [("is", "fluency", "major", 0)]),
    ("物流速度快,客服态度好。", "Logistics speed is fast, customer service attitude is good.",
     [("Logistics speed", "style", "minor", 0), ("attitude", "style", "minor", 3)],
     [("Logistics speed is fast", "style", "minor", 0)]),
    ("安装过程有点复杂。", "The installation process is a bit complex.",
     [],
     []),
    ("散热效果一般,运行时有噪音。", "The heat dissipation is average, and there is noise during operation.",
     [("noise", "accuracy", "minor", -2)],
     [("average", "accuracy", "minor", 0)]),
    ("屏幕出现了坏点。", "Dead pixels appeared on screen.",
     [("on screen", "fluency", "minor", 1)],
     [("on screen", "fluency", "minor", 0)]),
    ("键盘手感不错,就是灯光太亮。", "The keyboard feels good, but the light is too bright.",
     [],
     [("light", "terminology", "minor", 0)]),
    ("续航时间比宣传的短。", "Battery life is shorter than advertised.",
     [("shorter", "accuracy", "major", 0)],
     [("shorter than advertised", "accuracy", "major", 0)]),
    ("系统更新后变得很流畅。", "The system became very smooth after the update.",
     [],
     []),
    ("镜头在夜间表现不佳。", "The lens performs poorly at night.",
     [("poorly", "style", "minor", 2)],
     [("poorly", "style", "minor", 0)]),
    ("音质清晰,低音震撼。", "The sound quality is clear and the bass is shocking.",
     [("shocking", "terminology", "major", 0)],
     [("shocking", "terminology", "major", 0)]),
    ("尺寸偏小,建议买大一号。", "The size is small, suggest buying one size up.",
     [("suggest", "fluency", "minor", -1), ("建议", "omission", "minor", 4)],
     [("suggest buying", "fluency", "minor", 0)]),
    ("颜色和图片有色差。", "There is color difference between color and picture.",
     [("between color and picture", "accuracy", "major", 0)],
     [("color difference", "accuracy", "minor", 0)]),
    ("客服回复及时,解决了问题。", "Customer service replied promptly and solved the problem.",
     [],
     []),
    ("价格实惠,性价比高。", "The price is affordable and cost-effective.",
     [("cost-effective", "style", "minor", 1)],
     [("cost-effective", "style", "minor", 0)]),
]

UNPARSABLE = {
    "seg-007": "The translation looks mostly fine to me. The grammar issue around "
               "the verb is minor and I would not flag anything else.",
    "seg-013": "error type: accuracy, marked text: shorter, severity: major "
               "(sorry, I cannot produce JSON for this one)",
    "seg-019": "No errors found in this translation pair. Great work!",
}


def true_span(text: str, lang: str, marked: str) -> tuple[int, int]:
    tokens = tokenize(text, lang)
    for i in range(len(tokens)):
        for j in range(i, len(tokens)):
            lo, hi = tokens[i].char_start, tokens[j].char_end
            if text[lo:hi] == marked:
                return i, j
    raise SystemExit(f"marked text {marked!r} is not a token slice of {text!r}")


def reply_for(index: int, segment: Segment, errors) -> str:
    records = []
    for marked, category, severity, nudge in errors:
        side_text = segment.source if category == "omission" else segment.target
        lang = "zh" if category == "omission" else "en"
        start, end = true_span(side_text, lang, marked)
        records.append({
            "error type": category,
            "marked text": marked,
            "error span index": {"start": start + nudge, "end": end + nudge},
            "severity": severity,
            "explanation": f"{category} issue around {marked!r}",
        })
    body = json.dumps(records, ensure_ascii=False)
    shape = index % 4
    if shape == 0:
        return body
    if shape == 1:
        return f"Here is the annotation you asked for:\n```json\n{body}\n```\n"
    if shape == 2:
        return json.dumps({"errors": records}, ensure_ascii=False)
    if len(records) == 1:
        return "Sure! " + json.dumps(records[0], ensure_ascii=False)
    return "Result: " + body


def gold_annotation(segment: Segment, errors) -> Annotation:
    spans = []
    for marked, category, severity, _ in errors:
        if category == "omission":
            side, text, lang = Side.SOURCE, segment.source, "zh"
        else:
            side, text, lang = Side.TARGET, segment.target, "en"
        start, end = true_span(text, lang, marked)
        spans.append(ErrorSpan(
            category=ErrorCategory(category.replace(" ", "_")),
            severity=Severity(severity),
            marked_text=marked,
            span=(start, end),
            side=side,
        ))
    pen = penalty(spans)
    return Annotation(
        segment_id=segment.id,
        annotator="rater1",
        errors=tuple(spans),
        scheme=SeverityScheme.BINARY_LABELS,
        penalty=pen,
        quality=quality(pen),
    )


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    segments, golds, replies = [], [], {}
    for idx, (source, target, model_errors, gold_errors) in enumerate(SEGMENTS, 1):
        seg = Segment(
            id=f"seg-{idx:03d}",
            lang_pair=("zh", "en"),
            source=source,
            target=target,
            system="demo-mt",
            doc="reviews",
        )
        segments.append(seg)
        gold = gold_annotation(seg, gold_errors)
        assert validate_annotation(gold, seg) == [], seg.id
        golds.append(gold)
        replies[seg.id] = UNPARSABLE.get(seg.id) or reply_for(idx, seg, model_errors)

    write_segments_jsonl(FIXTURES / "segments_zh_en_20.jsonl", segments)
    write_annotations_jsonl(FIXTURES / "gold_zh_en_20.jsonl", golds)
    with open(FIXTURES / "replies_by_segment.json", "w", encoding="utf-8") as fh:
        json.dump(replies, fh, ensure_ascii=False, indent=2)
    print(f"wrote {len(segments)} segments, {len(golds)} gold annotations, {len(replies)} replies")


if __name__ == "__main__":
    main()
