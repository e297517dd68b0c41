"""The full annotation pipeline, offline, against the mock provider.

Uses the 20-segment fixture shipped with the tests: render prompts, replay
canned replies (three of them deliberately unparsable), repair and parse the
output, and derive quality scores. No network access anywhere.
"""

import json
import tempfile
from pathlib import Path

from mqmgen.annotation_parser import ParseStatus, parse_batch
from mqmgen.data_io import read_segments_jsonl
from mqmgen.core import SeverityScheme
from mqmgen.llm_gateway import (
    MockProvider,
    ProviderConfig,
    annotate_batch,
    build_mock_replies,
    group_by_fingerprint,
    parse_rate,
)
from mqmgen.prompting import build_zero_shot

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
segments = read_segments_jsonl(fixtures / "segments_zh_en_20.jsonl")
with open(fixtures / "replies_by_segment.json", encoding="utf-8") as fh:
    replies_by_segment = json.load(fh)

prompts = [build_zero_shot(("zh", "en"), s) for s in segments]
provider = MockProvider(build_mock_replies(prompts, replies_by_segment))

with tempfile.TemporaryDirectory() as tmp:
    ledger = Path(tmp) / "ledger.jsonl"
    cfg = ProviderConfig(kind="mock", mock_replies_path="-", max_in_flight=4)
    responses = annotate_batch(cfg, prompts, provider=provider, ledger_path=ledger)
    print(f"{len(responses)} responses captured to {ledger.name}")

outcomes = parse_batch(responses, {s.id: s for s in segments}, SeverityScheme.BINARY_LABELS)
parsed = [o.status is ParseStatus.PARSED for o in outcomes]
print(f"parse rate: {parse_rate(responses, parsed):.2f} ({sum(parsed)}/{len(parsed)})")
print("fingerprint groups:", {k: len(v) for k, v in group_by_fingerprint(responses).items()})

print("\nper-segment results:")
for outcome in outcomes:
    if outcome.annotation is None:
        print(f"  {outcome.segment_id}: unparsable ({outcome.repairs[0].kind})")
        continue
    a = outcome.annotation
    repaired = sum(r.kind == "span_repaired" for r in outcome.repairs)
    note = f", {repaired} span(s) repaired" if repaired else ""
    print(f"  {a.segment_id}: {len(a.errors)} errors, penalty {a.penalty:>4}, quality {a.quality:.2f}{note}")
