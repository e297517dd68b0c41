"""The three prompt families: zero-shot, few-shot, and the knowledge quiz.

Templates live as text files inside the package; rendering is pure, so the
same segment always produces byte-identical prompts.
"""

from mqmgen.core import Segment
from mqmgen.prompting import build_few_shot, build_zero_shot, quiz_prompts

segment = Segment(
    id="demo-1",
    lang_pair=("zh", "en"),
    source="电池在用。",
    target="The battery is working.",
)

zero = build_zero_shot(("zh", "en"), segment)
print("=== zero-shot system message ===")
print(zero.system)
print("\n=== zero-shot user message ===")
print(zero.user)

few = build_few_shot(("zh", "en"), segment)
print("\n=== few-shot user message (1-5 severity scale, worked examples) ===")
print(few.user)

print("\n=== knowledge quiz for en-de ===")
for i, question in enumerate(quiz_prompts(("en", "de")), 1):
    print(f"{i}. {question}")
