import pytest

from mqmgen.core import Segment, SeverityScheme
from mqmgen.errors import ConfigError
from mqmgen.prompting import (
    DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN,
    FewShotExample,
    PromptMode,
    build_few_shot,
    build_template,
    build_zero_shot,
    load_examples_jsonl,
    quiz_prompts,
)

ZH_EN = ("zh", "en")
SEG = Segment("seg-1", ZH_EN, "电池在用。", "The battery is working.")
DE_SEG = Segment("seg-2", ("en", "de"), "The battery is working.", "Der Akku funktioniert.")


class TestZeroShot:
    def test_persona_line_zh_en(self):
        p = build_zero_shot(ZH_EN, SEG)
        assert p.system == "You are a professional Chinese-English translator."

    def test_persona_line_en_de(self):
        p = build_zero_shot(("en", "de"), DE_SEG)
        assert p.system == "You are a professional English-German translator."

    def test_user_message_contents(self):
        p = build_zero_shot(ZH_EN, SEG)
        assert "accuracy, style, fluency, terminology, locale convention, other" in p.user
        assert "NLTK tokenizer" in p.user
        assert "up to 5 errors" in p.user
        assert "json" in p.user.lower()
        assert "explanation" in p.user
        assert f"Source: {SEG.source}" in p.user
        assert f"Target: {SEG.target}" in p.user

    def test_basic_variant_differs_only_in_index_instruction(self):
        standard = build_zero_shot(ZH_EN, SEG).user
        basic = build_zero_shot(ZH_EN, SEG, variant="basic").user
        assert "NLTK tokenizer" in standard and "NLTK tokenizer" not in basic
        assert "with whitespace" in basic

    def test_empty_source_rejected(self):
        empty = Segment("e", ZH_EN, "  ", "text")
        with pytest.raises(ConfigError):
            build_zero_shot(ZH_EN, empty)

    def test_wrong_pair_rejected(self):
        with pytest.raises(ConfigError):
            build_zero_shot(("en", "de"), SEG)

    def test_unsupported_language_rejected(self):
        seg = Segment("x", ("zz", "en"), "a", "b")
        with pytest.raises(ConfigError):
            build_zero_shot(("zz", "en"), seg)

    def test_rendering_is_pure(self):
        assert build_zero_shot(ZH_EN, SEG) == build_zero_shot(ZH_EN, SEG)


class TestFewShot:
    def test_contains_shipped_comma_splice_example(self):
        p = build_few_shot(ZH_EN, SEG)
        assert "Error 1: error type: fluency, severity: 2" in p.user

    def test_contains_shipped_omission_example(self):
        p = build_few_shot(ZH_EN, SEG)
        assert "出不来" in p.user
        assert "error type: omission; severity: 4" in p.user

    def test_all_six_category_explanations(self):
        p = build_few_shot(ZH_EN, SEG)
        for line in (
            "Accuracy: when the target translation does not accurately represent the source.",
            "Omission: when the target translation is missing content present in the source text.",
            "Fluency: issues with punctuation, spelling, grammar, register, inconsistency.",
            "Style: when the translation is grammatically correct but uses unnatural or awkward language.",
            "Terminology: inappropriate or inconsistent use of terms.",
            "Locale convention: issues with formatting.",
        ):
            assert line in p.user

    def test_scale_wording_and_no_explanation_key(self):
        p = build_few_shot(ZH_EN, SEG)
        assert "a severity scale from 1 (least severe) to 5 (most severe)" in p.user
        assert "maximum of 5" in p.user
        assert "explanation" not in p.user.lower()

    def test_empty_examples_rejected(self):
        with pytest.raises(ConfigError):
            build_few_shot(ZH_EN, SEG, [])

    def test_binary_scheme_rejected(self):
        with pytest.raises(ConfigError):
            build_few_shot(ZH_EN, SEG, scheme=SeverityScheme.BINARY_LABELS)

    def test_example_without_scale_severity_rejected(self):
        bad = FewShotExample("src", "tgt", ("Error 1: error type: fluency, severity: major",))
        with pytest.raises(ConfigError):
            build_few_shot(ZH_EN, SEG, [bad])

    def test_custom_examples_render_in_order(self):
        ex = FewShotExample(
            "源句。", "Example target.",
            ("Error 1: error type: style, severity: 3, marked text: target, error span index: {start: 1, end: 1}",),
        )
        p = build_few_shot(ZH_EN, SEG, [ex])
        assert "Source: 源句。" in p.user
        assert p.user.index("Example target.") < p.user.index(f"Source: {SEG.source}")


class TestQuiz:
    def test_five_questions(self):
        assert len(quiz_prompts(ZH_EN)) == 5

    def test_third_question_exact(self):
        assert quiz_prompts(ZH_EN)[2] == "What are the core error categories of MQM?"

    def test_fourth_question_substituted(self):
        q4 = quiz_prompts(("en", "de"))[3]
        assert "the English sentence and its German translation" in q4

    def test_first_question_exact(self):
        q1 = quiz_prompts(ZH_EN)[0]
        assert q1 == "Can you explain what machine translation quality estimation is in 100 words?"


class TestTemplatePairing:
    def test_zero_shot_requires_binary(self):
        t = build_template(PromptMode.ZERO_SHOT, SeverityScheme.BINARY_LABELS)
        assert t.examples == () and t.max_errors == 5
        with pytest.raises(ConfigError):
            build_template(PromptMode.ZERO_SHOT, SeverityScheme.SCALE_M13)

    def test_few_shot_requires_scale(self):
        t = build_template(
            PromptMode.FEW_SHOT, SeverityScheme.SCALE_M3, DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN,
        )
        assert len(t.examples) == 2
        with pytest.raises(ConfigError):
            build_template(PromptMode.FEW_SHOT, SeverityScheme.BINARY_LABELS, DEFAULT_FEW_SHOT_EXAMPLES_ZH_EN)
        with pytest.raises(ConfigError):
            build_template(PromptMode.FEW_SHOT, SeverityScheme.SCALE_M3, ())


def test_load_examples_jsonl(tmp_path):
    path = tmp_path / "examples.jsonl"
    path.write_text(
        '{"source": "源句。", "target": "A target sentence.", "errors": '
        '[{"category": "accuracy", "raw_scale": 4, "marked_text": "target", '
        '"span": {"start": 1, "end": 1}}]}\n',
        encoding="utf-8",
    )
    examples = load_examples_jsonl(path)
    assert len(examples) == 1
    assert "severity: 4" in examples[0].error_lines[0]
    assert "marked text: target" in examples[0].error_lines[0]

    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"source": "a", "target": "b", "errors": [{"category": "x", "raw_scale": 9, '
                   '"marked_text": "m", "span": {"start": 0, "end": 0}}]}\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_examples_jsonl(bad)
