import random

import pytest

from mqmgen.tokenizer import Token, char_span_of, tokenize

from genutil import EN_WORDS, ZH_CHARS


def texts(tokens):
    return [t.text for t in tokens]


def test_empty_input():
    assert tokenize("", "en") == []
    assert tokenize("   \t\n", "en") == []
    assert tokenize("", "zh") == []


def test_simple_sentence_with_final_period():
    assert texts(tokenize("The battery is working.", "en")) == ["The", "battery", "is", "working", "."]


def test_internal_hyphen_kept_trailing_colon_detached():
    assert texts(tokenize("Anti-fraud tips:", "en")) == ["Anti-fraud", "tips", ":"]


def test_contraction_splitting():
    assert texts(tokenize("don't", "en")) == ["do", "n't"]
    assert texts(tokenize("it's fine", "en")) == ["it", "'s", "fine"]
    assert texts(tokenize("I'm", "en")) == ["I", "'m"]
    # possessive apostrophe at the edge is punctuation, not a contraction
    assert texts(tokenize("dogs'", "en")) == ["dogs", "'"]


def test_leading_and_trailing_punctuation_are_singletons():
    assert texts(tokenize('("quoted!")', "en")) == ["(", '"', "quoted", "!", '"', ")"]


def test_chinese_per_codepoint_with_ascii_run():
    toks = tokenize("用了很久,除了低音出不来,总体还不错。", "zh")
    assert texts(toks) == [
        "用", "了", "很", "久", ",", "除", "了", "低", "音", "出", "不", "来",
        ",", "总", "体", "还", "不", "错", "。",
    ]
    assert texts(toks)[9:12] == ["出", "不", "来"]


def test_chinese_keeps_latin_digit_runs_whole():
    toks = tokenize("我买了GPT-4o版本。", "zh")
    assert "GPT-4o" in texts(toks)
    assert texts(toks)[-1] == "。"


def test_offsets_match_slices():
    for text, lang in [
        ("The battery is working.", "en"),
        ("用了很久,除了低音出不来,总体还不错。", "zh"),
        ("don't stop -- keep going!", "en"),
    ]:
        for t in tokenize(text, lang):
            assert text[t.char_start:t.char_end] == t.text


def test_char_span_of_examples():
    single = tokenize("working", "en")
    assert char_span_of(single, 0, 0) == (0, len("working"))
    toks = tokenize("The battery is working", "en")
    assert char_span_of(toks, 3, 3) == (15, 22)
    with pytest.raises(IndexError):
        char_span_of(toks, 2, 1)
    with pytest.raises(IndexError):
        char_span_of(toks, 0, 4)
    with pytest.raises(IndexError):
        char_span_of(toks, -1, 0)


def _reconstruct(text: str, tokens: list[Token]) -> str:
    out = []
    pos = 0
    for t in tokens:
        out.append(text[pos:t.char_start])
        out.append(t.text)
        pos = t.char_end
    out.append(text[pos:])
    return "".join(out)


def test_coverage_property_random_inputs():
    rng = random.Random(20240501)
    pool = EN_WORDS + list(ZH_CHARS) + ["don't", "anti-fraud", "(well)", "“好”", "x,y", "3.14"]
    for _ in range(300):
        text = " ".join(rng.choice(pool) for _ in range(rng.randint(0, 12)))
        for lang in ("en", "zh"):
            tokens = tokenize(text, lang)
            assert _reconstruct(text, tokens) == text
            for t in tokens:
                assert not any(ch.isspace() for ch in t.text)
                assert t.char_start < t.char_end
            for a, b in zip(tokens, tokens[1:]):
                assert a.char_end <= b.char_start


def test_determinism():
    text = "Mixed 中文 and English, with don't + anti-fraud cases."
    assert tokenize(text, "en") == tokenize(text, "en")
    assert tokenize(text, "zh") == tokenize(text, "zh")
