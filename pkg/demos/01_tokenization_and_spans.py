"""Tokenization with character offsets, across languages.

Every span index in the pipeline refers to these tokens, so the rules are
frozen in the library rather than delegated to an external tokenizer.
"""

from mqmgen.tokenizer import char_span_of, slice_text, tokenize

english = "The battery is working."
tokens = tokenize(english, "en")
print(f"{english!r} ->")
for t in tokens:
    print(f"  [{t.char_start:>2}, {t.char_end:>2})  {t.text!r}")

# token spans are inclusive pairs; char_span_of maps them back to text
span = (1, 3)
lo, hi = char_span_of(tokens, *span)
print(f"\ntokens {span} cover chars [{lo}, {hi}) = {english[lo:hi]!r}")

# punctuation detaches, internal hyphens stay, contractions split
for text in ("Anti-fraud tips:", "don't stop", '"quoted?"'):
    print(f"{text!r:24} -> {[t.text for t in tokenize(text, 'en')]}")

# Chinese: one token per CJK code point, Latin/digit runs stay whole
chinese = "用了很久,除了低音出不来,总体还不错。"
ztoks = tokenize(chinese, "zh")
print(f"\n{chinese!r} -> {len(ztoks)} tokens")
print([t.text for t in ztoks])
print("tokens 9..11:", slice_text(chinese, ztoks, 9, 11))
