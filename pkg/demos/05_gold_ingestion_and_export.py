"""WMT-format gold TSV in, QE training CSV out.

Inline <v>...</v> markup becomes token spans, the category hierarchy
collapses to the seven-value typology, and per-segment quality scores are
exported as src,mt,score rows for training a learned QE model.
"""

import tempfile
from pathlib import Path

from mqmgen.data_io import export_qe_csv, load_gold_tsv, read_qe_csv
from mqmgen.scoring import error_stats, stats_to_tsv

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
pairs = load_gold_tsv(fixtures / "gold_zh_en_10rows.tsv", ("zh", "en"))

print(f"ingested {len(pairs)} (segment, rater) annotations:")
for seg, ann in pairs:
    kinds = ", ".join(f"{e.category.value}/{e.severity.value}" for e in ann.errors) or "no errors"
    print(f"  {seg.id:<14} {ann.annotator:<8} quality {ann.quality:.2f}  ({kinds})")

annotations = [a for _, a in pairs]
print("\nper-rater statistics:")
print(stats_to_tsv(error_stats(annotations)), end="")

seen = set()
segments = [s for s, _ in pairs if s.id not in seen and not seen.add(s.id)]
with tempfile.TemporaryDirectory() as tmp:
    csv_path = Path(tmp) / "train.csv"
    count = export_qe_csv(annotations, segments, csv_path)
    print(f"\nexported {count} training rows (multi-rater segments averaged):")
    for row in read_qe_csv(csv_path):
        print(f"  score {row.score:.2f}  {row.mt[:60]}")
