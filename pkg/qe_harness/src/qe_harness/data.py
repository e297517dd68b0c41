"""Reading and checking the src,mt,score training CSV.

The harness talks to the annotation pipeline only through its file formats,
so the CSV is read and validated here rather than through that package's
API. Schema problems are reported with a column-level diagnostic before any
training starts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

EXPECTED_HEADER = ["src", "mt", "score"]


class SchemaError(Exception):
    """The CSV does not match the src,mt,score export schema."""


@dataclass(frozen=True)
class Example:
    src: str
    mt: str
    score: float


def load_csv(path: str | Path) -> list[Example]:
    """Load a training/test CSV, failing fast with a column-level message."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected header {','.join(EXPECTED_HEADER)}")
        if header != EXPECTED_HEADER:
            missing = [c for c in EXPECTED_HEADER if c not in header]
            extra = [c for c in header if c not in EXPECTED_HEADER]
            detail = []
            if missing:
                detail.append(f"missing columns: {missing}")
            if extra:
                detail.append(f"unexpected columns: {extra}")
            if not detail:
                detail.append(f"column order must be {EXPECTED_HEADER}, got {header}")
            raise SchemaError(f"{path}: bad header; " + "; ".join(detail))
        rows = []
        for lineno, row in enumerate(reader, 2):
            if len(row) != 3:
                raise SchemaError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            src, mt, raw_score = row
            if not src or not mt:
                raise SchemaError(f"{path}:{lineno}: empty src or mt text")
            try:
                score = float(raw_score)
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: score column not numeric: {raw_score!r}") from None
            if not (0.0 <= score <= 1.0):
                raise SchemaError(f"{path}:{lineno}: score {score} outside [0, 1]")
            rows.append(Example(src, mt, score))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def split_indices(n: int, val_fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Deterministic, disjoint, covering train/validation index split."""
    import random

    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_val = max(1, int(round(n * val_fraction))) if n > 1 else 0
    n_val = min(n_val, n - 1)  # keep at least one training row
    return sorted(order[n_val:]), sorted(order[:n_val])
