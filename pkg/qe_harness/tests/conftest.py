import csv
import random
from pathlib import Path

import pytest

EN_WORDS = [
    "the", "battery", "is", "working", "price", "not", "low", "screen",
    "display", "very", "good", "sound", "quality", "clear", "delivery",
    "fast", "size", "small", "color", "bright", "keyboard", "feels",
]

ZH_CHARS = "用了很久低音总体还不错产品价格电池屏幕显示效果非常好快递包装"


def _rows(rng: random.Random, n: int):
    rows = []
    for _ in range(n):
        src = "".join(rng.choice(ZH_CHARS) for _ in range(rng.randint(4, 12))) + "。"
        mt = " ".join(rng.choice(EN_WORDS) for _ in range(rng.randint(3, 10))) + "."
        rows.append((src, mt, round(rng.random(), 4)))
    return rows


def _write_csv(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "mt", "score"])
        writer.writerows(rows)
    return path


@pytest.fixture(scope="session")
def train_csv_50(tmp_path_factory) -> Path:
    rng = random.Random(1001)
    return _write_csv(tmp_path_factory.mktemp("data") / "train50.csv", _rows(rng, 50))


@pytest.fixture(scope="session")
def test_csv_30(tmp_path_factory) -> Path:
    rng = random.Random(2002)
    return _write_csv(tmp_path_factory.mktemp("data") / "test30.csv", _rows(rng, 30))
