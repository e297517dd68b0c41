"""Train/evaluate orchestration.

All statistics are single-sourced: this package never computes a correlation
itself, it writes a gold/pred pairs file and shells out to the annotation
pipeline's executable (``mqmgen eval-corr``), then reads the JSON back.
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import torch

from .data import load_csv, split_indices
from .model import build_model, featurize, load_checkpoint, predict, save_checkpoint


@dataclass(frozen=True)
class TrainSpec:
    train_csv: str
    output_dir: str
    encoder: str                 # required; see model.ENCODERS
    epochs: int = 1
    val_fraction: float = 0.2
    seed: int = 7
    batch_size: int = 16
    learning_rate: float = 1e-3

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError(f"validation fraction must be in (0, 1), got {self.val_fraction}")
        if not self.encoder:
            raise ValueError("encoder is required (e.g. hashed-char-ngram)")


@dataclass(frozen=True)
class TrainResult:
    checkpoint_path: str
    log_path: str
    train_rows: int
    val_rows: int


def _epoch(model, optimizer, loss_fn, features, targets, batch_size) -> float:
    model.train()
    total = 0.0
    for lo in range(0, len(targets), batch_size):
        batch_x = features[lo:lo + batch_size]
        batch_y = targets[lo:lo + batch_size]
        optimizer.zero_grad()
        loss = loss_fn(model(batch_x).squeeze(1), batch_y)
        loss.backward()
        optimizer.step()
        total += float(loss.detach()) * len(batch_y)
    return total / len(targets)


def train(spec: TrainSpec) -> TrainResult:
    """Train the regressor; writes checkpoint.pt and training_log.json
    (epoch losses, split membership, seed) to the output directory. The
    split is seeded, disjoint, and covers the input."""
    spec.validate()
    rows = load_csv(spec.train_csv)

    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_idx, val_idx = split_indices(len(rows), spec.val_fraction, spec.seed)
    train_rows = [rows[i] for i in train_idx]
    val_rows = [rows[i] for i in val_idx]

    torch.manual_seed(spec.seed)
    model = build_model(spec.encoder)
    optimizer = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    loss_fn = torch.nn.MSELoss()

    x_train = featurize([r.src for r in train_rows], [r.mt for r in train_rows])
    y_train = torch.tensor([r.score for r in train_rows])
    x_val = featurize([r.src for r in val_rows], [r.mt for r in val_rows])
    y_val = torch.tensor([r.score for r in val_rows])

    history = []
    for epoch in range(1, spec.epochs + 1):
        train_loss = _epoch(model, optimizer, loss_fn, x_train, y_train, spec.batch_size)
        model.eval()
        with torch.no_grad():
            val_loss = float(loss_fn(model(x_val).squeeze(1), y_val)) if len(val_rows) else None
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})

    checkpoint_path = out_dir / "checkpoint.pt"
    save_checkpoint(checkpoint_path, model, spec.encoder)
    log_path = out_dir / "training_log.json"
    log_path.write_text(json.dumps({
        "train_csv": str(spec.train_csv),
        "encoder": spec.encoder,
        "seed": spec.seed,
        "epochs": spec.epochs,
        "val_fraction": spec.val_fraction,
        "train_indices": train_idx,
        "val_indices": val_idx,
        "history": history,
    }, indent=2) + "\n", encoding="utf-8")
    return TrainResult(
        checkpoint_path=str(checkpoint_path),
        log_path=str(log_path),
        train_rows=len(train_rows),
        val_rows=len(val_rows),
    )


# ---------------------------------------------------------------------------
# Correlation via the annotation pipeline's executable

@dataclass(frozen=True)
class CorrelationReport:
    degenerate: bool
    pearson: Optional[dict] = None
    spearman: Optional[dict] = None
    kendall: Optional[dict] = None


def pipeline_command() -> list[str]:
    """The primary executable: MQMGEN_BIN if set, the installed `mqmgen`
    otherwise, with a module-invocation fallback."""
    override = os.environ.get("MQMGEN_BIN")
    if override:
        return override.split()
    found = shutil.which("mqmgen")
    if found:
        return [found]
    return [sys.executable, "-m", "mqmgen.cli"]


def correlate(golds: Sequence[float], preds: Sequence[float], workdir: str | Path) -> CorrelationReport:
    """Write a gold/pred pairs file and have the primary executable compute
    Pearson/Spearman/Kendall on it."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    pairs_path = workdir / "pairs.tsv"
    with open(pairs_path, "w", encoding="utf-8") as fh:
        fh.write("gold\tpred\n")
        for g, p in zip(golds, preds):
            fh.write(f"{g!r}\t{p!r}\n")
    out_path = workdir / "correlations.json"
    proc = subprocess.run(
        pipeline_command() + ["eval-corr", "--pairs", str(pairs_path),
                              "--format", "json", "--out", str(out_path)],
        capture_output=True, text=True,
    )
    if proc.returncode != 0:
        if "degenerate" in proc.stderr.lower():
            return CorrelationReport(degenerate=True)
        raise RuntimeError(
            f"eval-corr failed with exit {proc.returncode}: {proc.stderr.strip()}"
        )
    result = json.loads(out_path.read_text(encoding="utf-8"))
    return CorrelationReport(
        degenerate=False,
        pearson=result["pearson"],
        spearman=result["spearman"],
        kendall=result["kendall"],
    )


def predict_and_correlate(
    checkpoint_path: str | Path,
    test_csv: str | Path,
    output_dir: str | Path,
) -> CorrelationReport:
    """Score the test rows with the checkpointed model, persist the
    predictions, and correlate them against the gold scores through the
    primary executable."""
    checkpoint_path = Path(checkpoint_path)
    if not checkpoint_path.exists():
        raise FileNotFoundError(f"checkpoint not found: {checkpoint_path}")
    rows = load_csv(test_csv)
    model, _ = load_checkpoint(checkpoint_path)
    preds = predict(model, [r.src for r in rows], [r.mt for r in rows])

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    pred_path = output_dir / "predictions.tsv"
    with open(pred_path, "w", encoding="utf-8") as fh:
        fh.write("gold\tpred\n")
        for row, pred_score in zip(rows, preds):
            fh.write(f"{row.score!r}\t{pred_score!r}\n")

    return correlate([r.score for r in rows], preds, output_dir)
