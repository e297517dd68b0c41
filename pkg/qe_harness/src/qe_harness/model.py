"""A deliberately small reference-free QE regressor.

The downstream experiment shape is "fine-tune a learned metric on exported
src,mt,score rows"; at desk scale that means a model that trains on a CPU in
seconds. Sentences are embedded as hashed character n-gram counts (stable
CRC32 hashing, so features are identical across runs and platforms) and a
two-layer MLP maps the pair embedding to a score in [0, 1]. The encoder name
is a required field so a heavier model can slot in behind the same contract.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import torch
from torch import nn

ENCODERS = ("hashed-char-ngram",)
FEATURE_DIM = 1024  # per side
NGRAM = 3


def _features_one(text: str) -> torch.Tensor:
    vec = torch.zeros(FEATURE_DIM)
    padded = f" {text.strip().lower()} "
    for i in range(max(1, len(padded) - NGRAM + 1)):
        gram = padded[i:i + NGRAM]
        vec[zlib.crc32(gram.encode("utf-8")) % FEATURE_DIM] += 1.0
    total = vec.sum()
    if total > 0:
        vec /= total
    return vec


def featurize(srcs: Sequence[str], mts: Sequence[str]) -> torch.Tensor:
    rows = [torch.cat([_features_one(s), _features_one(m)]) for s, m in zip(srcs, mts)]
    return torch.stack(rows)


def build_model(encoder: str) -> nn.Module:
    if encoder not in ENCODERS:
        raise ValueError(f"unknown encoder {encoder!r}; supported: {', '.join(ENCODERS)}")
    return nn.Sequential(
        nn.Linear(2 * FEATURE_DIM, 64),
        nn.ReLU(),
        nn.Linear(64, 1),
        nn.Sigmoid(),
    )


def save_checkpoint(path, model: nn.Module, encoder: str) -> None:
    torch.save({"encoder": encoder, "state_dict": model.state_dict()}, path)


def load_checkpoint(path) -> tuple[nn.Module, str]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    model = build_model(payload["encoder"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["encoder"]


def predict(model: nn.Module, srcs: Sequence[str], mts: Sequence[str]) -> list[float]:
    model.eval()
    with torch.no_grad():
        scores = model(featurize(srcs, mts)).squeeze(1)
    return [float(s) for s in scores]
