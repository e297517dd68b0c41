"""Chat-completion driving with bounded concurrency, retries, and response
metadata capture.

Batch annotation is the expensive, non-replayable stage, so raw replies are
persisted to an append-only JSONL ledger before any parsing; a failed request
becomes a transport-error entry instead of aborting the batch, and output
order always matches input order. A deterministic mock provider (prompt hash
to canned reply) supports fully offline, byte-stable end-to-end runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import requests

from .errors import ConfigError, ContractError, DataError, EmptyInput
from .prompting import RenderedPrompt


class ResponseStatus(Enum):
    OK = "ok"
    TRANSPORT_ERROR = "transport_error"
    REFUSAL = "refusal"


@dataclass(frozen=True)
class RawResponse:
    """One LLM reply with the metadata needed for auditing and grouping."""

    segment_id: str
    model: str
    system_fingerprint: Optional[str]
    raw_text: str
    latency_ms: float
    attempts: int
    status: ResponseStatus


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"                  # "remote" | "mock"
    endpoint: str = ""
    model: str = "mock-model"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 2
    max_in_flight: int = 4
    credential_var: str = ""
    mock_replies_path: str = ""
    backoff_base: float = 0.5           # seconds; doubled per retry, jittered


class TransportFailure(Exception):
    """Internal: one request attempt failed; retried up to the configured cap."""


def validate_config(cfg: ProviderConfig, env: Mapping[str, str]) -> None:
    """Fail fast on configuration problems, before any request is made."""
    if cfg.max_in_flight < 1:
        raise ConfigError(f"max in-flight requests must be >= 1, got {cfg.max_in_flight}")
    if cfg.max_retries < 0:
        raise ConfigError(f"max retries must be >= 0, got {cfg.max_retries}")
    if cfg.temperature < 0:
        raise ConfigError(f"temperature must be >= 0, got {cfg.temperature}")
    if cfg.kind == "remote":
        if not cfg.endpoint.startswith(("http://", "https://")):
            raise ConfigError(f"bad endpoint URL {cfg.endpoint!r}")
        if not cfg.credential_var:
            raise ConfigError("remote provider needs a credential environment variable name")
        if not env.get(cfg.credential_var):
            raise ConfigError(f"credential variable {cfg.credential_var!r} is not set")
        if not cfg.model:
            raise ConfigError("remote provider needs a model name")
    elif cfg.kind == "mock":
        if not cfg.mock_replies_path:
            raise ConfigError("mock provider needs a replies file path")
    else:
        raise ConfigError(f"unknown provider kind {cfg.kind!r}")


def prompt_key(prompt: RenderedPrompt) -> str:
    """Stable identity of a rendered prompt: sha256 over system and user text."""
    digest = hashlib.sha256()
    digest.update(prompt.system.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(prompt.user.encode("utf-8"))
    return digest.hexdigest()


class RemoteProvider:
    """OpenAI-style chat-completion endpoint over HTTP."""

    def __init__(self, cfg: ProviderConfig, env: Mapping[str, str]):
        self.cfg = cfg
        self._auth = env[cfg.credential_var]

    def complete(self, prompt: RenderedPrompt) -> tuple[str, Optional[str], Optional[float]]:
        body = {
            "model": self.cfg.model,
            "messages": prompt.messages(),
            "temperature": self.cfg.temperature,
        }
        try:
            resp = requests.post(
                self.cfg.endpoint,
                json=body,
                headers={"Authorization": f"Bearer {self._auth}"},
                timeout=self.cfg.timeout,
            )
            resp.raise_for_status()
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
        except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
            raise TransportFailure(str(exc)) from exc
        return text, data.get("system_fingerprint"), None


class MockProvider:
    """Replays canned replies keyed by prompt hash.

    ``fail`` scripts transport faults per key: a positive count fails that
    many attempts before succeeding; -1 fails permanently. Latency is
    reported as a constant 0.0 so ledgers are byte-identical across runs.
    A prompt without a canned reply is a transport failure, not a crash.
    """

    def __init__(
        self,
        replies: Mapping[str, str],
        fail: Optional[Mapping[str, int]] = None,
        fingerprint: Optional[str] = "fp_mock",
    ):
        self.replies = dict(replies)
        self._remaining_failures = dict(fail or {})
        self.fingerprint = fingerprint

    @classmethod
    def from_file(cls, path: str | Path) -> "MockProvider":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: mock replies file must be a JSON object")
        replies = data.get("replies", data)
        fail = data.get("fail", {}) if "replies" in data else {}
        return cls(replies, fail)

    def complete(self, prompt: RenderedPrompt) -> tuple[str, Optional[str], Optional[float]]:
        key = prompt_key(prompt)
        remaining = self._remaining_failures.get(key, 0)
        if remaining == -1:
            raise TransportFailure(f"scripted permanent failure for {key[:12]}")
        if remaining > 0:
            self._remaining_failures[key] = remaining - 1
            raise TransportFailure(f"scripted failure for {key[:12]} ({remaining} left)")
        if key not in self.replies:
            raise TransportFailure(f"no canned reply for prompt {key[:12]}")
        return self.replies[key], self.fingerprint, 0.0


def build_mock_replies(
    prompts: Sequence[RenderedPrompt],
    by_segment: Mapping[str, str],
) -> dict[str, str]:
    """Turn a segment-id-keyed reply table into the prompt-hash-keyed mapping
    the mock provider consumes."""
    return {
        prompt_key(p): by_segment[p.segment_id]
        for p in prompts
        if p.segment_id in by_segment
    }


def _make_provider(cfg: ProviderConfig, env: Mapping[str, str]):
    if cfg.kind == "remote":
        return RemoteProvider(cfg, env)
    return MockProvider.from_file(cfg.mock_replies_path)


def annotate_batch(
    cfg: ProviderConfig,
    prompts: Sequence[RenderedPrompt],
    *,
    env: Optional[Mapping[str, str]] = None,
    provider=None,
    ledger_path: Optional[str | Path] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[RawResponse]:
    """Send all prompts with at most ``cfg.max_in_flight`` requests in flight.

    Output order matches input order regardless of completion order. Each
    prompt is attempted up to 1 + max_retries times with exponential backoff
    and jitter; exhausted prompts yield transport-error entries. When
    ``ledger_path`` is given, every response is appended there (single
    writer) before this function returns.
    """
    env = os.environ if env is None else env
    if not prompts:
        raise EmptyInput("annotate_batch called with no prompts")
    if provider is None:
        validate_config(cfg, env)
        provider = _make_provider(cfg, env)
    rng = random.Random()

    def run_one(prompt: RenderedPrompt) -> RawResponse:
        started = time.monotonic()
        attempts = 0
        while True:
            attempts += 1
            try:
                text, fingerprint, fixed_latency = provider.complete(prompt)
            except TransportFailure:
                if attempts > cfg.max_retries:
                    return RawResponse(
                        segment_id=prompt.segment_id,
                        model=cfg.model,
                        system_fingerprint=None,
                        raw_text="",
                        latency_ms=0.0,
                        attempts=attempts,
                        status=ResponseStatus.TRANSPORT_ERROR,
                    )
                backoff = cfg.backoff_base * (2 ** (attempts - 1))
                sleep(backoff * (1.0 + rng.random()))
                continue
            latency = fixed_latency if fixed_latency is not None else (time.monotonic() - started) * 1000.0
            status = ResponseStatus.OK if text.strip() else ResponseStatus.REFUSAL
            return RawResponse(
                segment_id=prompt.segment_id,
                model=cfg.model,
                system_fingerprint=fingerprint,
                raw_text=text if status is ResponseStatus.OK else "",
                latency_ms=latency,
                attempts=attempts,
                status=status,
            )

    with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
        responses = list(pool.map(run_one, prompts))

    if ledger_path is not None:
        append_ledger(ledger_path, responses)
    return responses


def parse_rate(responses: Sequence[RawResponse], parse_ok: Sequence[bool]) -> float:
    """Fraction of responses whose downstream parse succeeded."""
    if len(responses) != len(parse_ok):
        raise ContractError(
            f"{len(responses)} responses but {len(parse_ok)} parse results"
        )
    if not responses:
        raise EmptyInput("parse rate over zero responses is undefined")
    return sum(1 for ok in parse_ok if ok) / len(responses)


UNKNOWN_FINGERPRINT = "unknown"


def group_by_fingerprint(responses: Iterable[RawResponse]) -> dict[str, list[str]]:
    """Partition segment ids by reported system fingerprint; responses
    without one group under the "unknown" sentinel."""
    groups: dict[str, list[str]] = {}
    for r in responses:
        key = r.system_fingerprint or UNKNOWN_FINGERPRINT
        groups.setdefault(key, []).append(r.segment_id)
    return groups


# ---------------------------------------------------------------------------
# Response ledger (append-only JSONL)

def response_to_dict(r: RawResponse) -> dict:
    return {
        "segment_id": r.segment_id,
        "model": r.model,
        "system_fingerprint": r.system_fingerprint,
        "raw_text": r.raw_text,
        "latency_ms": r.latency_ms,
        "attempts": r.attempts,
        "status": r.status.value,
    }


def response_from_dict(d: dict) -> RawResponse:
    return RawResponse(
        segment_id=d["segment_id"],
        model=d["model"],
        system_fingerprint=d.get("system_fingerprint"),
        raw_text=d["raw_text"],
        latency_ms=float(d["latency_ms"]),
        attempts=int(d["attempts"]),
        status=ResponseStatus(d["status"]),
    )


def append_ledger(path: str | Path, responses: Iterable[RawResponse]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for r in responses:
            fh.write(json.dumps(response_to_dict(r), ensure_ascii=False) + "\n")


def read_ledger(path: str | Path) -> list[RawResponse]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(response_from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: bad ledger line: {exc}") from exc
    return out
