import threading
import time

import pytest

from mqmgen.errors import ConfigError, ContractError, EmptyInput
from mqmgen.llm_gateway import (
    MockProvider,
    ProviderConfig,
    RawResponse,
    ResponseStatus,
    annotate_batch,
    build_mock_replies,
    group_by_fingerprint,
    parse_rate,
    prompt_key,
    read_ledger,
    validate_config,
)
from mqmgen.prompting import RenderedPrompt

CFG = ProviderConfig(kind="mock", mock_replies_path="unused", max_retries=2, backoff_base=0.001)


def prompts(n):
    return [RenderedPrompt(f"seg-{i}", "system", f"user {i}") for i in range(n)]


def replies_for(ps, text="[]"):
    return {prompt_key(p): f"{text} # {p.segment_id}" for p in ps}


class TestValidateConfig:
    def test_mock_needs_replies_path(self):
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(kind="mock", mock_replies_path=""), {})

    def test_remote_needs_url_and_credential(self):
        base = dict(kind="remote", model="m", credential_var="TOKEN")
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(endpoint="not-a-url", **base), {"TOKEN": "x"})
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(endpoint="https://api.example/v1", **base), {})
        validate_config(ProviderConfig(endpoint="https://api.example/v1", **base), {"TOKEN": "x"})

    def test_bounds(self):
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(kind="mock", mock_replies_path="p", max_in_flight=0), {})
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(kind="mock", mock_replies_path="p", max_retries=-1), {})
        with pytest.raises(ConfigError):
            validate_config(ProviderConfig(kind="mock", mock_replies_path="p", temperature=-0.5), {})


class TestAnnotateBatch:
    def test_mock_replay_in_order(self):
        ps = prompts(3)
        provider = MockProvider(replies_for(ps))
        out = annotate_batch(CFG, ps, provider=provider)
        assert [r.segment_id for r in out] == ["seg-0", "seg-1", "seg-2"]
        assert all(r.status is ResponseStatus.OK for r in out)
        assert out[1].raw_text.endswith("seg-1")
        assert all(r.system_fingerprint == "fp_mock" for r in out)

    def test_permanent_failure_yields_transport_error(self):
        ps = prompts(3)
        provider = MockProvider(replies_for(ps), fail={prompt_key(ps[1]): -1})
        out = annotate_batch(CFG, ps, provider=provider, sleep=lambda _: None)
        assert [r.status for r in out] == [
            ResponseStatus.OK, ResponseStatus.TRANSPORT_ERROR, ResponseStatus.OK,
        ]
        assert out[1].raw_text == ""
        assert out[1].attempts == 1 + CFG.max_retries

    def test_single_failure_then_success_counts_attempts(self):
        ps = prompts(1)
        provider = MockProvider(replies_for(ps), fail={prompt_key(ps[0]): 1})
        out = annotate_batch(CFG, ps, provider=provider, sleep=lambda _: None)
        assert out[0].status is ResponseStatus.OK
        assert out[0].attempts == 2

    def test_empty_prompt_list_rejected(self):
        with pytest.raises(EmptyInput):
            annotate_batch(CFG, [], provider=MockProvider({}))

    def test_empty_reply_is_refusal(self):
        ps = prompts(1)
        provider = MockProvider({prompt_key(ps[0]): "   "})
        out = annotate_batch(CFG, ps, provider=provider)
        assert out[0].status is ResponseStatus.REFUSAL

    def test_missing_reply_is_transport_error(self):
        ps = prompts(1)
        provider = MockProvider({})
        out = annotate_batch(CFG, ps, provider=provider, sleep=lambda _: None)
        assert out[0].status is ResponseStatus.TRANSPORT_ERROR

    def test_in_flight_never_exceeds_bound(self):
        ps = prompts(24)
        replies = replies_for(ps)
        bound = 3
        lock = threading.Lock()
        state = {"now": 0, "peak": 0}

        class Probe:
            def complete(self, prompt):
                with lock:
                    state["now"] += 1
                    state["peak"] = max(state["peak"], state["now"])
                time.sleep(0.002)
                with lock:
                    state["now"] -= 1
                return replies[prompt_key(prompt)], "fp", 0.0

        cfg = ProviderConfig(kind="mock", mock_replies_path="p", max_in_flight=bound)
        out = annotate_batch(cfg, ps, provider=Probe())
        assert state["peak"] <= bound
        assert [r.segment_id for r in out] == [p.segment_id for p in ps]

    def test_order_survives_variable_completion_times(self):
        ps = prompts(12)
        replies = replies_for(ps)

        class Jittery:
            def complete(self, prompt):
                time.sleep(0.001 * (hash(prompt.segment_id) % 5))
                return replies[prompt_key(prompt)], None, 0.0

        cfg = ProviderConfig(kind="mock", mock_replies_path="p", max_in_flight=6)
        out = annotate_batch(cfg, ps, provider=Jittery())
        assert [r.segment_id for r in out] == [p.segment_id for p in ps]

    def test_backoff_sleep_called_per_retry(self):
        ps = prompts(1)
        sleeps = []
        provider = MockProvider(replies_for(ps), fail={prompt_key(ps[0]): 2})
        cfg = ProviderConfig(kind="mock", mock_replies_path="p", max_retries=2, backoff_base=0.01)
        out = annotate_batch(cfg, ps, provider=provider, sleep=sleeps.append)
        assert out[0].attempts == 3
        assert len(sleeps) == 2
        # exponential envelope with jitter in [base*2^k, 2*base*2^k)
        assert 0.01 <= sleeps[0] < 0.02
        assert 0.02 <= sleeps[1] < 0.04

    def test_ledger_written_in_order(self, tmp_path):
        ps = prompts(4)
        provider = MockProvider(replies_for(ps))
        ledger = tmp_path / "ledger.jsonl"
        out = annotate_batch(CFG, ps, provider=provider, ledger_path=ledger)
        assert read_ledger(ledger) == out
        more = annotate_batch(CFG, ps, provider=MockProvider(replies_for(ps)), ledger_path=ledger)
        assert read_ledger(ledger) == out + more  # append-only

    def test_config_validated_before_any_request(self, tmp_path):
        with pytest.raises(ConfigError):
            annotate_batch(
                ProviderConfig(kind="remote", endpoint="", model="m", credential_var="NOPE"),
                prompts(1), env={},
            )


class TestParseRate:
    def test_all_parsed(self):
        rs = [_resp(i) for i in range(10)]
        assert parse_rate(rs, [True] * 10) == 1.0

    def test_seven_of_ten(self):
        rs = [_resp(i) for i in range(10)]
        assert parse_rate(rs, [True] * 7 + [False] * 3) == 0.7

    def test_none_parsed(self):
        rs = [_resp(i) for i in range(5)]
        assert parse_rate(rs, [False] * 5) == 0.0

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            parse_rate([], [])

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            parse_rate([_resp(0)], [True, False])


def _resp(i, fingerprint=None):
    return RawResponse(f"seg-{i}", "m", fingerprint, "[]", 0.0, 1, ResponseStatus.OK)


class TestGroupByFingerprint:
    def test_single_group(self):
        groups = group_by_fingerprint([_resp(0, "fp_a"), _resp(1, "fp_a")])
        assert groups == {"fp_a": ["seg-0", "seg-1"]}

    def test_two_groups_sized_three_and_one(self):
        rs = [_resp(0, "fp_a"), _resp(1, "fp_a"), _resp(2, "fp_a"), _resp(3, "fp_b")]
        groups = group_by_fingerprint(rs)
        assert len(groups["fp_a"]) == 3 and len(groups["fp_b"]) == 1

    def test_missing_fingerprint_goes_to_sentinel(self):
        groups = group_by_fingerprint([_resp(0)])
        assert groups == {"unknown": ["seg-0"]}


def test_build_mock_replies_and_from_file(tmp_path):
    ps = prompts(2)
    table = build_mock_replies(ps, {"seg-0": "reply A", "seg-1": "reply B"})
    assert set(table) == {prompt_key(ps[0]), prompt_key(ps[1])}
    path = tmp_path / "replies.json"
    import json

    path.write_text(json.dumps({"replies": table, "fail": {}}), encoding="utf-8")
    provider = MockProvider.from_file(path)
    assert provider.complete(ps[0])[0] == "reply A"
