# -*- coding: utf-8 -*-
"""プロンプト生成・コード抽出・LLM ゲートウェイのテスト（ネットワークなし）"""

import json

import pytest
import requests

from conftest import BUGGY_SOURCE, python_solution
from services.core.exceptions import NoCodeBlock, ProviderError, ReplayMiss, ScriptExhausted, ValidationError
from services.core.models import CaseOrigin, Failure, PromptKind, Role, TestCase, sha256_hex
from services.llm import gateway as gateway_module
from services.llm.extraction import extract_code, find_code_blocks
from services.llm.gateway import LLMGateway, ProviderConfig, ProviderKind, TranscriptRecorder, load_fixture
from services.llm.prompts import (
    append_sample_mismatch, build_bruteforce_prompt, build_failure_debug_prompt,
    build_zero_shot_debug_prompt, fenced, with_single_block_reminder,
)


def make_failure(text="1 2 3 4\n", actual="2\n", expected="4\n", verdict="WA"):
    return Failure(test=TestCase(input=text, origin=CaseOrigin.random(0, 3)),
                   expected=expected, actual=actual, verdict=verdict)


def write_fixture(tmp_path, records, name="fixture.json"):
    path = tmp_path / name
    path.write_text(json.dumps(records), encoding="utf-8")
    return path


# =========================================================
# プロンプト
# =========================================================

def test_bruteforce_prompt(problem):
    prompt = build_bruteforce_prompt(problem)
    assert "brute-force solution" in prompt
    assert "pass all sample test cases" in prompt
    assert "Sample Input 1:" in prompt and "Sample Input 2:" in prompt
    assert prompt == build_bruteforce_prompt(problem)


def test_bruteforce_prompt_names_language(problem):
    assert "Write it in Python 3" in build_bruteforce_prompt(problem, "python")
    assert "Write it in C++" in build_bruteforce_prompt(problem, "cpp")


def test_zero_shot_prompt_asks_to_debug_not_rewrite(problem):
    candidate = python_solution(BUGGY_SOURCE)
    prompt = build_zero_shot_debug_prompt(problem, candidate)
    assert BUGGY_SOURCE in prompt
    assert "I got wrong answer. Can you debug my code?" in prompt
    assert "rather than writing a new solution" in prompt
    assert "Expected Output" not in prompt


def test_failure_prompt_layout():
    candidate = python_solution(BUGGY_SOURCE)
    prompt = build_failure_debug_prompt(candidate, make_failure())
    assert prompt.startswith("This is my code.\n")
    assert "It failed in the test case:\nInput:\n1 2 3 4\nOutput:\n2\nExpected Output:\n4\n" in prompt
    assert BUGGY_SOURCE in prompt
    assert "Verdict" not in prompt
    assert prompt == build_failure_debug_prompt(candidate, make_failure())


def test_failure_prompt_keeps_multiline_input():
    prompt = build_failure_debug_prompt(python_solution(BUGGY_SOURCE), make_failure(text="2\n1 2\n3 4\n"))
    assert "Input:\n2\n1 2\n3 4\nOutput:" in prompt


def test_failure_prompt_reports_runtime_verdict_and_compile_errors(problem):
    failure = make_failure(actual="", verdict="RE(3)")
    prompt = build_failure_debug_prompt(python_solution(BUGGY_SOURCE), failure, problem,
                                        diagnostics="SyntaxError: invalid syntax")
    assert prompt.startswith("Problem Statement:")
    assert "It failed to compile:" in prompt
    assert "SyntaxError: invalid syntax" in prompt
    assert "Verdict: RE(3)" in prompt


def test_fence_outgrows_backticks_in_source():
    block = fenced("s = '```'\n", "python")
    assert block.startswith("````python\n")
    assert find_code_blocks(block) == [("python", "s = '```'\n")]


def test_sample_mismatch_and_reminder(problem):
    base = build_bruteforce_prompt(problem)
    retry = append_sample_mismatch(base, python_solution("print(0)\n", Role.REFERENCE), 1, "7\n", "0\n")
    assert retry.startswith(base)
    assert "It failed on Sample Input 2 (WA)." in retry
    assert with_single_block_reminder(base).endswith("no other code blocks in the reply.\n")


# =========================================================
# コード抽出
# =========================================================

def test_single_cpp_block():
    artifact = extract_code("Fixed:\n```cpp\nint main(){}\n```\n", "python")
    assert artifact.source == "int main(){}\n"
    assert artifact.language == "cpp"
    assert artifact.origin == "llm"


def test_last_block_wins():
    response = "Idea:\n```python\nprint(1)\n```\nFinal:\n```python\nprint(2)\n```\n"
    assert extract_code(response, "python").source == "print(2)\n"


def test_untagged_block_uses_hint():
    assert extract_code("```\nprint(3)\n```", "python").language == "python"


def test_prose_only_is_no_code_block():
    with pytest.raises(NoCodeBlock):
        extract_code("I think the bug is in the loop bound.", "cpp")


def test_unclosed_block_is_ignored():
    with pytest.raises(NoCodeBlock):
        extract_code("```cpp\nint main(){}\n", "cpp")


def test_extracted_source_round_trips_into_prompt():
    source = "x = '``'\nprint(x)\n"
    artifact = extract_code(fenced(source, "python"), "python")
    prompt = build_failure_debug_prompt(artifact, make_failure())
    assert extract_code(prompt.split("It failed")[0], "python").source == source


# =========================================================
# ゲートウェイ
# =========================================================

def test_scripted_provider_returns_in_order(tmp_path):
    cfg = ProviderConfig(provider=ProviderKind.SCRIPTED,
                         fixture_path=write_fixture(tmp_path, ["fix-A", {"response": "fix-B"}]))
    gateway = LLMGateway(cfg)
    assert gateway.complete("p1", PromptKind.FAILURE_DEBUG).response == "fix-A"
    assert gateway.complete("p1", PromptKind.FAILURE_DEBUG).response == "fix-B"
    with pytest.raises(ScriptExhausted):
        gateway.complete("p1", PromptKind.FAILURE_DEBUG)


def test_recorded_transcript_replays(tmp_path):
    transcript = tmp_path / "transcript.json"
    scripted = ProviderConfig(provider=ProviderKind.SCRIPTED,
                              fixture_path=write_fixture(tmp_path, ["one", "two"]))
    recorder = TranscriptRecorder(transcript)
    live = LLMGateway(scripted, recorder)
    live.complete("first prompt", PromptKind.BRUTE_FORCE)
    live.complete("second prompt", PromptKind.FAILURE_DEBUG)

    records = load_fixture(transcript)
    assert [r["prompt_hash"] for r in records] == [sha256_hex("first prompt"), sha256_hex("second prompt")]
    assert records[1]["kind"] == "FailureDebug"

    replay = LLMGateway(ProviderConfig(provider=ProviderKind.REPLAY, fixture_path=transcript))
    assert replay.complete("second prompt", PromptKind.FAILURE_DEBUG).response == "two"
    assert replay.complete("first prompt", PromptKind.BRUTE_FORCE).response == "one"
    with pytest.raises(ReplayMiss) as info:
        replay.complete("never asked", PromptKind.FAILURE_DEBUG)
    assert info.value.prompt_hash == sha256_hex("never asked")


def test_replay_returns_repeated_prompts_in_order_then_misses(tmp_path):
    transcript = tmp_path / "transcript.json"
    transcript.write_text(json.dumps([
        {"prompt_hash": sha256_hex("same"), "response": "first"},
        {"prompt_hash": sha256_hex("same"), "response": "second"},
    ]), encoding="utf-8")
    replay = LLMGateway(ProviderConfig(provider=ProviderKind.REPLAY, fixture_path=transcript))
    assert replay.complete("same", PromptKind.FAILURE_DEBUG).response == "first"
    assert replay.complete("same", PromptKind.FAILURE_DEBUG).response == "second"
    with pytest.raises(ReplayMiss):
        replay.complete("same", PromptKind.FAILURE_DEBUG)


def test_credentials_must_be_an_env_name():
    cfg = ProviderConfig(endpoint="https://llm.invalid/v1", model_name="m", credentials_ref="sk-abc123")
    with pytest.raises(ValidationError):
        cfg.validate()


class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self._body = body
        self.text = json.dumps(body)

    def json(self):
        return self._body


def live_config():
    return ProviderConfig(endpoint="https://llm.invalid/v1/chat/completions", model_name="test-model",
                          credentials_ref="DEPRO_TEST_KEY", max_retries=2, retry_delay_s=0.0)


def test_live_provider_posts_chat_request(monkeypatch):
    calls = []

    def fake_post(url, headers=None, json=None, timeout=None):
        calls.append((url, headers, json, timeout))
        return FakeResponse(200, {"choices": [{"message": {"content": "```cpp\nint main(){}\n```"}}]})

    monkeypatch.setenv("DEPRO_TEST_KEY", "secret-value")
    monkeypatch.setattr(gateway_module.requests, "post", fake_post)
    exchange = LLMGateway(live_config()).complete("debug this", PromptKind.FAILURE_DEBUG)
    assert exchange.provider_id == "live:test-model"
    url, headers, payload, timeout = calls[0]
    assert headers["Authorization"] == "Bearer secret-value"
    assert payload["messages"] == [{"role": "user", "content": "debug this"}]
    assert payload["model"] == "test-model"
    assert timeout == 300.0


def test_live_provider_retries_transient_errors(monkeypatch):
    responses = [requests.exceptions.ConnectionError("down"), FakeResponse(503, {}),
                 FakeResponse(200, {"choices": [{"message": {"content": "ok"}}]})]

    def fake_post(*args, **kwargs):
        item = responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item

    monkeypatch.setenv("DEPRO_TEST_KEY", "k")
    monkeypatch.setattr(gateway_module.requests, "post", fake_post)
    assert LLMGateway(live_config()).complete("p", PromptKind.BRUTE_FORCE).response == "ok"
    assert responses == []


def test_live_provider_gives_up(monkeypatch):
    monkeypatch.setenv("DEPRO_TEST_KEY", "k")
    monkeypatch.setattr(gateway_module.requests, "post", lambda *a, **k: FakeResponse(500, {}))
    with pytest.raises(ProviderError):
        LLMGateway(live_config()).complete("p", PromptKind.BRUTE_FORCE)


def test_live_provider_does_not_retry_client_errors(monkeypatch):
    calls = []

    def fake_post(*args, **kwargs):
        calls.append(1)
        return FakeResponse(401, {"error": "bad key"})

    monkeypatch.setenv("DEPRO_TEST_KEY", "k")
    monkeypatch.setattr(gateway_module.requests, "post", fake_post)
    with pytest.raises(ProviderError):
        LLMGateway(live_config()).complete("p", PromptKind.BRUTE_FORCE)
    assert len(calls) == 1


def test_missing_credentials_is_provider_error(monkeypatch):
    monkeypatch.delenv("DEPRO_TEST_KEY", raising=False)
    with pytest.raises(ProviderError) as info:
        LLMGateway(live_config()).complete("p", PromptKind.BRUTE_FORCE)
    assert "DEPRO_TEST_KEY" in str(info.value)
