# -*- coding: utf-8 -*-
"""デバッグループ（参照解生成・反復修正・ゼロショット・再開・リプレイ）のテスト

LLM はすべて scripted フィクスチャで置き換える。
"""

import json

import pytest

from conftest import (
    BUGGY_SOURCE, CORRECT_SOURCE, SAMPLE_FAILING_SOURCE, SYNTAX_ERROR_SOURCE,
    python_solution, response_with,
)
from services.core.exceptions import ReferenceGenerationFailed
from services.core.models import OutcomeKind, PromptKind, Role
from services.differential.stress import StressConfig
from services.llm.gateway import ProviderConfig, ProviderKind, load_fixture
from services.orchestrator import (
    CompileStatus, DebugLoop, LoopConfig, SessionMode, SessionStatus, SessionStore, replay_session,
    session_slug,
)
from services.testgen.dsl import parse_generator_spec


SMALL_STRESS = StressConfig(max_random_cases=10, seed=1)


@pytest.fixture
def scripted(tmp_path):
    """応答テキストの列から scripted プロバイダ設定を作る"""
    counter = {"n": 0}

    def _scripted(responses):
        counter["n"] += 1
        path = tmp_path / f"fixture_{counter['n']}.json"
        path.write_text(json.dumps(responses), encoding="utf-8")
        return ProviderConfig(provider=ProviderKind.SCRIPTED, fixture_path=path)
    return _scripted


@pytest.fixture
def make_loop(config, sandbox, tmp_path):
    def _make(provider, session_name="session", **overrides):
        loop_cfg = LoopConfig(stress=SMALL_STRESS, provider=provider, reference_language="python",
                              **overrides)
        store = SessionStore(tmp_path / session_name) if session_name else None
        return DebugLoop(config, loop_cfg, sandbox=sandbox, store=store)
    return _make


@pytest.fixture
def reference():
    return python_solution(CORRECT_SOURCE, Role.REFERENCE)


# =========================================================
# 参照解の生成
# =========================================================

def test_reference_accepted_on_first_response(make_loop, scripted, problem):
    loop = make_loop(scripted([response_with(CORRECT_SOURCE)]), session_name=None)
    artifact = loop.generate_reference(problem)
    assert artifact.source == CORRECT_SOURCE
    assert artifact.role == Role.REFERENCE
    assert artifact.origin == "llm"


def test_reference_retried_after_sample_mismatch(make_loop, scripted, problem, tmp_path):
    loop = make_loop(scripted([response_with(SAMPLE_FAILING_SOURCE), response_with(CORRECT_SOURCE)]))
    loop.store.session_dir.mkdir(parents=True)
    artifact = loop.generate_reference(problem)
    assert artifact.source == CORRECT_SOURCE
    records = load_fixture(loop.store.transcript_path)
    assert [r["kind"] for r in records] == ["BruteForce", "BruteForce"]
    assert records[0]["prompt_hash"] != records[1]["prompt_hash"]


def test_reference_generation_gives_up(make_loop, scripted, problem):
    loop = make_loop(scripted([response_with(SAMPLE_FAILING_SOURCE)] * 4), session_name=None,
                     bruteforce_retries=3)
    with pytest.raises(ReferenceGenerationFailed):
        loop.generate_reference(problem)


def test_reference_failure_ends_session(make_loop, scripted, problem, buggy_solution):
    loop = make_loop(scripted([response_with(SAMPLE_FAILING_SOURCE)] * 2), bruteforce_retries=1)
    session = loop.run_depro(problem, buggy_solution)
    assert session.status == SessionStatus.REFERENCE_FAILED
    assert session.attempts == 0
    assert session.bruteforce_exchanges == 2


# =========================================================
# 反復デバッグ
# =========================================================

def test_fixed_on_third_attempt(make_loop, scripted, problem, buggy_solution, reference, sandbox):
    responses = [response_with(BUGGY_SOURCE), response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    session = loop.run_depro(problem, buggy_solution, reference=reference)

    assert session.status_label == "Fixed(3)"
    assert session.attempts == 3
    assert session.verdict_kinds() == ["Failure", "Failure", "NoMismatch"]
    assert session.initial_outcome.kind == OutcomeKind.FAILURE
    assert session.bruteforce_exchanges == 0
    assert (loop.store.session_dir / "session.log").exists()

    prompt = (loop.store.iteration_dir(1) / "prompt.txt").read_text(encoding="utf-8")
    assert "It failed in the test case:\nInput:\n100\n" in prompt
    assert BUGGY_SOURCE in prompt

    # 最終コードは改めてストレステストしても不一致なし
    final = python_solution(loop.store.load_iteration_code(session.iterations[-1]))
    outcome = loop.tester.stress_test(sandbox.compile(final), sandbox.compile(reference),
                                      parse_generator_spec(loop.store.load_generator_text()),
                                      problem, SMALL_STRESS)
    assert outcome.kind == OutcomeKind.NO_MISMATCH


def test_reference_from_llm_then_fixed(make_loop, scripted, problem, buggy_solution):
    responses = [response_with(CORRECT_SOURCE), response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    session = loop.run_depro(problem, buggy_solution)
    assert session.status_label == "Fixed(2)"
    assert session.attempts == 2
    assert session.bruteforce_exchanges == 1
    assert session.reference.origin == "llm"
    assert (loop.store.session_dir / "reference.py").read_text(encoding="utf-8") == CORRECT_SOURCE


def test_unfixed_after_budget(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)] * 8))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    assert session.status_label == "Unfixed(budget_exhausted)"
    assert session.attempts == 8
    assert len(session.iterations) == 8


def test_fixed_on_last_allowed_attempt(make_loop, scripted, problem, buggy_solution, reference, sandbox):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)] * 7 + [response_with(CORRECT_SOURCE)]))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    assert session.status_label == "Fixed(8)"
    assert session.fixed_iteration == 8
    assert session.attempts == 8
    assert session.verdict_kinds() == ["Failure"] * 7 + ["NoMismatch"]

    final = python_solution(loop.store.load_iteration_code(session.iterations[-1]))
    outcome = loop.tester.stress_test(sandbox.compile(final), sandbox.compile(reference),
                                      parse_generator_spec(loop.store.load_generator_text()),
                                      problem, SMALL_STRESS)
    assert outcome.kind == OutcomeKind.NO_MISMATCH


def test_already_consistent_needs_no_llm(make_loop, scripted, problem, reference):
    loop = make_loop(scripted([]))
    session = loop.run_depro(problem, python_solution(CORRECT_SOURCE), reference=reference)
    assert session.status == SessionStatus.ALREADY_CONSISTENT
    assert session.attempts == 0
    assert session.iterations == []
    assert session.initial_outcome.kind == OutcomeKind.NO_MISMATCH
    assert session.initial_outcome.cases_run > 10


def test_candidate_compile_error_aborts(make_loop, scripted, problem, reference):
    loop = make_loop(scripted([]))
    session = loop.run_depro(problem, python_solution(SYNTAX_ERROR_SOURCE), reference=reference)
    assert session.status_label == "Aborted(compile)"
    assert session.attempts == 0
    assert "SyntaxError" in session.candidate_diagnostics
    assert "candidate_diagnostics" not in session.config_snapshot
    loaded = SessionStore(loop.store.session_dir).load()
    assert loaded.candidate_diagnostics == session.candidate_diagnostics


def test_missing_code_block_is_asked_once_more(make_loop, scripted, problem, buggy_solution, reference):
    responses = ["The loop bound looks wrong to me.", response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    assert session.status_label == "Fixed(1)"
    assert session.attempts == 2
    assert session.iterations[0].exchanges == 2


def test_compile_error_is_fed_back(make_loop, scripted, problem, buggy_solution, reference):
    responses = [response_with(SYNTAX_ERROR_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    assert session.status_label == "Fixed(2)"
    assert session.iterations[0].compile_status == CompileStatus.CE
    prompt = (loop.store.iteration_dir(2) / "prompt.txt").read_text(encoding="utf-8")
    assert "It failed to compile:" in prompt
    assert "Input:\n100\n" in prompt


def test_exhausted_script_aborts(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)]))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    assert session.status == SessionStatus.ABORTED
    assert session.status_label.startswith("Aborted(provider:")
    assert len(session.iterations) == 1


def test_zero_shot_fixed_first_try(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(CORRECT_SOURCE)]))
    session = loop.run_zero_shot(problem, buggy_solution, reference=reference)
    assert session.mode == SessionMode.ZERO_SHOT
    assert session.status_label == "Fixed(1)"
    assert session.iterations[0].prompt_kind == PromptKind.ZERO_SHOT_DEBUG
    prompt = (loop.store.iteration_dir(1) / "prompt.txt").read_text(encoding="utf-8")
    assert "Can you debug my code?" in prompt
    assert "Expected Output" not in prompt


def test_zero_shot_and_depro_fixed_on_third_attempt(make_loop, scripted, problem, buggy_solution,
                                                    reference):
    responses = [response_with(BUGGY_SOURCE), response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    zero_shot = make_loop(scripted(responses), session_name="zero_shot").run_zero_shot(
        problem, buggy_solution, reference=reference)
    depro = make_loop(scripted(responses), session_name="depro").run_depro(
        problem, buggy_solution, reference=reference)

    assert zero_shot.mode == SessionMode.ZERO_SHOT
    assert zero_shot.status_label == depro.status_label == "Fixed(3)"
    assert zero_shot.attempts == depro.attempts == 3
    assert all(r.prompt_kind == PromptKind.ZERO_SHOT_DEBUG for r in zero_shot.iterations)


def test_zero_shot_unfixed_after_budget(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)] * 8))
    session = loop.run_zero_shot(problem, buggy_solution, reference=reference)
    assert session.status_label == "Unfixed(budget_exhausted)"
    assert session.attempts == 8
    assert session.verdict_kinds() == ["Failure"] * 8


def test_session_round_trips_through_store(make_loop, scripted, problem, buggy_solution, reference):
    responses = [response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    session = loop.run_depro(problem, buggy_solution, reference=reference)
    loaded = SessionStore(loop.store.session_dir).load()
    assert loaded.status_label == session.status_label
    assert loaded.attempts == session.attempts
    assert loaded.code_digests() == session.code_digests()
    assert loaded.reference.source == CORRECT_SOURCE
    assert loaded.iterations[0].failure_in.test.input.startswith("100\n")


@pytest.mark.parametrize("problem_id, expected", [
    ("sum-of-array", "sum-of-array"),
    ("../../etc/passwd", "etc_passwd"),
    ("abc 123/x", "abc_123_x"),
    ("..", "problem"),
])
def test_session_slug(problem_id, expected):
    assert session_slug(problem_id) == expected


def test_session_directory_stays_under_root(tmp_path):
    store = SessionStore.create(tmp_path, "../evil/x", SessionMode.DEPRO)
    assert store.session_dir.parent == tmp_path
    assert store.session_dir.name.startswith("evil_x_depro_")


# =========================================================
# 再開とリプレイ
# =========================================================

def test_resume_continues_after_last_iteration(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)]))
    first = loop.run_depro(problem, buggy_solution, reference=reference)
    assert len(first.iterations) == 1

    # 中断されたセッションとして扱う
    session_json = loop.store.session_path
    data = json.loads(session_json.read_text(encoding="utf-8"))
    data["status"], data["status_detail"] = "Running", ""
    session_json.write_text(json.dumps(data), encoding="utf-8")

    resumed_loop = make_loop(scripted([response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]),
                             session_name=None)
    session = resumed_loop.resume(loop.store.session_dir)
    assert session.status_label == "Fixed(2)"
    assert session.attempts == 2
    assert [record.index for record in session.iterations] == [1, 2]


def test_resume_of_finished_session_is_noop(make_loop, scripted, problem, buggy_solution, reference):
    loop = make_loop(scripted([response_with(CORRECT_SOURCE)]))
    loop.run_depro(problem, buggy_solution, reference=reference)
    session = make_loop(scripted([]), session_name=None).resume(loop.store.session_dir)
    assert session.status_label == "Fixed(1)"


def test_replay_reproduces_session(make_loop, scripted, problem, buggy_solution, config, tmp_path):
    responses = [response_with(CORRECT_SOURCE), response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    original = loop.run_depro(problem, buggy_solution)

    result = replay_session(loop.store.session_dir, config, output_dir=tmp_path / "replay")
    assert result.reproduced, result.differences
    assert result.replayed.status_label == original.status_label
    assert result.replayed.attempts == original.attempts
    assert result.to_dict()["reproduced"] is True


def test_replay_detects_changed_transcript(make_loop, scripted, problem, buggy_solution, reference,
                                           config, tmp_path):
    responses = [response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    loop.run_depro(problem, buggy_solution, reference=reference)

    transcript = loop.store.transcript_path
    records = json.loads(transcript.read_text(encoding="utf-8"))
    records[1]["response"] = records[1]["response"].replace("print(sum(a))", "print(sum(a) + 1)")
    transcript.write_text(json.dumps(records), encoding="utf-8")

    result = replay_session(loop.store.session_dir, config, output_dir=tmp_path / "replay")
    assert not result.reproduced
    assert any(d.startswith("status:") for d in result.differences)


def test_replay_reproduces_aborted_session(make_loop, scripted, problem, buggy_solution, reference,
                                           config, tmp_path):
    loop = make_loop(scripted([response_with(BUGGY_SOURCE)]))
    original = loop.run_depro(problem, buggy_solution, reference=reference)
    assert original.status == SessionStatus.ABORTED

    result = replay_session(loop.store.session_dir, config, output_dir=tmp_path / "replay")
    assert result.reproduced, result.differences
    assert result.replayed.status == SessionStatus.ABORTED
    assert result.replayed.replay_key == original.replay_key == "Aborted(provider)"
    assert result.replayed.attempts == 1
    assert result.replayed.verdict_kinds() == ["Failure"]


def test_replay_makes_no_network_calls(make_loop, scripted, problem, buggy_solution, config, tmp_path,
                                       monkeypatch):
    from services.llm import gateway as gateway_module

    responses = [response_with(CORRECT_SOURCE), response_with(BUGGY_SOURCE), response_with(CORRECT_SOURCE)]
    loop = make_loop(scripted(responses))
    loop.run_depro(problem, buggy_solution)

    calls = []
    monkeypatch.setattr(gateway_module.requests, "post", lambda *a, **k: calls.append((a, k)))
    result = replay_session(loop.store.session_dir, config, output_dir=tmp_path / "replay")
    assert result.reproduced, result.differences
    assert calls == []
