#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
デバッグループモジュール

1. ブルートフォース解（参照解）の生成とサンプルでの検証
2. 候補解と参照解のストレステストによる失敗ケースの特定
3. 失敗ケースを添えた LLM へのデバッグ依頼 → 再ストレステスト（最大 max_iterations 回）

比較用に、失敗ケースを渡さないゼロショットモードも同じループで実行できる。
"""

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from ..core.config import Config
from ..core.exceptions import (
    CompileError, InfrastructureFault, NoCodeBlock, ParseError, ProviderError,
    ReferenceGenerationFailed, ValidationError,
)
from ..core.logger import Logger
from ..core.models import (
    ChatExchange, Failure, OutcomeKind, ProblemSpec, PromptKind, Role, SolutionArtifact,
    StressOutcome,
)
from ..differential.shrink import shrink_failure
from ..differential.stress import StressConfig, StressTester
from ..llm.extraction import extract_code
from ..llm.gateway import LLMGateway, ProviderConfig, ProviderKind, TranscriptRecorder
from ..llm.prompts import (
    append_sample_mismatch, build_bruteforce_prompt, build_failure_debug_prompt,
    build_zero_shot_debug_prompt, with_single_block_reminder,
)
from ..sandbox.runner import CompiledProgram, Sandbox
from ..testgen.dsl import GeneratorSpec, parse_generator_spec
from .session import (
    CompileStatus, DebugSession, IterationRecord, SessionMode, SessionStatus, SessionStore,
)


@dataclass(frozen=True)
class LoopConfig:
    """デバッグループ設定"""
    max_iterations: int = 8
    bruteforce_retries: int = 3
    stress: StressConfig = field(default_factory=StressConfig)
    provider: Optional[ProviderConfig] = None
    shrink: bool = False
    shrink_budget: int = 200
    reference_language: str = "cpp"

    def validate(self):
        if self.max_iterations < 1:
            raise ValidationError("max_iterations ≥ 1", f"got {self.max_iterations}")
        if self.bruteforce_retries < 0:
            raise ValidationError("bruteforce_retries ≥ 0", f"got {self.bruteforce_retries}")
        self.stress.validate()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_iterations": self.max_iterations,
            "bruteforce_retries": self.bruteforce_retries,
            "shrink": self.shrink,
            "shrink_budget": self.shrink_budget,
            "reference_language": self.reference_language,
            "stress": {
                "max_random_cases": self.stress.max_random_cases,
                "seed": self.stress.seed,
                "run_edge_cases_first": self.stress.run_edge_cases_first,
                "include_samples_first": self.stress.include_samples_first,
                "reference_time_factor": self.stress.reference_time_factor,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], jobs: int = 1,
                  provider: Optional[ProviderConfig] = None) -> "LoopConfig":
        stress = data.get("stress", {})
        return cls(
            max_iterations=int(data.get("max_iterations", 8)),
            bruteforce_retries=int(data.get("bruteforce_retries", 3)),
            stress=StressConfig(
                max_random_cases=int(stress.get("max_random_cases", 500)),
                seed=int(stress.get("seed", 0)),
                run_edge_cases_first=bool(stress.get("run_edge_cases_first", True)),
                include_samples_first=bool(stress.get("include_samples_first", True)),
                jobs=jobs,
                reference_time_factor=stress.get("reference_time_factor"),
            ),
            provider=provider,
            shrink=bool(data.get("shrink", False)),
            shrink_budget=int(data.get("shrink_budget", 200)),
            reference_language=data.get("reference_language", "cpp"),
        )


@dataclass
class _LoopState:
    """次の反復で LLM に見せる内容"""
    prompt_code: SolutionArtifact
    failure: Failure
    diagnostics: Optional[str] = None
    next_index: int = 1


class DebugLoop:
    """DePro デバッグループ"""

    def __init__(self, config: Optional[Config] = None, loop_cfg: Optional[LoopConfig] = None,
                 gateway: Optional[LLMGateway] = None, sandbox: Optional[Sandbox] = None,
                 store: Optional[SessionStore] = None):
        self.config = config or Config()
        self.loop_cfg = loop_cfg or LoopConfig()
        self.loop_cfg.validate()
        self.sandbox = sandbox or Sandbox(self.config)
        self.tester = StressTester(self.sandbox)
        self.store = store
        self.gateway = gateway
        self.logger = Logger(__name__)
        self._pending_exchanges: List[ChatExchange] = []

    # =========================================================
    # LLM 呼び出し
    # =========================================================

    def _ensure_gateway(self) -> LLMGateway:
        if self.gateway is None:
            if self.loop_cfg.provider is None:
                raise ValidationError("provider configured", "no LLM provider for this session")
            recorder = TranscriptRecorder(self.store.transcript_path) if self.store else None
            self.gateway = LLMGateway(self.loop_cfg.provider, recorder)
        return self.gateway

    def _ask(self, prompt: str, kind: PromptKind, language_hint: str, role: Role,
             iteration: Optional[int] = None) -> Tuple[Optional[SolutionArtifact], List[ChatExchange]]:
        """応答からコードを取り出す（コードが無ければ1回だけ再依頼）"""
        gateway = self._ensure_gateway()
        exchanges = [gateway.complete(prompt, kind)]
        for attempt in range(2):
            try:
                artifact = extract_code(exchanges[-1].response, language_hint, role, iteration)
                artifact.validate()
                return artifact, exchanges
            except (NoCodeBlock, ValidationError):
                if attempt == 1:
                    break
                self.logger.warning("応答にコードブロックがありません。1回だけ再依頼します")
                exchanges.append(gateway.complete(with_single_block_reminder(prompt), kind))
        return None, exchanges

    # =========================================================
    # 1. 参照解の生成
    # =========================================================

    def generate_reference(self, spec: ProblemSpec) -> SolutionArtifact:
        """サンプルをすべて通るブルートフォース解を得る（リトライ付き）"""
        self.logger.log_phase_start("参照解生成", spec.id)
        started = time.monotonic()
        language = self.loop_cfg.reference_language
        base_prompt = build_bruteforce_prompt(spec, language)
        prompt = base_prompt
        ref_limits = self.tester.reference_limits(spec, self.loop_cfg.stress.reference_time_factor)
        total = self.loop_cfg.bruteforce_retries + 1

        for attempt in range(1, total + 1):
            artifact, exchanges = self._ask(prompt, PromptKind.BRUTE_FORCE, language, Role.REFERENCE)
            self._pending_exchanges.extend(exchanges)
            if artifact is None:
                self.logger.warning(f"参照解 {attempt}/{total}: コードを取得できませんでした")
                continue
            try:
                program = self.sandbox.compile(artifact)
            except CompileError as e:
                self.logger.warning(f"参照解 {attempt}/{total}: コンパイルエラー")
                prompt = append_sample_mismatch(base_prompt, artifact, 0, spec.samples[0].expected_output,
                                                e.diagnostics, verdict="CE")
                continue
            try:
                checks = self.tester.check_samples(program, spec, ref_limits)
            finally:
                self.sandbox.cleanup(program)
            failed = next((c for c in checks if not c.passed), None)
            if failed is None:
                self.logger.log_phase_end("参照解生成", True, time.monotonic() - started)
                return artifact
            self.logger.warning(f"参照解 {attempt}/{total}: サンプル {failed.index + 1} で "
                                f"{'WA' if failed.result.ok else failed.result.verdict()}")
            prompt = append_sample_mismatch(
                base_prompt, artifact, failed.index, failed.expected, failed.result.stdout,
                verdict="WA" if failed.result.ok else failed.result.verdict())

        self.logger.log_phase_end("参照解生成", False, time.monotonic() - started)
        raise ReferenceGenerationFailed(
            f"no brute-force solution passed all samples after {total} attempts")

    # =========================================================
    # 2-3. ストレステストと反復デバッグ
    # =========================================================

    def run_depro(self, spec: ProblemSpec, candidate: SolutionArtifact,
                  gen: Optional[GeneratorSpec] = None, generator_text: Optional[str] = None,
                  reference: Optional[SolutionArtifact] = None) -> DebugSession:
        return self._run(SessionMode.DEPRO, spec, candidate, gen, generator_text, reference)

    def run_zero_shot(self, spec: ProblemSpec, candidate: SolutionArtifact,
                      gen: Optional[GeneratorSpec] = None, generator_text: Optional[str] = None,
                      reference: Optional[SolutionArtifact] = None) -> DebugSession:
        return self._run(SessionMode.ZERO_SHOT, spec, candidate, gen, generator_text, reference)

    def _load_generator(self, spec: ProblemSpec, gen: Optional[GeneratorSpec],
                        generator_text: Optional[str]) -> Tuple[GeneratorSpec, str]:
        if generator_text is None:
            path = spec.resolve_generator_path()
            try:
                generator_text = path.read_text(encoding="utf-8")
            except OSError as e:
                raise ParseError(f"cannot read generator spec {path}: {e}", field="generator") from e
        if gen is None:
            gen = parse_generator_spec(generator_text)
        return gen, generator_text

    def _run(self, mode: SessionMode, spec: ProblemSpec, candidate: SolutionArtifact,
             gen: Optional[GeneratorSpec], generator_text: Optional[str],
             reference: Optional[SolutionArtifact]) -> DebugSession:
        candidate.validate()
        gen, generator_text = self._load_generator(spec, gen, generator_text)
        if self.store is None:
            self.config.ensure_directories()
            self.store = SessionStore.create(self.config.sessions_dir, spec.id, mode)
        self.store.write_inputs(spec, generator_text, candidate)

        session = DebugSession(problem_id=spec.id, mode=mode, candidate_initial=candidate,
                               config_snapshot=self.config.snapshot(),
                               loop_config=self.loop_cfg.to_dict())
        if reference is not None:
            session.reference = reference.as_role(Role.REFERENCE)
            self.store.write_reference(session.reference)
        self.store.save(session)
        self.logger.log_operation("セッション開始", {"mode": mode.value, "problem": spec.id,
                                                    "dir": self.store.session_dir})
        return self._drive(session, spec, gen, state=None)

    def resume(self, session_dir: Union[str, Path]) -> DebugSession:
        """中断したセッションを最後に完了した反復の次から再開"""
        self.store = SessionStore(session_dir)
        session = self.store.load()
        if session.status.is_terminal:
            self.logger.info(f"セッションは終了済みです: {session.status_label}")
            return session
        spec = self.store.load_problem()
        gen = parse_generator_spec(self.store.load_generator_text())
        if self.gateway is None and self.loop_cfg.provider is not None:
            recorder = TranscriptRecorder(self.store.transcript_path, resume=True)
            self.gateway = LLMGateway(self.loop_cfg.provider, recorder)
            self.gateway.skip(len(recorder.records))

        state = None
        if session.iterations:
            last = session.iterations[-1]
            if last.stress_out is not None and last.stress_out.kind == OutcomeKind.NO_MISMATCH:
                session.finish(SessionStatus.FIXED, str(last.index))
                self.store.save(session)
                return session
            code = SolutionArtifact(self.store.load_iteration_code(last), last.language,
                                    Role.CANDIDATE, "llm", last.index)
            if last.compile_status == CompileStatus.OK and last.stress_out and last.stress_out.is_failing:
                state = _LoopState(code, last.stress_out.as_failure(), None, last.index + 1)
            elif last.compile_status == CompileStatus.CE:
                state = _LoopState(code, last.failure_in, last.diagnostics, last.index + 1)
            else:
                state = _LoopState(code, last.failure_in, None, last.index + 1)
        self.logger.log_operation("セッション再開", {"dir": session_dir,
                                                    "completed": len(session.iterations)})
        return self._drive(session, spec, gen, state)

    def _drive(self, session: DebugSession, spec: ProblemSpec, gen: GeneratorSpec,
               state: Optional[_LoopState]) -> DebugSession:
        started = time.monotonic() - session.wall_ms_total / 1000.0
        programs: List[CompiledProgram] = []
        with Logger.session_log(self.store.session_dir):
            try:
                self._execute(session, spec, gen, state, programs)
            except ProviderError as e:
                self.logger.error(f"LLM プロバイダエラー: {e}")
                session.finish(SessionStatus.ABORTED, f"provider: {e}")
            except InfrastructureFault as e:
                self.logger.error(f"実行基盤エラー: {e}")
                session.finish(SessionStatus.ABORTED, f"infrastructure: {e}")
            finally:
                for program in programs:
                    self.sandbox.cleanup(program)
                self._account_pending(session)
                session.wall_ms_total = int((time.monotonic() - started) * 1000)
                self.store.save(session)
        self.logger.info(f"セッション終了: {session.status_label}, attempts={session.attempts}")
        return session

    def _account_pending(self, session: DebugSession):
        for exchange in self._pending_exchanges:
            if exchange.kind == PromptKind.BRUTE_FORCE:
                session.bruteforce_exchanges += 1
        self._pending_exchanges = []

    def _stress(self, candidate: CompiledProgram, reference: CompiledProgram, gen: GeneratorSpec,
                spec: ProblemSpec) -> StressOutcome:
        return self.tester.stress_test(candidate, reference, gen, spec, self.loop_cfg.stress)

    def _failure_of(self, outcome: StressOutcome, gen: GeneratorSpec, spec: ProblemSpec,
                    candidate: CompiledProgram, reference: CompiledProgram) -> Failure:
        failure = outcome.as_failure()
        if self.loop_cfg.shrink:
            failure = shrink_failure(failure, gen, spec, candidate, reference,
                                     self.loop_cfg.shrink_budget, self.sandbox)
        return failure

    def _execute(self, session: DebugSession, spec: ProblemSpec, gen: GeneratorSpec,
                 state: Optional[_LoopState], programs: List[CompiledProgram]):
        # 候補解がコンパイルできなければ開始しない
        try:
            candidate_program = self.sandbox.compile(session.candidate_initial)
            programs.append(candidate_program)
        except CompileError as e:
            self.logger.error("最初の候補解がコンパイルできません")
            session.finish(SessionStatus.ABORTED, "compile")
            session.candidate_diagnostics = e.diagnostics
            return

        # 1. 参照解
        if session.reference is None:
            try:
                session.reference = self.generate_reference(spec)
            except ReferenceGenerationFailed as e:
                self.logger.error(str(e))
                session.finish(SessionStatus.REFERENCE_FAILED, "samples")
                return
            finally:
                self._account_pending(session)
            self.store.write_reference(session.reference)
            self.store.save(session)
        try:
            reference_program = self.sandbox.compile(session.reference)
            programs.append(reference_program)
        except CompileError:
            session.finish(SessionStatus.REFERENCE_FAILED, "compile")
            return

        # 2. 最初のストレステスト
        if state is None:
            self.logger.log_phase_start("ストレステスト", "initial candidate")
            outcome = self._stress(candidate_program, reference_program, gen, spec)
            session.initial_outcome = outcome
            self.store.save(session)
            if outcome.kind == OutcomeKind.NO_MISMATCH:
                session.finish(SessionStatus.ALREADY_CONSISTENT)
                return
            if outcome.kind == OutcomeKind.REFERENCE_FAULT:
                session.finish(SessionStatus.REFERENCE_FAILED, "fault")
                return
            failure = self._failure_of(outcome, gen, spec, candidate_program, reference_program)
            state = _LoopState(session.candidate_initial, failure)

        # 3. 反復デバッグ
        kind = session.mode.prompt_kind
        self.logger.log_phase_start("反復デバッグ", f"{session.mode.value}, max {self.loop_cfg.max_iterations}")
        for index in range(state.next_index, self.loop_cfg.max_iterations + 1):
            iteration_started = time.monotonic()
            if session.mode == SessionMode.DEPRO:
                prompt = build_failure_debug_prompt(state.prompt_code, state.failure, spec,
                                                    state.diagnostics)
            else:
                prompt = build_zero_shot_debug_prompt(spec, state.prompt_code)

            artifact, exchanges = self._ask(prompt, kind, state.prompt_code.language,
                                            Role.CANDIDATE, index)
            session.attempts += len(exchanges)
            record = IterationRecord(
                index=index, failure_in=state.failure, prompt_kind=kind,
                prompt_hashes=[e.prompt_hash for e in exchanges],
                compile_status=CompileStatus.NO_CODE, code_sha256=state.prompt_code.digest,
                language=state.prompt_code.language,
            )
            code = state.prompt_code
            if artifact is not None:
                code = artifact
                record.code_sha256 = artifact.digest
                record.language = artifact.language
                try:
                    program = self.sandbox.compile(artifact)
                except CompileError as e:
                    record.compile_status = CompileStatus.CE
                    record.diagnostics = e.diagnostics
                    state = _LoopState(artifact, state.failure, e.diagnostics, index + 1)
                else:
                    record.compile_status = CompileStatus.OK
                    try:
                        outcome = self._stress(program, reference_program, gen, spec)
                        record.stress_out = outcome
                        if outcome.is_failing:
                            state = _LoopState(artifact, self._failure_of(
                                outcome, gen, spec, program, reference_program), None, index + 1)
                    finally:
                        self.sandbox.cleanup(program)
            else:
                state = _LoopState(state.prompt_code, state.failure, None, index + 1)

            record.wall_ms = int((time.monotonic() - iteration_started) * 1000)
            session.iterations.append(record)
            self.store.write_iteration(record, exchanges[-1].prompt, exchanges[-1].response, code.source)
            self.store.save(session)
            self.logger.info(f"反復 {index}: {record.verdict_kind()} ({record.wall_ms} ms)")

            if record.stress_out is not None:
                if record.stress_out.kind == OutcomeKind.NO_MISMATCH:
                    session.finish(SessionStatus.FIXED, str(index))
                    return
                if record.stress_out.kind == OutcomeKind.REFERENCE_FAULT:
                    session.finish(SessionStatus.REFERENCE_FAILED, "fault")
                    return

        session.finish(SessionStatus.UNFIXED, "budget_exhausted")


# =========================================================
# リプレイ
# =========================================================

@dataclass
class ReplayResult:
    """記録済みセッションとリプレイ結果の比較"""
    original: DebugSession
    replayed: DebugSession
    differences: List[str] = field(default_factory=list)

    @property
    def reproduced(self) -> bool:
        return not self.differences

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reproduced": self.reproduced,
            "original": {"status": self.original.status_label, "attempts": self.original.attempts},
            "replayed": {"status": self.replayed.status_label, "attempts": self.replayed.attempts},
            "differences": list(self.differences),
        }


def compare_sessions(original: DebugSession, replayed: DebugSession) -> List[str]:
    """状態の種別・試行回数・反復ごとの判定とコードが一致するか（メッセージ本文は比較しない）"""
    differences = []
    if original.replay_key != replayed.replay_key:
        differences.append(f"status: {original.replay_key} != {replayed.replay_key}")
    if original.attempts != replayed.attempts:
        differences.append(f"attempts: {original.attempts} != {replayed.attempts}")
    if original.verdict_kinds() != replayed.verdict_kinds():
        differences.append(f"verdicts: {original.verdict_kinds()} != {replayed.verdict_kinds()}")
    ref_a = original.reference.digest if original.reference else None
    ref_b = replayed.reference.digest if replayed.reference else None
    if ref_a != ref_b:
        differences.append("reference: source differs")
    for i, (a, b) in enumerate(zip(original.code_digests(), replayed.code_digests()), start=1):
        if a != b:
            differences.append(f"iteration {i}: code sha256 {a[:12]} != {b[:12]}")
    return differences


def replay_session(session_dir: Union[str, Path], config: Optional[Config] = None,
                   jobs: int = 1, output_dir: Optional[Path] = None) -> ReplayResult:
    """transcript.json をフィクスチャにしてセッションを再実行し、結果を比較"""
    config = config or Config()
    source = SessionStore(session_dir)
    if not source.transcript_path.exists():
        raise ParseError("transcript.json not found", field=str(source.transcript_path))
    original = source.load()
    spec = source.load_problem()
    generator_text = source.load_generator_text()

    provider = ProviderConfig(provider=ProviderKind.REPLAY, fixture_path=source.transcript_path)
    loop_cfg = LoopConfig.from_dict(original.loop_config, jobs=jobs, provider=provider)
    if output_dir is None:
        output_dir = source.session_dir.parent / f"{source.session_dir.name}_replay_{int(time.time())}"
    store = SessionStore(output_dir)
    loop = DebugLoop(config, loop_cfg, store=store)

    # 利用者が与えた参照解は LLM を経由しない
    reference = original.reference if original.reference and original.reference.origin == "user" else None
    candidate = original.candidate_initial
    if original.mode == SessionMode.DEPRO:
        replayed = loop.run_depro(spec, candidate, generator_text=generator_text, reference=reference)
    else:
        replayed = loop.run_zero_shot(spec, candidate, generator_text=generator_text, reference=reference)
    return ReplayResult(original, replayed, compare_sessions(original, replayed))
