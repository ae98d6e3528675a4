#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
DePro コマンドラインツール メインコントローラー

処理フロー:
1. 問題定義（problem.spec）と入力生成 DSL（gen.dsl）を用意する   … init / gen
2. 候補解と参照解をストレステストして失敗ケースを探す             … stress
3. 失敗ケースを添えて LLM にデバッグを依頼し、最大8回まで繰り返す   … fix / zero-shot
4. 記録したセッションの再現確認と比較レポート                     … replay / report

終了コード: 0 成功 / 1 未修正・不一致 / 2 入力・使い方の誤り / 3 実行基盤のエラー
"""

import argparse
import json
import shutil
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# プロジェクトルートをPythonパスに追加
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from services.core.config import Config
from services.core.exceptions import (
    CompileError, InfrastructureFault, InputFault, ReferenceGenerationFailed, ValidationError,
)
from services.core.logger import Logger
from services.core.models import OutcomeKind, Role, SolutionArtifact
from services.differential.shrink import shrink_failure
from services.differential.stress import StressConfig, StressTester
from services.llm.gateway import LLMGateway, ProviderConfig, ProviderKind
from services.orchestrator.loop import DebugLoop, LoopConfig, replay_session
from services.orchestrator.report import (
    build_report, comparison_table, export_excel, load_baseline,
)
from services.orchestrator.session import SessionStatus, SessionStore
from services.problem.problem_model import PROBLEM_FILENAME, load_problem_dir
from services.sandbox.runner import Sandbox
from services.testgen.dsl import load_generator_spec
from services.testgen.generator import generate_edge_cases, iter_random
from services.testgen.validator import parse_case


EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INFRA = 3

TEMPLATES_DIR = project_root / "templates"
TEMPLATE_FILES = (PROBLEM_FILENAME, "gen.dsl")

STATUS_EXIT = {
    SessionStatus.FIXED: EXIT_OK,
    SessionStatus.ALREADY_CONSISTENT: EXIT_OK,
    SessionStatus.UNFIXED: EXIT_MISMATCH,
    SessionStatus.REFERENCE_FAILED: EXIT_INFRA,
    SessionStatus.ABORTED: EXIT_INFRA,
    SessionStatus.RUNNING: EXIT_INFRA,
}


class DeproCLI:
    """DePro CLI のメインクラス"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = Config(Path(args.config) if args.config else None)
        if args.log_level:
            Logger.set_level(args.log_level)
        self.logger = Logger(__name__)

    # =========================================================
    # 出力
    # =========================================================

    def emit(self, text: str, record: Optional[Dict[str, Any]] = None):
        """人間向けの出力、--json の場合は1行1レコード"""
        if self.args.json:
            if record is not None:
                print(json.dumps(record, ensure_ascii=False), flush=True)
        else:
            print(text, flush=True)

    def check_configuration(self):
        result = self.config.validate_configuration()
        for warning in result["warnings"]:
            self.logger.warning(warning)
        if not result["valid"]:
            raise ValidationError("tool config valid", "; ".join(result["errors"]))

    # =========================================================
    # 共通の組み立て
    # =========================================================

    def load_solution(self, path: str, role: Role) -> SolutionArtifact:
        source_path = Path(path)
        try:
            source = source_path.read_text(encoding="utf-8")
        except OSError as e:
            raise ValidationError(f"{role.value} source readable", str(e)) from e
        language = getattr(self.args, "language", None) if role == Role.CANDIDATE else None
        language = language or self.config.language_for_extension(source_path.suffix)
        if language is None:
            raise ValidationError("known source language", f"cannot infer language of {source_path}")
        artifact = SolutionArtifact(source=source, language=language, role=role, origin="user")
        artifact.validate()
        return artifact

    def provider_config(self, required: bool) -> Optional[ProviderConfig]:
        """--provider / --fixture から ProviderConfig を作る（未指定なら None）"""
        provider = self.args.provider
        if provider is None:
            if self.args.fixture:
                provider = ProviderKind.SCRIPTED.value
            elif required:
                provider = ProviderKind.LIVE.value
            else:
                return None
        cfg = ProviderConfig.from_config(self.config, provider, self.args.fixture,
                                         self.args.model, self.args.endpoint)
        cfg.validate()
        return cfg

    def stress_config(self) -> StressConfig:
        cfg = StressConfig(max_random_cases=self.args.cases, seed=self.args.seed,
                           jobs=self.args.jobs)
        cfg.validate()
        return cfg

    def loop_config(self, provider: Optional[ProviderConfig]) -> LoopConfig:
        loop_cfg = LoopConfig(max_iterations=self.args.max_iter, stress=self.stress_config(),
                              provider=provider, shrink=self.args.shrink,
                              shrink_budget=self.args.shrink_budget,
                              reference_language=self.args.reference_language)
        loop_cfg.validate()
        return loop_cfg

    # =========================================================
    # コマンド
    # =========================================================

    def cmd_init(self) -> int:
        """テンプレートの problem.spec と gen.dsl を書き出す"""
        target = Path(self.args.dir)
        if target.exists() and any(target.iterdir()) and not self.args.force:
            raise ValidationError("init target empty", f"{target} is not empty (use --force)")
        target.mkdir(parents=True, exist_ok=True)
        written = []
        for name in TEMPLATE_FILES:
            destination = target / name
            shutil.copyfile(TEMPLATES_DIR / name, destination)
            self.logger.log_file_operation("作成", destination)
            written.append(str(destination))
        self.emit("\n".join(f"created {path}" for path in written),
                  {"command": "init", "files": written})
        return EXIT_OK

    def cmd_gen(self) -> int:
        """生成した入力を標準出力に表示（DSL の確認用）"""
        spec = load_problem_dir(self.args.problem_dir)
        gen = load_generator_spec(spec.resolve_generator_path())
        if self.args.edge:
            cases = generate_edge_cases(gen)
        else:
            cases = list(iter_random(gen, self.args.seed, self.args.count, self.args.start_index))

        invalid = 0
        for case in cases:
            error = None
            if self.args.validate:
                try:
                    parse_case(gen, case.input)
                except InputFault as e:
                    invalid += 1
                    error = str(e)
            text = f"# {case.origin.describe()}\n{case.input}"
            if error:
                text += f"# INVALID: {error}\n"
            self.emit(text.rstrip("\n"), {"command": "gen", "origin": case.origin.to_dict(),
                                          "input": case.input, "error": error})
        self.logger.log_data_processing("入力生成", len(cases), {"invalid": invalid})
        return EXIT_MISMATCH if invalid else EXIT_OK

    def cmd_stress(self) -> int:
        """候補解と参照解のストレステスト"""
        spec = load_problem_dir(self.args.problem_dir)
        gen = load_generator_spec(spec.resolve_generator_path())
        candidate = self.load_solution(self.args.candidate, Role.CANDIDATE)
        stress_cfg = self.stress_config()

        if self.args.reference:
            reference = self.load_solution(self.args.reference, Role.REFERENCE)
        else:
            provider = self.provider_config(required=False)
            if provider is None:
                raise ValidationError("reference source", "pass --reference or configure --provider")
            loop = DebugLoop(self.config, LoopConfig(stress=stress_cfg, provider=provider,
                                                     reference_language=self.args.reference_language),
                             gateway=LLMGateway(provider))
            reference = loop.generate_reference(spec)

        sandbox = Sandbox(self.config)
        tester = StressTester(sandbox)
        programs = []
        try:
            try:
                candidate_program = sandbox.compile(candidate)
                programs.append(candidate_program)
            except CompileError as e:
                self.emit(f"candidate: compile error\n{e.diagnostics}",
                          {"command": "stress", "outcome": "CE", "diagnostics": e.diagnostics})
                return EXIT_MISMATCH
            try:
                reference_program = sandbox.compile(reference)
                programs.append(reference_program)
            except CompileError as e:
                self.logger.error("参照解がコンパイルできません")
                self.emit(f"reference: compile error\n{e.diagnostics}",
                          {"command": "stress", "outcome": "reference CE", "diagnostics": e.diagnostics})
                return EXIT_INFRA

            outcome = tester.stress_test(candidate_program, reference_program, gen, spec, stress_cfg)
            if outcome.kind == OutcomeKind.NO_MISMATCH:
                self.emit(outcome.summary(), {"command": "stress", **outcome.to_dict()})
                return EXIT_OK
            if outcome.kind == OutcomeKind.REFERENCE_FAULT:
                self.emit(outcome.summary(), {"command": "stress", **outcome.to_dict()})
                return EXIT_INFRA

            failure = outcome.as_failure()
            if self.args.shrink:
                failure = shrink_failure(failure, gen, spec, candidate_program, reference_program,
                                         self.args.shrink_budget, sandbox)
            origin = failure.test.origin
            lines = [
                outcome.summary(),
                f"seed: {stress_cfg.seed}",
                f"case: {origin.describe()}",
                f"verdict: {failure.verdict}",
                "Input:", failure.test.input.rstrip("\n"),
                "Output:", failure.actual.rstrip("\n"),
                "Expected Output:", failure.expected.rstrip("\n"),
            ]
            self.emit("\n".join(lines), {"command": "stress", **outcome.to_dict(),
                                         "seed": stress_cfg.seed, "failure": failure.to_dict()})
            return EXIT_MISMATCH
        finally:
            for program in programs:
                sandbox.cleanup(program)

    def _run_session(self, zero_shot: bool) -> int:
        if getattr(self.args, "resume", None):
            provider = self.provider_config(required=True)
            loop = DebugLoop(self.config, self.loop_config(provider))
            session = loop.resume(self.args.resume)
        else:
            spec = load_problem_dir(self.args.problem_dir)
            if self.args.candidate is None:
                raise ValidationError("candidate source", "pass --candidate")
            candidate = self.load_solution(self.args.candidate, Role.CANDIDATE)
            reference = (self.load_solution(self.args.reference, Role.REFERENCE)
                         if self.args.reference else None)
            provider = self.provider_config(required=True)
            loop = DebugLoop(self.config, self.loop_config(provider))
            if zero_shot:
                session = loop.run_zero_shot(spec, candidate, reference=reference)
            else:
                session = loop.run_depro(spec, candidate, reference=reference)

        session_dir = loop.store.session_dir
        if session.status == SessionStatus.FIXED:
            headline = f"✅ Fixed after {session.attempts} attempts"
        elif session.status == SessionStatus.ALREADY_CONSISTENT:
            headline = f"✅ {session.initial_outcome.summary() if session.initial_outcome else 'no mismatch'}"
        else:
            headline = f"❌ {session.status_label} after {session.attempts} attempts"
            if session.candidate_diagnostics:
                headline += f"\n{session.candidate_diagnostics}"
        self.emit(f"{headline}\nsession: {session_dir}", {
            "command": "zero-shot" if zero_shot else "fix",
            "status": session.status.value,
            "status_label": session.status_label,
            "candidate_diagnostics": session.candidate_diagnostics or None,
            "attempts": session.attempts,
            "iterations": len(session.iterations),
            "session_dir": str(session_dir),
        })
        return STATUS_EXIT[session.status]

    def cmd_fix(self) -> int:
        return self._run_session(zero_shot=False)

    def cmd_zero_shot(self) -> int:
        return self._run_session(zero_shot=True)

    def cmd_replay(self) -> int:
        """記録済みトランスクリプトでセッションを再実行して比較"""
        output_dir = Path(self.args.output_dir) if self.args.output_dir else None
        result = replay_session(self.args.session_dir, self.config, jobs=self.args.jobs,
                                output_dir=output_dir)
        if result.reproduced:
            text = (f"✅ reproduced: {result.replayed.status_label}, "
                    f"attempts={result.replayed.attempts}")
        else:
            text = "❌ not reproduced\n" + "\n".join(f"  - {d}" for d in result.differences)
        self.emit(text, {"command": "replay", **result.to_dict()})
        return EXIT_OK if result.reproduced else EXIT_MISMATCH

    def cmd_report(self) -> int:
        """セッションの要約とベースライン比較表"""
        reports = [build_report(SessionStore(path).load()) for path in self.args.session_dirs]
        baseline = load_baseline(self.args.baseline) if self.args.baseline else None
        table = comparison_table(reports, baseline)

        if self.args.json:
            for report in reports:
                self.emit("", {"command": "report", "session": report.to_dict()})
            for row in json.loads(table.to_json(orient="records", force_ascii=False)):
                self.emit("", {"command": "report", "row": row})
        else:
            for report in reports:
                print(report.to_text())
            print(table.to_string(index=False))
        if self.args.xlsx:
            path = export_excel(table, self.args.xlsx)
            self.logger.info(f"Excel に出力しました: {path}")
        return EXIT_OK

    def run(self) -> int:
        handler = getattr(self, f"cmd_{self.args.command.replace('-', '_')}")
        self.check_configuration()
        return handler()


def _add_provider_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--provider", choices=[kind.value for kind in ProviderKind],
                        help="LLM provider (default: live, or scripted when --fixture is given)")
    parser.add_argument("--fixture", help="fixture JSON for the replay / scripted providers")
    parser.add_argument("--model", help="model name for the live provider")
    parser.add_argument("--endpoint", help="chat completions endpoint for the live provider")


def _add_stress_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=0, help="random case seed (default: 0)")
    parser.add_argument("--cases", type=int, default=500, help="random cases per stress run (default: 500)")
    parser.add_argument("--shrink", action="store_true", help="shrink failing inputs before reporting")
    parser.add_argument("--shrink-budget", type=int, default=200, help="program runs spent shrinking")
    parser.add_argument("--reference-language", default="cpp",
                        help="language requested for the brute-force solution (default: cpp)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depro",
        description="LLM-assisted debugging with stress testing against a brute-force reference",
    )
    parser.add_argument("--config", help="tool config YAML (default: $DEPRO_CONFIG or ./depro.yaml)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--json", action="store_true", help="line-delimited JSON output")
    parser.add_argument("--jobs", type=int, default=1, help="parallel program runs (default: 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write template problem.spec and gen.dsl")
    p.add_argument("dir")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty directory")

    p = sub.add_parser("gen", help="print generated inputs")
    p.add_argument("problem_dir")
    p.add_argument("-n", "--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-index", type=int, default=0)
    p.add_argument("--edge", action="store_true", help="print edge cases instead of random cases")
    p.add_argument("--validate", action="store_true", help="re-parse every case against the DSL")

    p = sub.add_parser("stress", help="stress-test a candidate against a reference")
    p.add_argument("problem_dir")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", help="reference source (skips the LLM)")
    p.add_argument("--language", help="candidate language (default: from extension)")
    _add_stress_flags(p)
    _add_provider_flags(p)

    for name, help_text in (("fix", "debug with failing test cases (DePro)"),
                            ("zero-shot", "debug without test cases (baseline)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("problem_dir", nargs="?")
        p.add_argument("--candidate")
        p.add_argument("--reference", help="reference source (skips brute-force generation)")
        p.add_argument("--language", help="candidate language (default: from extension)")
        p.add_argument("--max-iter", type=int, default=8, help="iteration budget (default: 8)")
        p.add_argument("--resume", metavar="SESSION_DIR", help="continue an interrupted session")
        _add_stress_flags(p)
        _add_provider_flags(p)

    p = sub.add_parser("replay", help="re-run a session against its transcript")
    p.add_argument("session_dir")
    p.add_argument("--output-dir", help="where the replayed session is written")

    p = sub.add_parser("report", help="summarise sessions and compare with a baseline")
    p.add_argument("session_dirs", nargs="+")
    p.add_argument("--baseline", help="CSV: problem_id, human_attempts, human_minutes, zero_shot_attempts")
    p.add_argument("--xlsx", help="also write the comparison table to this Excel file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """メイン関数"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be ≥ 1")
    if args.command in ("fix", "zero-shot") and not args.resume and not args.problem_dir:
        parser.error("problem_dir is required unless --resume is given")

    try:
        return DeproCLI(args).run()
    except InputFault as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InfrastructureFault, ReferenceGenerationFailed) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFRA


if __name__ == "__main__":
    sys.exit(main())
