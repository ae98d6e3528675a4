#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
デバッグセッションモジュール

セッションの状態（反復履歴・状態・試行回数）と、セッションディレクトリへの
永続化を扱う。

    session.json               DebugSession（大きなテキストは除く）
    problem.spec, gen.dsl      問題定義と生成仕様のコピー
    reference.<ext>            参照解
    candidate_initial.<ext>    最初の候補解
    iterations/NN/             prompt.txt, response.txt, code.<ext>, verdict.json, failing_input.txt
    transcript.json            LLM とのやり取り（replay 用フィクスチャ）
"""

import dataclasses
import re
import shutil
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..core.exceptions import ParseError
from ..core.files import read_json, write_json_atomic, write_text_atomic
from ..core.logger import Logger
from ..core.models import (
    Failure, ProblemSpec, PromptKind, Role, SolutionArtifact, StressOutcome,
)
from ..problem.problem_model import PROBLEM_FILENAME, load_problem, save_problem


SESSION_FILENAME = "session.json"
TRANSCRIPT_FILENAME = "transcript.json"
GENERATOR_FILENAME = "gen.dsl"

EXTENSIONS = {"cpp": "cpp", "python": "py"}

_UNSAFE = re.compile(r"[^A-Za-z0-9_-]+")


class SessionStatus(str, Enum):
    RUNNING = "Running"
    FIXED = "Fixed"
    UNFIXED = "Unfixed"
    ALREADY_CONSISTENT = "AlreadyConsistent"
    REFERENCE_FAILED = "ReferenceFailed"
    ABORTED = "Aborted"

    @property
    def is_terminal(self) -> bool:
        return self != SessionStatus.RUNNING


class SessionMode(str, Enum):
    DEPRO = "depro"
    ZERO_SHOT = "zero-shot"

    @property
    def prompt_kind(self) -> PromptKind:
        return PromptKind.FAILURE_DEBUG if self == SessionMode.DEPRO else PromptKind.ZERO_SHOT_DEBUG


class CompileStatus(str, Enum):
    OK = "OK"
    CE = "CE"
    NO_CODE = "NO_CODE"


def extension_for(language: str) -> str:
    return EXTENSIONS.get(language, language)


def session_slug(problem_id: str) -> str:
    """ディレクトリ名に使える形（英数字・_・- 以外は _ に置換）"""
    return _UNSAFE.sub("_", problem_id).strip("_") or "problem"


@dataclass
class IterationRecord:
    """反復1回分（プロンプト → 応答 → コンパイル → ストレステスト）"""
    index: int
    failure_in: Optional[Failure]
    prompt_kind: PromptKind
    prompt_hashes: List[str]
    compile_status: CompileStatus
    code_sha256: str
    language: str
    diagnostics: str = ""
    stress_out: Optional[StressOutcome] = None
    wall_ms: int = 0

    @property
    def exchanges(self) -> int:
        return len(self.prompt_hashes)

    def verdict_kind(self) -> str:
        """replay 比較用の判定種別"""
        if self.compile_status != CompileStatus.OK:
            return self.compile_status.value
        return self.stress_out.kind.value if self.stress_out else "?"

    def to_dict(self, include_texts: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "index": self.index,
            "prompt_kind": self.prompt_kind.value,
            "prompt_hashes": list(self.prompt_hashes),
            "compile": self.compile_status.value,
            "code_sha256": self.code_sha256,
            "language": self.language,
            "wall_ms": self.wall_ms,
        }
        if self.diagnostics:
            data["diagnostics"] = self.diagnostics
        if self.stress_out is not None:
            data["stress_out"] = self.stress_out.to_dict(include_texts=include_texts)
        if self.failure_in is not None:
            if include_texts:
                data["failure_in"] = self.failure_in.to_dict()
            else:
                data["failure_in"] = {"origin": self.failure_in.test.origin.to_dict(),
                                      "verdict": self.failure_in.verdict}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IterationRecord":
        failure = None
        raw_failure = data.get("failure_in")
        if raw_failure and "test" in raw_failure:
            failure = Failure.from_dict(raw_failure)
        stress_out = StressOutcome.from_dict(data["stress_out"]) if data.get("stress_out") else None
        return cls(
            index=int(data["index"]),
            failure_in=failure,
            prompt_kind=PromptKind(data["prompt_kind"]),
            prompt_hashes=list(data.get("prompt_hashes", [])),
            compile_status=CompileStatus(data["compile"]),
            code_sha256=data.get("code_sha256", ""),
            language=data.get("language", ""),
            diagnostics=data.get("diagnostics", ""),
            stress_out=stress_out,
            wall_ms=int(data.get("wall_ms", 0)),
        )


@dataclass
class DebugSession:
    """デバッグループ全体の記録"""
    problem_id: str
    mode: SessionMode
    candidate_initial: SolutionArtifact
    reference: Optional[SolutionArtifact] = None
    iterations: List[IterationRecord] = field(default_factory=list)
    status: SessionStatus = SessionStatus.RUNNING
    status_detail: str = ""
    attempts: int = 0
    bruteforce_exchanges: int = 0
    initial_outcome: Optional[StressOutcome] = None
    candidate_diagnostics: str = ""
    wall_ms_total: int = 0
    config_snapshot: Dict[str, Any] = field(default_factory=dict)
    loop_config: Dict[str, Any] = field(default_factory=dict)
    created_at: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    @property
    def status_label(self) -> str:
        """Fixed(3) / Unfixed(budget_exhausted) / Aborted(provider: ...) の形式"""
        if self.status_detail:
            return f"{self.status.value}({self.status_detail})"
        return self.status.value

    @property
    def replay_key(self) -> str:
        """replay 比較用の状態（Fixed は反復番号、それ以外は詳細の種別まで）"""
        if self.status == SessionStatus.FIXED or not self.status_detail:
            return self.status_label
        category = self.status_detail.split(":", 1)[0]
        return f"{self.status.value}({category})"

    @property
    def fixed_iteration(self) -> Optional[int]:
        if self.status != SessionStatus.FIXED:
            return None
        return int(self.status_detail)

    def finish(self, status: SessionStatus, detail: str = ""):
        self.status = status
        self.status_detail = detail

    def verdict_kinds(self) -> List[str]:
        return [record.verdict_kind() for record in self.iterations]

    def code_digests(self) -> List[str]:
        return [record.code_sha256 for record in self.iterations]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "mode": self.mode.value,
            "status": self.status.value,
            "status_detail": self.status_detail,
            "status_label": self.status_label,
            "attempts": self.attempts,
            "bruteforce_exchanges": self.bruteforce_exchanges,
            "candidate_initial": self.candidate_initial.to_dict(),
            "reference": self.reference.to_dict() if self.reference else None,
            "initial_outcome": (self.initial_outcome.to_dict(include_texts=False)
                                if self.initial_outcome else None),
            "candidate_diagnostics": self.candidate_diagnostics,
            "iterations": [record.to_dict() for record in self.iterations],
            "wall_ms_total": self.wall_ms_total,
            "config_snapshot": self.config_snapshot,
            "loop_config": self.loop_config,
            "created_at": self.created_at,
        }


def _artifact_from_dict(data: Dict[str, Any], source: str) -> SolutionArtifact:
    return SolutionArtifact(source=source, language=data["language"], role=Role(data["role"]),
                            origin=data.get("origin", "user"), iteration=data.get("iteration"))


class SessionStore:
    """セッションディレクトリの読み書き"""

    def __init__(self, session_dir: Union[str, Path]):
        self.session_dir = Path(session_dir)
        self.logger = Logger(__name__)

    @classmethod
    def create(cls, sessions_root: Path, problem_id: str, mode: SessionMode) -> "SessionStore":
        """タイムスタンプ付きの新しいセッションディレクトリ"""
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        base = sessions_root / f"{session_slug(problem_id)}_{mode.value}_{timestamp}"
        path, n = base, 1
        while path.exists():
            n += 1
            path = base.with_name(f"{base.name}_{n}")
        path.mkdir(parents=True)
        return cls(path)

    @property
    def session_path(self) -> Path:
        return self.session_dir / SESSION_FILENAME

    @property
    def transcript_path(self) -> Path:
        return self.session_dir / TRANSCRIPT_FILENAME

    @property
    def problem_path(self) -> Path:
        return self.session_dir / PROBLEM_FILENAME

    @property
    def generator_path(self) -> Path:
        return self.session_dir / GENERATOR_FILENAME

    def iteration_dir(self, index: int) -> Path:
        return self.session_dir / "iterations" / f"{index:02d}"

    # =========================================================
    # 書き込み
    # =========================================================

    def write_inputs(self, spec: ProblemSpec, generator_text: str, candidate: SolutionArtifact):
        """問題定義・生成仕様・最初の候補解を保存"""
        self.session_dir.mkdir(parents=True, exist_ok=True)
        comparator = spec.comparator
        checker = comparator.checker_path()
        if checker is not None and checker.exists():
            shutil.copyfile(checker, self.session_dir / checker.name)
            comparator = dataclasses.replace(comparator, checker=checker.name)
        copy = dataclasses.replace(spec, comparator=comparator, generator_path=GENERATOR_FILENAME)
        save_problem(copy, self.problem_path)
        write_text_atomic(self.generator_path, generator_text)
        write_text_atomic(self.session_dir / f"candidate_initial.{extension_for(candidate.language)}",
                          candidate.source)

    def write_reference(self, reference: SolutionArtifact):
        write_text_atomic(self.session_dir / f"reference.{extension_for(reference.language)}",
                          reference.source)

    def write_iteration(self, record: IterationRecord, prompt: str, response: str, code: str):
        directory = self.iteration_dir(record.index)
        write_text_atomic(directory / "prompt.txt", prompt)
        write_text_atomic(directory / "response.txt", response)
        write_text_atomic(directory / f"code.{extension_for(record.language)}", code)
        write_json_atomic(directory / "verdict.json", record.to_dict(include_texts=True))
        failing = record.stress_out.test if record.stress_out and record.stress_out.test else None
        if failing is not None:
            write_text_atomic(directory / "failing_input.txt", failing.input)
        self.logger.log_file_operation("保存", directory)

    def save(self, session: DebugSession):
        write_json_atomic(self.session_path, session.to_dict())

    # =========================================================
    # 読み込み
    # =========================================================

    def _find_source(self, stem: str, language: str) -> Optional[str]:
        path = self.session_dir / f"{stem}.{extension_for(language)}"
        return path.read_text(encoding="utf-8") if path.exists() else None

    def load_problem(self) -> ProblemSpec:
        return load_problem(self.problem_path)

    def load_generator_text(self) -> str:
        try:
            return self.generator_path.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"cannot read {self.generator_path}: {e}", field="generator") from e

    def load_iteration_code(self, record: IterationRecord) -> str:
        path = self.iteration_dir(record.index) / f"code.{extension_for(record.language)}"
        return path.read_text(encoding="utf-8")

    def load_iteration_detail(self, index: int) -> IterationRecord:
        """verdict.json（テキスト込み）から反復記録を復元"""
        return IterationRecord.from_dict(read_json(self.iteration_dir(index) / "verdict.json",
                                                   what="verdict"))

    def load(self) -> DebugSession:
        """session.json と保存済みソースから DebugSession を復元"""
        data = read_json(self.session_path, what="session")
        candidate_meta = data["candidate_initial"]
        candidate_source = self._find_source("candidate_initial", candidate_meta["language"])
        if candidate_source is None:
            raise ParseError("candidate_initial source missing", field="session")
        reference = None
        if data.get("reference"):
            source = self._find_source("reference", data["reference"]["language"])
            if source is not None:
                reference = _artifact_from_dict(data["reference"], source)

        iterations = []
        for raw in data.get("iterations", []):
            detail_path = self.iteration_dir(int(raw["index"])) / "verdict.json"
            iterations.append(self.load_iteration_detail(int(raw["index"]))
                              if detail_path.exists() else IterationRecord.from_dict(raw))

        initial = data.get("initial_outcome")
        return DebugSession(
            problem_id=data["problem_id"],
            mode=SessionMode(data["mode"]),
            candidate_initial=_artifact_from_dict(candidate_meta, candidate_source),
            reference=reference,
            iterations=iterations,
            status=SessionStatus(data["status"]),
            status_detail=data.get("status_detail", ""),
            attempts=int(data.get("attempts", 0)),
            bruteforce_exchanges=int(data.get("bruteforce_exchanges", 0)),
            initial_outcome=StressOutcome.from_dict(initial) if initial else None,
            candidate_diagnostics=data.get("candidate_diagnostics", ""),
            wall_ms_total=int(data.get("wall_ms_total", 0)),
            config_snapshot=data.get("config_snapshot", {}),
            loop_config=data.get("loop_config", {}),
            created_at=data.get("created_at", ""),
        )
