#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
データモデル定義モジュール

システム全体で使用する共通のデータクラスを定義
"""

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .exceptions import ValidationError


def sha256_hex(text: str) -> str:
    """テキストの SHA-256 ダイジェスト（16進）"""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# =========================================================
# 問題定義
# =========================================================

@dataclass(frozen=True)
class ResourceLimits:
    """時間・メモリ制限"""
    time_ms: int
    memory_mb: int

    def validate(self):
        if self.time_ms <= 0:
            raise ValidationError("limits.time_ms > 0", f"got {self.time_ms}")
        if self.memory_mb <= 0:
            raise ValidationError("limits.memory_mb > 0", f"got {self.memory_mb}")

    def for_reference(self, factor: int) -> "ResourceLimits":
        """ブルートフォース解用の緩い制限"""
        return ResourceLimits(time_ms=self.time_ms * factor, memory_mb=self.memory_mb)


@dataclass(frozen=True)
class SampleCase:
    """サンプル入出力"""
    input: str
    expected_output: str


class ComparatorMode(str, Enum):
    EXACT = "exact"
    TOKENS = "tokens"
    FLOAT_EPS = "float_eps"
    CHECKER = "checker"


@dataclass(frozen=True)
class ComparatorSpec:
    """出力比較方法"""
    mode: ComparatorMode = ComparatorMode.TOKENS
    epsilon: Optional[float] = None
    checker: Optional[str] = None
    case_insensitive: bool = False
    base_dir: Optional[Path] = field(default=None, compare=False)

    def validate(self):
        if (self.mode == ComparatorMode.FLOAT_EPS) != (self.epsilon is not None):
            raise ValidationError("comparator.epsilon present iff mode is float_eps")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValidationError("comparator.epsilon >= 0", f"got {self.epsilon}")
        if (self.mode == ComparatorMode.CHECKER) != bool(self.checker):
            raise ValidationError("comparator.checker present iff mode is checker")

    def checker_path(self) -> Optional[Path]:
        if not self.checker:
            return None
        path = Path(self.checker)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path


@dataclass(frozen=True)
class ProblemSpec:
    """問題定義（プロンプトとストレステストの共通コンテキスト）"""
    id: str
    statement: str
    input_description: str
    output_description: str
    limits: ResourceLimits
    samples: Tuple[SampleCase, ...]
    comparator: ComparatorSpec
    generator_path: str
    base_dir: Optional[Path] = field(default=None, compare=False)

    def validate(self):
        self.limits.validate()
        if not self.samples:
            raise ValidationError("samples non-empty")
        for i, sample in enumerate(self.samples):
            if not sample.input.strip():
                raise ValidationError("sample input non-empty", f"samples[{i}]")
        self.comparator.validate()

    def resolve_generator_path(self) -> Path:
        path = Path(self.generator_path)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path


# =========================================================
# テストケース
# =========================================================

class OriginKind(str, Enum):
    RANDOM = "random"
    EDGE = "edge"
    SAMPLE = "sample"


@dataclass(frozen=True)
class CaseOrigin:
    """テストケースの出自（seed + index で再現可能）"""
    kind: OriginKind
    seed: Optional[int] = None
    index: Optional[int] = None
    strategy: Optional[str] = None
    sample_index: Optional[int] = None
    shrunk: bool = False

    @classmethod
    def random(cls, seed: int, index: int) -> "CaseOrigin":
        return cls(OriginKind.RANDOM, seed=seed, index=index)

    @classmethod
    def edge(cls, strategy: str) -> "CaseOrigin":
        return cls(OriginKind.EDGE, strategy=strategy)

    @classmethod
    def sample(cls, index: int) -> "CaseOrigin":
        return cls(OriginKind.SAMPLE, sample_index=index)

    def describe(self) -> str:
        if self.kind == OriginKind.RANDOM:
            text = f"random(seed={self.seed}, index={self.index})"
        elif self.kind == OriginKind.EDGE:
            text = f"edge({self.strategy})"
        else:
            text = f"sample({self.sample_index})"
        return text + " [shrunk]" if self.shrunk else text

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind.value}
        for key in ("seed", "index", "strategy", "sample_index"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        if self.shrunk:
            data["shrunk"] = True
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CaseOrigin":
        return cls(
            kind=OriginKind(data["kind"]),
            seed=data.get("seed"),
            index=data.get("index"),
            strategy=data.get("strategy"),
            sample_index=data.get("sample_index"),
            shrunk=bool(data.get("shrunk", False)),
        )


@dataclass(frozen=True)
class TestCase:
    """生成されたテスト入力"""
    __test__ = False

    input: str
    origin: CaseOrigin

    def to_dict(self) -> Dict[str, Any]:
        return {"input": self.input, "origin": self.origin.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TestCase":
        return cls(input=data["input"], origin=CaseOrigin.from_dict(data["origin"]))


def normalize_input(text: str) -> str:
    """末尾の改行をちょうど1つに揃える"""
    return text.rstrip("\n") + "\n"


# =========================================================
# ソリューションと実行結果
# =========================================================

class Role(str, Enum):
    CANDIDATE = "candidate"
    REFERENCE = "reference"


_BLOCK_COMMENT = re.compile(r"/\*.*?\*/", re.DOTALL)


def _has_code(source: str, language: str) -> bool:
    """コメントと空白以外の内容があるか"""
    body = _BLOCK_COMMENT.sub("", source) if language != "python" else source
    for line in body.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("//"):
            continue
        if language == "python" and stripped.startswith("#"):
            continue
        return True
    return False


@dataclass(frozen=True)
class SolutionArtifact:
    """ソリューションのソースコード"""
    source: str
    language: str
    role: Role = Role.CANDIDATE
    origin: str = "user"  # user / llm
    iteration: Optional[int] = None

    def validate(self):
        if not _has_code(self.source, self.language):
            raise ValidationError("source non-empty", f"{self.role.value} source has no code")

    @property
    def digest(self) -> str:
        return sha256_hex(self.source)

    def as_role(self, role: Role) -> "SolutionArtifact":
        return SolutionArtifact(self.source, self.language, role, self.origin, self.iteration)

    def to_dict(self) -> Dict[str, Any]:
        data = {"language": self.language, "role": self.role.value, "origin": self.origin,
                "sha256": self.digest}
        if self.iteration is not None:
            data["iteration"] = self.iteration
        return data


class RunStatus(str, Enum):
    OK = "OK"
    TLE = "TLE"
    MLE = "MLE"
    RE = "RE"
    CE = "CE"


@dataclass(frozen=True)
class RunResult:
    """1回のサンドボックス実行結果"""
    status: RunStatus
    stdout: str = ""
    stderr: str = ""
    wall_ms: int = 0
    peak_mem_mb: Optional[float] = None
    exit_code: Optional[int] = None
    diagnostics: str = ""

    @property
    def ok(self) -> bool:
        return self.status == RunStatus.OK

    def verdict(self) -> str:
        if self.status == RunStatus.RE:
            return f"RE({self.exit_code})"
        return self.status.value

    def to_dict(self, include_streams: bool = True) -> Dict[str, Any]:
        data = {
            "status": self.status.value,
            "exit_code": self.exit_code,
            "wall_ms": self.wall_ms,
            "peak_mem_mb": self.peak_mem_mb,
        }
        if include_streams:
            data.update({"stdout": self.stdout, "stderr": self.stderr, "diagnostics": self.diagnostics})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunResult":
        return cls(
            status=RunStatus(data["status"]),
            stdout=data.get("stdout", ""),
            stderr=data.get("stderr", ""),
            wall_ms=int(data.get("wall_ms", 0)),
            peak_mem_mb=data.get("peak_mem_mb"),
            exit_code=data.get("exit_code"),
            diagnostics=data.get("diagnostics", ""),
        )


# =========================================================
# ストレステスト結果
# =========================================================

@dataclass(frozen=True)
class Failure:
    """失敗を誘発するテストケース（デバッグプロンプトの材料）"""
    test: TestCase
    expected: str
    actual: str
    verdict: str = "WA"

    def to_dict(self) -> Dict[str, Any]:
        return {"test": self.test.to_dict(), "expected": self.expected,
                "actual": self.actual, "verdict": self.verdict}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Failure":
        return cls(test=TestCase.from_dict(data["test"]), expected=data["expected"],
                   actual=data["actual"], verdict=data.get("verdict", "WA"))


class OutcomeKind(str, Enum):
    NO_MISMATCH = "NoMismatch"
    FAILURE = "Failure"
    CANDIDATE_FAULT = "CandidateFault"
    REFERENCE_FAULT = "ReferenceFault"


@dataclass(frozen=True)
class StressOutcome:
    """差分テストの結果"""
    kind: OutcomeKind
    cases_run: int
    test: Optional[TestCase] = None
    expected: Optional[str] = None
    actual: Optional[str] = None
    run_result: Optional[RunResult] = None
    position: Optional[int] = None
    source_counts: Dict[str, int] = field(default_factory=dict)
    wall_ms: int = 0

    @property
    def is_failing(self) -> bool:
        """候補側の不一致・異常（デバッグ対象）"""
        return self.kind in (OutcomeKind.FAILURE, OutcomeKind.CANDIDATE_FAULT)

    def as_failure(self) -> Failure:
        if not self.is_failing:
            raise ValueError(f"{self.kind.value} is not a candidate failure")
        verdict = "WA" if self.kind == OutcomeKind.FAILURE else self.run_result.verdict()
        return Failure(test=self.test, expected=self.expected or "", actual=self.actual or "",
                       verdict=verdict)

    def summary(self) -> str:
        if self.kind == OutcomeKind.NO_MISMATCH:
            return f"no mismatch in {self.cases_run} cases"
        where = self.test.origin.describe() if self.test else "?"
        if self.kind == OutcomeKind.FAILURE:
            return f"mismatch at case #{self.position} {where}"
        verdict = self.run_result.verdict() if self.run_result else "?"
        side = "candidate" if self.kind == OutcomeKind.CANDIDATE_FAULT else "reference"
        return f"{side} {verdict} at case #{self.position} {where}"

    def to_dict(self, include_texts: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind.value,
            "cases_run": self.cases_run,
            "position": self.position,
            "source_counts": dict(self.source_counts),
            "wall_ms": self.wall_ms,
        }
        if self.test is not None:
            data["origin"] = self.test.origin.to_dict()
            if include_texts:
                data["input"] = self.test.input
        if include_texts:
            data["expected"] = self.expected
            data["actual"] = self.actual
        if self.run_result is not None:
            data["run_result"] = self.run_result.to_dict(include_streams=include_texts)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StressOutcome":
        test = None
        if "origin" in data:
            test = TestCase(input=data.get("input", ""), origin=CaseOrigin.from_dict(data["origin"]))
        run_result = RunResult.from_dict(data["run_result"]) if data.get("run_result") else None
        return cls(
            kind=OutcomeKind(data["kind"]),
            cases_run=int(data.get("cases_run", 0)),
            test=test,
            expected=data.get("expected"),
            actual=data.get("actual"),
            run_result=run_result,
            position=data.get("position"),
            source_counts=dict(data.get("source_counts", {})),
            wall_ms=int(data.get("wall_ms", 0)),
        )


# =========================================================
# LLM とのやり取り
# =========================================================

class PromptKind(str, Enum):
    BRUTE_FORCE = "BruteForce"
    ZERO_SHOT_DEBUG = "ZeroShotDebug"
    FAILURE_DEBUG = "FailureDebug"

    @property
    def is_debug(self) -> bool:
        return self != PromptKind.BRUTE_FORCE


@dataclass(frozen=True)
class ChatExchange:
    """プロンプトと応答の1往復"""
    prompt: str
    response: str
    kind: PromptKind
    provider_id: str
    timestamp: str = ""
    prompt_hash: str = ""

    def __post_init__(self):
        if not self.prompt_hash:
            object.__setattr__(self, "prompt_hash", sha256_hex(self.prompt))
        if not self.timestamp:
            object.__setattr__(self, "timestamp", datetime.now(timezone.utc).isoformat())

    def to_record(self) -> Dict[str, Any]:
        """トランスクリプト（リプレイ用フィクスチャ）のレコード"""
        return {
            "prompt_hash": self.prompt_hash,
            "kind": self.kind.value,
            "response": self.response,
            "provider_id": self.provider_id,
            "timestamp": self.timestamp,
        }
