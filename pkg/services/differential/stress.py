#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
ストレステストモジュール

候補解と参照解（ブルートフォース）を サンプル → エッジケース → ランダムケース の順に
実行し、最初に失敗したケースを返す。並列実行時も、失敗位置は評価順で最小のものになる。
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..core.exceptions import ValidationError
from ..core.logger import Logger
from ..core.models import (
    CaseOrigin, OutcomeKind, ProblemSpec, ResourceLimits, RunResult, StressOutcome, TestCase,
    normalize_input,
)
from ..sandbox.runner import CompiledProgram, Sandbox
from ..testgen.dsl import GeneratorSpec
from ..testgen.generator import generate_edge_cases, generate_random
from .comparator import compare_outputs


@dataclass(frozen=True)
class StressConfig:
    """ストレステスト設定"""
    max_random_cases: int = 500
    seed: int = 0
    run_edge_cases_first: bool = True
    include_samples_first: bool = True
    jobs: int = 1
    reference_time_factor: Optional[int] = None

    def validate(self):
        if self.max_random_cases < 1:
            raise ValidationError("max_random_cases ≥ 1", f"got {self.max_random_cases}")
        if self.jobs < 1:
            raise ValidationError("jobs ≥ 1", f"got {self.jobs}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed is u64", f"got {self.seed}")


@dataclass(frozen=True)
class SampleCheck:
    """サンプル1件の実行結果"""
    index: int
    expected: str
    result: RunResult
    passed: bool


def build_case_plan(gen: GeneratorSpec, spec: ProblemSpec, cfg: StressConfig) -> List[TestCase]:
    """評価順に並べたテストケース一覧"""
    samples: List[TestCase] = []
    if cfg.include_samples_first:
        samples = [TestCase(input=normalize_input(s.input), origin=CaseOrigin.sample(i))
                   for i, s in enumerate(spec.samples)]
    edges = generate_edge_cases(gen)
    randoms = [generate_random(gen, cfg.seed, index) for index in range(cfg.max_random_cases)]
    if cfg.run_edge_cases_first:
        return samples + edges + randoms
    return samples + randoms + edges


class StressTester:
    """候補解と参照解の差分テスト"""

    def __init__(self, sandbox: Optional[Sandbox] = None):
        self.sandbox = sandbox or Sandbox()
        self.logger = Logger(__name__)

    def reference_limits(self, spec: ProblemSpec, factor: Optional[int] = None) -> ResourceLimits:
        factor = factor or self.sandbox.config.reference_time_factor
        return spec.limits.for_reference(factor)

    def evaluate(self, candidate: CompiledProgram, reference: CompiledProgram, test: TestCase,
                 spec: ProblemSpec, ref_limits: ResourceLimits
                 ) -> Tuple[Optional[OutcomeKind], Optional[RunResult], Optional[RunResult]]:
        """1ケースを評価（合格なら kind は None）"""
        ref_result = self.sandbox.run(reference, test.input, ref_limits)
        if not ref_result.ok:
            return OutcomeKind.REFERENCE_FAULT, ref_result, None
        cand_result = self.sandbox.run(candidate, test.input, spec.limits)
        if not cand_result.ok:
            return OutcomeKind.CANDIDATE_FAULT, ref_result, cand_result
        if not compare_outputs(ref_result.stdout, cand_result.stdout, spec.comparator, test.input):
            return OutcomeKind.FAILURE, ref_result, cand_result
        return None, ref_result, cand_result

    @staticmethod
    def _outcome(kind: OutcomeKind, test: TestCase, position: int, counts: Dict[str, int],
                 ref_result: RunResult, cand_result: Optional[RunResult], started: float
                 ) -> StressOutcome:
        wall_ms = int((time.monotonic() - started) * 1000)
        if kind == OutcomeKind.REFERENCE_FAULT:
            return StressOutcome(kind, cases_run=position, test=test, expected=ref_result.stdout,
                                 run_result=ref_result, position=position,
                                 source_counts=counts, wall_ms=wall_ms)
        return StressOutcome(kind, cases_run=position, test=test, expected=ref_result.stdout,
                             actual=cand_result.stdout, run_result=cand_result, position=position,
                             source_counts=counts, wall_ms=wall_ms)

    def stress_test(self, candidate: CompiledProgram, reference: CompiledProgram,
                    gen: GeneratorSpec, spec: ProblemSpec, cfg: StressConfig) -> StressOutcome:
        """差分テストを実行して最初の失敗（または不一致なし）を返す"""
        cfg.validate()
        started = time.monotonic()
        plan = build_case_plan(gen, spec, cfg)
        ref_limits = self.reference_limits(spec, cfg.reference_time_factor)
        self.logger.log_operation("ストレステスト", {
            "cases": len(plan), "seed": cfg.seed, "jobs": cfg.jobs,
            "reference_time_ms": ref_limits.time_ms,
        })

        counts: Dict[str, int] = {}
        window = 1 if cfg.jobs == 1 else cfg.jobs * 4
        executor = ThreadPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else None
        try:
            for offset in range(0, len(plan), window):
                chunk = plan[offset:offset + window]
                if executor is None:
                    results = [self.evaluate(candidate, reference, chunk[0], spec, ref_limits)]
                else:
                    results = list(executor.map(
                        lambda t: self.evaluate(candidate, reference, t, spec, ref_limits), chunk))
                # チャンク内は評価順に確認する（完了順ではない）
                for i, (kind, ref_result, cand_result) in enumerate(results):
                    test = chunk[i]
                    source = test.origin.kind.value
                    counts[source] = counts.get(source, 0) + 1
                    if kind is None:
                        continue
                    position = offset + i + 1
                    outcome = self._outcome(kind, test, position, counts, ref_result,
                                            cand_result, started)
                    self.logger.info(f"ストレステスト終了: {outcome.summary()}")
                    return outcome
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

        outcome = StressOutcome(OutcomeKind.NO_MISMATCH, cases_run=len(plan), source_counts=counts,
                                wall_ms=int((time.monotonic() - started) * 1000))
        self.logger.info(f"ストレステスト終了: {outcome.summary()}")
        return outcome

    def check_samples(self, program: CompiledProgram, spec: ProblemSpec,
                      limits: Optional[ResourceLimits] = None) -> List[SampleCheck]:
        """サンプル入力で実行して期待出力と比較"""
        limits = limits or spec.limits
        checks = []
        for i, sample in enumerate(spec.samples):
            text = normalize_input(sample.input)
            result = self.sandbox.run(program, text, limits)
            passed = result.ok and compare_outputs(sample.expected_output, result.stdout,
                                                   spec.comparator, text)
            checks.append(SampleCheck(index=i, expected=sample.expected_output, result=result,
                                      passed=passed))
        return checks


def stress_test(candidate: CompiledProgram, reference: CompiledProgram, gen: GeneratorSpec,
                spec: ProblemSpec, cfg: StressConfig, sandbox: Optional[Sandbox] = None) -> StressOutcome:
    return StressTester(sandbox).stress_test(candidate, reference, gen, spec, cfg)
