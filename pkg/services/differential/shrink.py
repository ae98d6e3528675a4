#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
失敗ケース縮約モジュール

失敗入力を構造化値として読み直し、より小さい候補（サブケース数・配列長の削減）を
順に試して、まだ失敗するものに置き換えていく。予算は候補の実行回数で数える。
"""

import dataclasses
from typing import Iterator, Optional, Tuple

from ..core.exceptions import ValidationError
from ..core.logger import Logger
from ..core.models import Failure, ProblemSpec, StressOutcome, TestCase
from ..sandbox.runner import CompiledProgram, Sandbox
from ..testgen.dsl import DeclKind, GeneratorSpec
from ..testgen.generator import CaseValues, render_case
from ..testgen.validator import parse_case
from .stress import StressTester


logger = Logger(__name__)


def case_size(gen: GeneratorSpec, values: CaseValues, text: str) -> Tuple[int, int, int]:
    """大小比較用のサイズ（サブケース数, 配列・文字列の総長, 入力長）"""
    total = 0
    for block in values.blocks:
        for decl in gen.decls:
            if decl.kind in (DeclKind.ARRAY, DeclKind.STRING):
                total += len(block[decl.name])
    return len(values.blocks), total, len(text)


def _with_length(gen: GeneratorSpec, values: CaseValues, block_index: int, var: str,
                 length: int, keep_prefix: bool) -> CaseValues:
    shrunk = values.copy()
    block = shrunk.blocks[block_index]
    block[var] = length
    for decl in gen.decls:
        if decl.len_ref == var:
            seq = block[decl.name]
            block[decl.name] = seq[:length] if keep_prefix else seq[len(seq) - length:]
    return shrunk


def _candidates(gen: GeneratorSpec, values: CaseValues) -> Iterator[CaseValues]:
    blocks = values.blocks
    if gen.multi_case is not None and len(blocks) > 1:
        for block in blocks:
            yield CaseValues([block]).copy()
        half = len(blocks) // 2
        yield CaseValues(blocks[half:]).copy()
        yield CaseValues(blocks[:half]).copy()

    for block_index, block in enumerate(blocks):
        for var in sorted(gen.length_refs):
            current = block[var]
            decl = gen.decl(var)
            for length in dict.fromkeys((current // 2, current - 1)):
                if length < decl.min or length >= current:
                    continue
                yield _with_length(gen, values, block_index, var, length, keep_prefix=True)
                yield _with_length(gen, values, block_index, var, length, keep_prefix=False)


def shrink_failure(failure: Failure, gen: GeneratorSpec, spec: ProblemSpec,
                   candidate: CompiledProgram, reference: CompiledProgram, budget: int,
                   sandbox: Optional[Sandbox] = None) -> Failure:
    """失敗ケースを予算内で縮約（見つからなければ元の失敗を返す）"""
    if budget <= 0:
        return failure
    try:
        current = parse_case(gen, failure.test.input)
    except ValidationError:
        # サンプル由来など DSL に沿わない入力は縮約しない
        logger.debug("失敗入力が生成仕様に沿わないため縮約しません")
        return failure

    tester = StressTester(sandbox)
    ref_limits = tester.reference_limits(spec)
    best = failure
    best_size = case_size(gen, current, failure.test.input)
    executions = 0

    while executions < budget:
        improved = False
        for values in _candidates(gen, current):
            text = render_case(gen, values)
            size = case_size(gen, values, text)
            if size >= best_size:
                continue
            try:
                parse_case(gen, text)
            except ValidationError:
                continue
            if executions >= budget:
                break
            executions += 1
            test = TestCase(input=text, origin=dataclasses.replace(failure.test.origin, shrunk=True))
            kind, ref_result, cand_result = tester.evaluate(candidate, reference, test, spec, ref_limits)
            if kind is None or not StressOutcome(kind, 1).is_failing:
                continue
            outcome = StressOutcome(kind, 1, test=test, expected=ref_result.stdout,
                                    actual=cand_result.stdout, run_result=cand_result, position=1)
            best, best_size, current = outcome.as_failure(), size, values
            improved = True
            break
        if not improved:
            break

    if best is not failure:
        logger.info(f"失敗ケースを縮約しました: {len(failure.test.input)} → {len(best.test.input)} bytes "
                    f"({executions} runs)")
    return best
