#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
テスト入力生成モジュール

GeneratorSpec から構造化された値を作り、決められたレイアウトで入力テキストに
整形する。乱数は (seed, index, ブロック, 宣言位置) をキーにした Philox ストリーム
から取るため、同じ seed と index からは常に同じ入力が得られる。
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np

from ..core.logger import Logger
from ..core.models import CaseOrigin, TestCase, normalize_input
from .dsl import DeclKind, GeneratorSpec, Layout, VarDecl


logger = Logger(__name__)

Block = Dict[str, Any]


@dataclass
class CaseValues:
    """1入力分の構造化された値（単一ケース形式ではブロックは1つ）"""
    blocks: List[Block] = field(default_factory=list)

    def copy(self) -> "CaseValues":
        return CaseValues([{k: (list(v) if isinstance(v, list) else v) for k, v in b.items()}
                           for b in self.blocks])


def _stream(seed: int, index: int, block: int, position: int) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    sequence = np.random.SeedSequence([seed, index, block, position])
    return np.random.Generator(np.random.Philox(sequence))


# =========================================================
# 整形
# =========================================================

def _decl_tokens(decl: VarDecl, block: Block) -> List[str]:
    if decl.kind == DeclKind.LITERAL:
        return [decl.text]
    value = block[decl.name]
    if decl.kind == DeclKind.INT:
        return [str(value)]
    if decl.kind == DeclKind.ARRAY:
        return [str(x) for x in value]
    return [value] if value else []


def render_case(spec: GeneratorSpec, values: CaseValues) -> str:
    """構造化された値を入力テキストに整形（末尾の改行はちょうど1つ）"""
    lines: List[List[str]] = []
    if spec.multi_case is not None:
        lines.append([str(len(values.blocks))])
    for block in values.blocks:
        for decl in spec.decls:
            tokens = _decl_tokens(decl, block)
            if decl.layout == Layout.INLINE and lines:
                lines[-1].extend(tokens)
            else:
                lines.append(tokens)
    return normalize_input("\n".join(" ".join(tokens) for tokens in lines))


# =========================================================
# ランダム生成
# =========================================================

def _distinct_values(rng: np.random.Generator, lo: int, hi: int, count: int) -> List[int]:
    if count == 0:
        return []
    span = hi - lo + 1
    if span <= 4 * count:
        return [lo + int(x) for x in rng.permutation(span)[:count]]
    chosen: List[int] = []
    seen = set()
    while len(chosen) < count:
        for x in rng.integers(lo, hi, size=2 * (count - len(chosen)), endpoint=True).tolist():
            if x not in seen:
                seen.add(x)
                chosen.append(x)
                if len(chosen) == count:
                    break
    return chosen


def _random_value(decl: VarDecl, block: Block, rng: np.random.Generator) -> Any:
    if decl.kind == DeclKind.INT:
        return int(rng.integers(decl.min, decl.effective_max, endpoint=True))
    length = block[decl.len_ref]
    if decl.kind == DeclKind.ARRAY:
        if decl.distinct:
            values = _distinct_values(rng, decl.min, decl.effective_max, length)
        else:
            values = rng.integers(decl.min, decl.effective_max, size=length, endpoint=True).tolist()
        return sorted(values) if decl.sorted else values
    picks = rng.integers(0, len(decl.alphabet), size=length)
    return "".join(decl.alphabet[i] for i in picks.tolist())


def generate_random_values(spec: GeneratorSpec, seed: int, index: int) -> CaseValues:
    if spec.multi_case is not None:
        mc = spec.multi_case
        count = int(_stream(seed, index, 0, 0).integers(mc.min, mc.effective_max, endpoint=True))
        block_ids = range(1, count + 1)
    else:
        block_ids = range(0, 1)

    values = CaseValues()
    for block_id in block_ids:
        block: Block = {}
        for position, decl in enumerate(spec.decls, start=1):
            if decl.kind == DeclKind.LITERAL:
                continue
            block[decl.name] = _random_value(decl, block, _stream(seed, index, block_id, position))
        values.blocks.append(block)
    return values


def generate_random(spec: GeneratorSpec, seed: int, index: int) -> TestCase:
    """(seed, index) から決定的にランダム入力を生成"""
    values = generate_random_values(spec, seed, index)
    return TestCase(input=render_case(spec, values), origin=CaseOrigin.random(seed, index))


def iter_random(spec: GeneratorSpec, seed: int, count: int, start: int = 0) -> Iterator[TestCase]:
    for index in range(start, start + count):
        yield generate_random(spec, seed, index)


# =========================================================
# エッジケース
# =========================================================

@dataclass(frozen=True)
class EdgeStrategy:
    """エッジケースの作り方（長さ変数・その他整数・要素・ケース数の選び方）"""
    name: str
    length: str
    scalar: str
    elements: str
    cases: str = "min"
    applies: Callable[[GeneratorSpec], bool] = lambda spec: True


EDGE_STRATEGIES = (
    EdgeStrategy("all-min", length="min", scalar="min", elements="min"),
    EdgeStrategy("all-max", length="max", scalar="max", elements="max"),
    EdgeStrategy("min-length", length="min", scalar="max", elements="max",
                 applies=lambda spec: bool(spec.length_refs)),
    EdgeStrategy("max-length-min-elements", length="max", scalar="min", elements="min",
                 applies=lambda spec: bool(spec.length_refs)),
    EdgeStrategy("all-equal", length="max", scalar="mid", elements="mid",
                 applies=lambda spec: spec.has_sequences),
    EdgeStrategy("sorted-ascending", length="max", scalar="max", elements="ascending",
                 applies=lambda spec: spec.has_sequences),
    EdgeStrategy("sorted-descending", length="max", scalar="max", elements="descending",
                 applies=lambda spec: any(d.kind == DeclKind.ARRAY and not d.sorted for d in spec.decls)),
    EdgeStrategy("distinct-permutation", length="max", scalar="max", elements="permutation",
                 applies=lambda spec: any(d.distinct for d in spec.decls)),
    EdgeStrategy("max-cases", length="min", scalar="min", elements="min", cases="max",
                 applies=lambda spec: spec.multi_case is not None),
)


def _pick_int(lo: int, hi: int, how: str) -> int:
    if how == "min":
        return lo
    if how == "max":
        return hi
    return lo + (hi - lo) // 2


def _spread(lo: int, hi: int, count: int) -> List[int]:
    if count == 1:
        return [lo]
    return [lo + i * (hi - lo) // (count - 1) for i in range(count)]


def _edge_array(decl: VarDecl, count: int, how: str, position: int) -> List[int]:
    lo, hi = decl.min, decl.effective_max
    if count == 0:
        return []
    if how == "min":
        values = list(range(lo, lo + count)) if decl.distinct else [lo] * count
    elif how == "max":
        values = list(range(hi - count + 1, hi + 1)) if decl.distinct else [hi] * count
    elif how == "mid":
        mid = lo + (hi - lo) // 2
        if decl.distinct:
            start = min(max(lo, mid - count // 2), hi - count + 1)
            values = list(range(start, start + count))
        else:
            values = [mid] * count
    elif how == "ascending":
        values = _spread(lo, hi, count)
    elif how == "descending":
        values = _spread(lo, hi, count)[::-1]
    else:
        if hi - lo + 1 >= count:
            values = [lo + int(x) for x in _stream(0, 0, 0, position).permutation(count)]
        else:
            values = _spread(lo, hi, count)
    return sorted(values) if decl.sorted else values


def _edge_string(decl: VarDecl, count: int, how: str) -> str:
    alphabet = decl.alphabet
    if how == "min":
        return alphabet[0] * count
    if how == "max":
        return alphabet[-1] * count
    if how == "mid":
        return alphabet[len(alphabet) // 2] * count
    if how == "descending":
        alphabet = alphabet[::-1]
    return "".join(alphabet[i % len(alphabet)] for i in range(count))


def _edge_block(spec: GeneratorSpec, strategy: EdgeStrategy) -> Block:
    lengths = spec.length_refs
    block: Block = {}
    for position, decl in enumerate(spec.decls, start=1):
        if decl.kind == DeclKind.INT:
            how = strategy.length if decl.name in lengths else strategy.scalar
            block[decl.name] = _pick_int(decl.min, decl.effective_max, how)
        elif decl.kind == DeclKind.ARRAY:
            block[decl.name] = _edge_array(decl, block[decl.len_ref], strategy.elements, position)
        elif decl.kind == DeclKind.STRING:
            block[decl.name] = _edge_string(decl, block[decl.len_ref], strategy.elements)
    return block


def generate_edge_cases(spec: GeneratorSpec) -> List[TestCase]:
    """既定の戦略順にエッジケースを生成（同一入力は除外）"""
    cases: List[TestCase] = []
    seen = set()
    for strategy in EDGE_STRATEGIES:
        if not strategy.applies(spec):
            continue
        block = _edge_block(spec, strategy)
        if spec.multi_case is not None:
            mc = spec.multi_case
            count = mc.effective_max if strategy.cases == "max" else mc.min
            values = CaseValues([dict(block) for _ in range(count)])
        else:
            values = CaseValues([block])
        text = render_case(spec, values)
        if text in seen:
            continue
        seen.add(text)
        cases.append(TestCase(input=text, origin=CaseOrigin.edge(strategy.name)))
    logger.debug(f"エッジケースを生成しました: {len(cases)}件")
    return cases


def edge_case_by_strategy(spec: GeneratorSpec, name: str) -> Optional[TestCase]:
    for case in generate_edge_cases(spec):
        if case.origin.strategy == name:
            return case
    return None
