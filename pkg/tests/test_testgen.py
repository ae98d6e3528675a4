# -*- coding: utf-8 -*-
"""入力生成 DSL・ランダム生成・エッジケース・入力検証のテスト"""

from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings, strategies as st

from services.core.exceptions import ParseError, ValidationError
from services.core.models import OriginKind
from services.testgen.dsl import DeclKind, Layout, parse_generator_spec
from services.testgen.generator import (
    EDGE_STRATEGIES, edge_case_by_strategy, generate_edge_cases, generate_random, iter_random,
)
from services.testgen.validator import parse_case, validate_input


SUM_SPEC = "int n 1 100\narray a n 1 50\n"

RICH_SPEC = """\
# 複数ケース・同一行・ソート済み・重複なし・文字列
cases t 1 5 stress_max=3
int n 1 8
+int k 0 3
array a n 1 20 distinct
array b n -5 5 sorted
string s n a-c
literal end
"""


# =========================================================
# DSL
# =========================================================

def test_minimal_spec_has_two_decls():
    spec = parse_generator_spec("int n 1 100\narray a n 1 1000000000\n")
    assert [d.kind for d in spec.decls] == [DeclKind.INT, DeclKind.ARRAY]
    assert spec.decl("a").len_ref == "n"


def test_inverted_range_is_rejected():
    with pytest.raises(ValidationError) as info:
        parse_generator_spec("int n 5 3\n")
    assert info.value.invariant == "min ≤ max"


def test_dangling_length_reference_is_rejected():
    with pytest.raises(ValidationError) as info:
        parse_generator_spec("array a m 0 9\n")
    assert info.value.invariant == "unknown length reference m"


def test_unknown_keyword_reports_line_and_column():
    with pytest.raises(ParseError) as info:
        parse_generator_spec("int n 1 10\n  float x 0 1\n")
    assert (info.value.line, info.value.column) == (2, 3)


def test_flags_layout_and_alphabet():
    spec = parse_generator_spec(RICH_SPEC)
    assert spec.multi_case.count_var == "t"
    assert spec.multi_case.effective_max == 3
    assert spec.decl("k").layout == Layout.INLINE
    assert spec.decl("a").distinct and not spec.decl("a").sorted
    assert spec.decl("b").sorted
    assert spec.decl("s").alphabet == "abc"
    assert spec.decls[-1].text == "end"


def test_scientific_bounds():
    spec = parse_generator_spec("int n 1 1e9\n")
    assert spec.decl("n").max == 10 ** 9


def test_distinct_needs_enough_values():
    with pytest.raises(ValidationError):
        parse_generator_spec("int n 1 10\narray a n 1 5 distinct\n")


def test_stress_max_below_min_is_rejected():
    with pytest.raises(ValidationError):
        parse_generator_spec("int n 5 10 stress_max=4\n")


def test_duplicate_names_are_rejected():
    with pytest.raises(ValidationError):
        parse_generator_spec("int n 1 2\nint n 1 2\n")


def test_cases_must_come_first():
    with pytest.raises(ParseError):
        parse_generator_spec("int n 1 2\ncases t 1 2\n")


# =========================================================
# ランダム生成
# =========================================================

def test_singleton_range_forces_value():
    spec = parse_generator_spec("int n 1 1\n")
    assert generate_random(spec, 123, 0).input == "1\n"


def test_same_seed_and_index_is_byte_identical():
    spec = parse_generator_spec(SUM_SPEC)
    first = generate_random(spec, 42, 7)
    assert generate_random(spec, 42, 7) == first
    assert first.origin.kind == OriginKind.RANDOM
    assert (first.origin.seed, first.origin.index) == (42, 7)


def test_thousand_cases_reparse_and_are_not_constant():
    spec = parse_generator_spec(SUM_SPEC)
    ns = set()
    for case in iter_random(spec, 42, 1000):
        values = parse_case(spec, case.input)
        block = values.blocks[0]
        assert 1 <= block["n"] <= 100
        assert len(block["a"]) == block["n"]
        assert all(1 <= x <= 50 for x in block["a"])
        ns.add(block["n"])
    assert len(ns) >= 2


def test_generation_is_independent_of_worker_count():
    spec = parse_generator_spec(SUM_SPEC)
    serial = [case.input for case in iter_random(spec, 42, 1000)]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(lambda i: generate_random(spec, 42, i).input, range(1000)))
    assert serial == parallel


def test_start_index_addresses_cases_directly():
    spec = parse_generator_spec(SUM_SPEC)
    tail = list(iter_random(spec, 9, 3, start=10))
    assert [c.origin.index for c in tail] == [10, 11, 12]
    assert tail[0] == generate_random(spec, 9, 10)


def test_stress_max_caps_random_values():
    spec = parse_generator_spec("int n 1 100000 stress_max=10\narray a n 1 1000000000 stress_max=99\n")
    for case in iter_random(spec, 3, 200):
        block = parse_case(spec, case.input).blocks[0]
        assert block["n"] <= 10
        assert max(block["a"]) <= 99


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), index=st.integers(min_value=0, max_value=10 ** 6))
def test_rich_cases_are_sound(seed, index):
    spec = parse_generator_spec(RICH_SPEC)
    case = generate_random(spec, seed, index)
    assert case.input.endswith("\n") and not case.input.endswith("\n\n")
    values = parse_case(spec, case.input)
    assert 1 <= len(values.blocks) <= 3
    for block in values.blocks:
        assert len(set(block["a"])) == len(block["a"])
        assert block["b"] == sorted(block["b"])
        assert set(block["s"]) <= set("abc")


# =========================================================
# エッジケース
# =========================================================

def test_edge_cases_include_range_bounds():
    inputs = [case.input for case in generate_edge_cases(parse_generator_spec("int n 1 100\n"))]
    assert "1\n" in inputs
    assert "100\n" in inputs


def test_edge_cases_force_max_length():
    spec = parse_generator_spec("int n 1 3\narray a n 0 0\n")
    assert "3\n0 0 0\n" in [case.input for case in generate_edge_cases(spec)]


def test_distinct_permutation_edge_case():
    spec = parse_generator_spec("int n 1 8\narray p n 1 8 distinct\n")
    case = edge_case_by_strategy(spec, "distinct-permutation")
    assert case is not None
    block = parse_case(spec, case.input).blocks[0]
    assert sorted(block["p"]) == list(range(1, 9))


def test_edge_cases_are_deterministic_and_unique():
    spec = parse_generator_spec(RICH_SPEC)
    first = generate_edge_cases(spec)
    assert first == generate_edge_cases(spec)
    assert len({case.input for case in first}) == len(first)
    order = [s.name for s in EDGE_STRATEGIES]
    names = [case.origin.strategy for case in first]
    assert names == sorted(names, key=order.index)


def test_edge_cases_are_sound():
    spec = parse_generator_spec(RICH_SPEC)
    for case in generate_edge_cases(spec):
        assert validate_input(spec, case.input), case.origin.strategy


def test_max_cases_uses_effective_count():
    spec = parse_generator_spec(RICH_SPEC)
    case = edge_case_by_strategy(spec, "max-cases")
    assert case.input.startswith("3\n")


def test_planted_boundary_is_an_edge_case():
    spec = parse_generator_spec(SUM_SPEC)
    first_lines = [case.input.split("\n")[0] for case in generate_edge_cases(spec)]
    assert "100" in first_lines


# =========================================================
# 入力検証
# =========================================================

@pytest.mark.parametrize("text", [
    "3\n1 2 3",           # 末尾改行なし
    "3\n1 2 3\n\n",       # 改行が多い
    "3\n1  2 3\n",        # 空白が2つ
    "3\n1 2\n",           # 要素不足
    "3\n1 2 3 4\n",       # 余分なトークン
    "3\n1 2 51\n",        # 範囲外
    "03\n1 2 3\n",        # 正規形でない整数
    "3\n1 2 3\n9\n",      # 余分な行
])
def test_parse_case_rejects_malformed_inputs(text):
    assert not validate_input(parse_generator_spec(SUM_SPEC), text)


def test_parse_case_uses_declared_not_stress_ranges():
    spec = parse_generator_spec("int n 1 100 stress_max=5\n")
    assert parse_case(spec, "100\n").blocks[0]["n"] == 100
