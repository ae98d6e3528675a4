# -*- coding: utf-8 -*-
"""失敗ケース縮約のテスト"""

import pytest

from conftest import BUGGY_SOURCE, CORRECT_SOURCE, python_solution
from services.core.models import CaseOrigin, Failure, Role, TestCase
from services.differential.shrink import case_size, shrink_failure
from services.differential.stress import StressTester
from services.problem.problem_model import parse_problem
from services.testgen.dsl import parse_generator_spec
from services.testgen.generator import CaseValues, render_case
from services.testgen.validator import parse_case


MULTI_GEN = "cases t 1 10\nint n 1 6\narray a n 1 9\n"

MULTI_CORRECT = """\
t = int(input())
for _ in range(t):
    n = int(input())
    a = list(map(int, input().split()))
    print(sum(a))
"""

# 7 を含むサブケースだけ誤答する
MULTI_BUGGY = """\
t = int(input())
for _ in range(t):
    n = int(input())
    a = list(map(int, input().split()))
    print(sum(a) + (1 if 7 in a else 0))
"""


@pytest.fixture
def multi_problem(tmp_path):
    return parse_problem({
        "id": "multi-sum",
        "statement": "Print the sum of each array.",
        "input_description": "t, then t arrays.",
        "output_description": "t sums.",
        "time_ms": 2000,
        "memory_mb": 256,
        "samples": [{"input": "1\n1\n5\n", "output": "5\n"}],
        "generator": "gen.dsl",
    }, base_dir=tmp_path)


@pytest.fixture
def programs(sandbox):
    built = []

    def _pair(candidate_source, reference_source):
        pair = (sandbox.compile(python_solution(candidate_source)),
                sandbox.compile(python_solution(reference_source, Role.REFERENCE)))
        built.extend(pair)
        return pair

    yield _pair
    for program in built:
        sandbox.cleanup(program)


def failure_for(text, candidate, reference, problem, sandbox):
    test = TestCase(input=text, origin=CaseOrigin.random(0, 0))
    kind, ref_result, cand_result = StressTester(sandbox).evaluate(
        candidate, reference, test, problem, problem.limits)
    assert kind is not None
    return Failure(test=test, expected=ref_result.stdout, actual=cand_result.stdout)


def test_multi_case_failure_shrinks_to_one_sub_case(sandbox, programs, multi_problem):
    gen = parse_generator_spec(MULTI_GEN)
    blocks = [{"n": 3, "a": [1, 2, 3]} for _ in range(10)]
    blocks[2] = {"n": 4, "a": [1, 7, 2, 2]}
    text = render_case(gen, CaseValues(blocks))
    candidate, reference = programs(MULTI_BUGGY, MULTI_CORRECT)
    failure = failure_for(text, candidate, reference, multi_problem, sandbox)

    shrunk = shrink_failure(failure, gen, multi_problem, candidate, reference, budget=100, sandbox=sandbox)

    values = parse_case(gen, shrunk.test.input)
    assert len(values.blocks) == 1
    assert 7 in values.blocks[0]["a"]
    assert shrunk.test.origin.shrunk
    assert case_size(gen, values, shrunk.test.input) < case_size(gen, parse_case(gen, text), text)
    assert shrunk.expected != shrunk.actual


def test_zero_budget_returns_original(sandbox, programs, multi_problem):
    gen = parse_generator_spec(MULTI_GEN)
    text = render_case(gen, CaseValues([{"n": 2, "a": [7, 1]}, {"n": 1, "a": [3]}]))
    candidate, reference = programs(MULTI_BUGGY, MULTI_CORRECT)
    failure = failure_for(text, candidate, reference, multi_problem, sandbox)
    assert shrink_failure(failure, gen, multi_problem, candidate, reference, 0, sandbox) is failure


def test_minimal_failure_is_a_fixed_point(sandbox, programs, problem):
    gen = parse_generator_spec("int n 1 100\narray a n 1 1000\n")
    text = render_case(gen, CaseValues([{"n": 100, "a": [5] * 100}]))
    candidate, reference = programs(BUGGY_SOURCE, CORRECT_SOURCE)
    failure = failure_for(text, candidate, reference, problem, sandbox)
    shrunk = shrink_failure(failure, gen, problem, candidate, reference, 50, sandbox)
    assert shrunk.test.input == failure.test.input


def test_inputs_outside_the_generator_are_left_alone(sandbox, programs, problem):
    gen = parse_generator_spec("int n 1 100\narray a n 1 1000\n")
    candidate, reference = programs(BUGGY_SOURCE, CORRECT_SOURCE)
    failure = Failure(test=TestCase(input="not an input\n", origin=CaseOrigin.sample(0)),
                      expected="1\n", actual="2\n")
    assert shrink_failure(failure, gen, problem, candidate, reference, 50, sandbox) is failure
