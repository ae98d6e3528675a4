# -*- coding: utf-8 -*-
"""ストレステスト（評価順・失敗検出・並列時の決定性）のテスト"""

import dataclasses

import pytest

from conftest import BUGGY_SOURCE, CORRECT_SOURCE, CRASHING_SOURCE, LOOPING_SOURCE, SAMPLE_FAILING_SOURCE, python_solution
from services.core.exceptions import ValidationError
from services.core.models import OriginKind, OutcomeKind, ResourceLimits, Role, RunStatus
from services.differential.comparator import compare_outputs
from services.differential.stress import StressConfig, StressTester, build_case_plan
from services.testgen.dsl import parse_generator_spec
from services.testgen.generator import generate_edge_cases


@pytest.fixture
def gen(problem):
    return parse_generator_spec(problem.resolve_generator_path().read_text(encoding="utf-8"))


@pytest.fixture
def tester(sandbox):
    return StressTester(sandbox)


@pytest.fixture
def compile_source(sandbox):
    programs = []

    def _compile(source, role=Role.CANDIDATE):
        program = sandbox.compile(python_solution(source, role))
        programs.append(program)
        return program

    yield _compile
    for program in programs:
        sandbox.cleanup(program)


def test_config_rejects_zero_cases():
    with pytest.raises(ValidationError):
        StressConfig(max_random_cases=0).validate()


def test_case_plan_order(gen, problem):
    plan = build_case_plan(gen, problem, StressConfig(max_random_cases=5, seed=3))
    kinds = [case.origin.kind for case in plan]
    edges = len(generate_edge_cases(gen))
    assert kinds == [OriginKind.SAMPLE] * 2 + [OriginKind.EDGE] * edges + [OriginKind.RANDOM] * 5
    assert [case.origin.index for case in plan[-5:]] == [0, 1, 2, 3, 4]


def test_case_plan_without_samples_and_edges_last(gen, problem):
    plan = build_case_plan(gen, problem, StressConfig(max_random_cases=3, include_samples_first=False,
                                                      run_edge_cases_first=False))
    assert plan[0].origin.kind == OriginKind.RANDOM
    assert plan[-1].origin.kind == OriginKind.EDGE


def test_identical_programs_have_no_mismatch(tester, compile_source, gen, problem):
    candidate = compile_source(CORRECT_SOURCE)
    reference = compile_source(CORRECT_SOURCE, Role.REFERENCE)
    outcome = tester.stress_test(candidate, reference, gen, problem, StressConfig(max_random_cases=20))
    assert outcome.kind == OutcomeKind.NO_MISMATCH
    assert outcome.cases_run == 2 + len(generate_edge_cases(gen)) + 20
    assert outcome.summary() == f"no mismatch in {outcome.cases_run} cases"


def test_planted_boundary_bug_is_found_among_edge_cases(tester, compile_source, gen, problem):
    candidate = compile_source(BUGGY_SOURCE)
    reference = compile_source(CORRECT_SOURCE, Role.REFERENCE)
    outcome = tester.stress_test(candidate, reference, gen, problem, StressConfig(max_random_cases=20))
    assert outcome.kind == OutcomeKind.FAILURE
    assert outcome.test.origin.kind == OriginKind.EDGE
    assert outcome.test.input.startswith("100\n")
    assert "random" not in outcome.source_counts
    assert outcome.cases_run == outcome.position

    failure = outcome.as_failure()
    assert failure.verdict == "WA"
    limits = problem.limits
    expected = tester.sandbox.run(reference, failure.test.input, limits).stdout
    actual = tester.sandbox.run(candidate, failure.test.input, limits).stdout
    assert compare_outputs(failure.expected, expected, problem.comparator)
    assert compare_outputs(failure.actual, actual, problem.comparator)
    assert not compare_outputs(failure.expected, failure.actual, problem.comparator)


def test_failure_position_is_stable_across_worker_counts(tester, compile_source, gen, problem):
    candidate = compile_source(BUGGY_SOURCE)
    reference = compile_source(CORRECT_SOURCE, Role.REFERENCE)
    outcomes = [
        tester.stress_test(candidate, reference, gen, problem, StressConfig(max_random_cases=10, jobs=jobs))
        for jobs in (1, 4, 1, 4)
    ]
    assert len({(o.kind, o.position, o.test.input) for o in outcomes}) == 1


def test_sample_failure_comes_first(tester, compile_source, gen, problem):
    candidate = compile_source(SAMPLE_FAILING_SOURCE)
    reference = compile_source(CORRECT_SOURCE, Role.REFERENCE)
    outcome = tester.stress_test(candidate, reference, gen, problem, StressConfig(max_random_cases=5))
    assert outcome.kind == OutcomeKind.FAILURE
    assert outcome.position == 1
    assert outcome.test.origin.kind == OriginKind.SAMPLE


def test_candidate_crash_is_candidate_fault(tester, compile_source, gen, problem):
    candidate = compile_source(CRASHING_SOURCE)
    reference = compile_source(CORRECT_SOURCE, Role.REFERENCE)
    outcome = tester.stress_test(candidate, reference, gen, problem, StressConfig(max_random_cases=5))
    assert outcome.kind == OutcomeKind.CANDIDATE_FAULT
    assert outcome.is_failing
    assert outcome.as_failure().verdict == "RE(3)"
    assert outcome.expected == "6\n"


@pytest.mark.slow
def test_reference_timeout_is_reference_fault(tester, compile_source, gen, problem):
    fast_problem = dataclasses.replace(problem, limits=ResourceLimits(time_ms=300, memory_mb=256))
    candidate = compile_source(CORRECT_SOURCE)
    reference = compile_source(LOOPING_SOURCE, Role.REFERENCE)
    outcome = tester.stress_test(candidate, reference, gen, fast_problem,
                                 StressConfig(max_random_cases=5, reference_time_factor=2))
    assert outcome.kind == OutcomeKind.REFERENCE_FAULT
    assert outcome.run_result.status == RunStatus.TLE
    assert not outcome.is_failing
    assert outcome.position == 1


def test_check_samples(tester, compile_source, problem):
    checks = tester.check_samples(compile_source(SAMPLE_FAILING_SOURCE), problem)
    assert [check.passed for check in checks] == [False, True]
    assert checks[0].result.stdout == "3\n"
