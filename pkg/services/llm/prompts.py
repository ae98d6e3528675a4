#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
プロンプト生成モジュール

すべて引数だけで決まる純粋関数。1回の呼び出しごとに問題コンテキストを含めた
単発プロンプトを組み立てる（会話状態は持たない）。
"""

import re
from typing import Optional

from ..core.models import Failure, ProblemSpec, SolutionArtifact
from ..problem.problem_model import render_problem_context


LANGUAGE_NAMES = {"cpp": "C++", "python": "Python 3"}

SINGLE_BLOCK_REMINDER = (
    "Output only one fenced code block containing the complete program, "
    "with no other code blocks in the reply."
)

_BACKTICK_RUN = re.compile(r"`+")


def fenced(source: str, language: str) -> str:
    """ソース内のバッククォート連続より長いフェンスで囲む"""
    longest = max((len(m.group(0)) for m in _BACKTICK_RUN.finditer(source)), default=0)
    fence = "`" * max(3, longest + 1)
    body = source if source.endswith("\n") else source + "\n"
    return f"{fence}{language}\n{body}{fence}\n"


def _verbatim(text: str) -> str:
    return text[:-1] if text.endswith("\n") else text


def build_bruteforce_prompt(spec: ProblemSpec, language: str = "cpp") -> str:
    """ブルートフォース解を依頼するプロンプト"""
    name = LANGUAGE_NAMES.get(language, language)
    return (
        render_problem_context(spec)
        + "\n"
        + "Task: This is the problem. Can you generate a brute-force solution? "
        + "The brute-force solution must pass all sample test cases; correctness matters "
        + "more than speed. "
        + f"Write it in {name}, reading from standard input and writing to standard output. "
        + "Reply with exactly one fenced code block containing the complete program.\n"
    )


def build_zero_shot_debug_prompt(spec: ProblemSpec, candidate: SolutionArtifact) -> str:
    """失敗ケースを含まないデバッグ依頼（比較用ベースライン）"""
    return (
        render_problem_context(spec)
        + "\n"
        + "Task: Consider the given problem description. Here is my code for this problem. "
        + "I got wrong answer. Can you debug my code? "
        + "Please correct the existing code rather than writing a new solution, and reply with "
        + "the complete corrected program in exactly one fenced code block.\n"
        + "\n"
        + fenced(candidate.source, candidate.language)
    )


def build_failure_debug_prompt(candidate: SolutionArtifact, failure: Failure,
                               spec: Optional[ProblemSpec] = None,
                               diagnostics: Optional[str] = None) -> str:
    """失敗ケース（入力・出力・期待出力）を添えたデバッグ依頼"""
    parts = []
    if spec is not None:
        parts.append(render_problem_context(spec) + "\n")
    parts.append("This is my code.\n")
    parts.append(fenced(candidate.source, candidate.language))
    if diagnostics:
        parts.append("It failed to compile:\n")
        parts.append(fenced(_verbatim(diagnostics), "text"))
        parts.append("The previous version failed in the test case:\n")
    else:
        parts.append("It failed in the test case:\n")
    parts.append(f"Input:\n{_verbatim(failure.test.input)}\n")
    parts.append(f"Output:\n{_verbatim(failure.actual)}\n")
    parts.append(f"Expected Output:\n{_verbatim(failure.expected)}\n")
    if failure.verdict != "WA":
        parts.append(f"Verdict: {failure.verdict}\n")
    parts.append(
        "Can you debug my code? Please correct the existing code rather than writing a new "
        "solution, and reply with the complete corrected program in exactly one fenced code block.\n"
    )
    return "".join(parts)


def append_sample_mismatch(prompt: str, previous: SolutionArtifact, sample_index: int,
                           expected: str, actual: str, verdict: str = "WA") -> str:
    """ブルートフォース解の再依頼（前回の解が通らなかったサンプルを添える）"""
    return (
        prompt
        + "\n"
        + "Your previous solution was:\n"
        + fenced(previous.source, previous.language)
        + f"It failed on Sample Input {sample_index + 1} ({verdict}).\n"
        + f"Output:\n{_verbatim(actual)}\n"
        + f"Expected Output:\n{_verbatim(expected)}\n"
        + "Please fix it so that every sample test case passes.\n"
    )


def with_single_block_reminder(prompt: str) -> str:
    return prompt + "\n" + SINGLE_BLOCK_REMINDER + "\n"
