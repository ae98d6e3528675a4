#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
出力比較モジュール
"""

import math
import re
import subprocess
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

from ..core.exceptions import CheckerError, ValidationError
from ..core.logger import Logger
from ..core.models import ComparatorMode, ComparatorSpec


CHECKER_TIMEOUT_S = 60

_INTEGER_TOKEN = re.compile(r"^[+-]?\d+$")
_NUMERIC_TOKEN = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")

logger = Logger(__name__)


def _tokens(text: str, case_insensitive: bool) -> List[str]:
    tokens = text.split()
    return [t.casefold() for t in tokens] if case_insensitive else tokens


def _float_token_equal(expected: str, actual: str, eps: float) -> bool:
    if _INTEGER_TOKEN.match(expected) and _INTEGER_TOKEN.match(actual):
        return expected == actual
    if _NUMERIC_TOKEN.match(expected) and _NUMERIC_TOKEN.match(actual):
        return math.isclose(float(expected), float(actual), rel_tol=eps, abs_tol=eps)
    return expected == actual


def _checker_argv(checker: Path) -> List[str]:
    if checker.suffix == ".py":
        return [sys.executable, str(checker)]
    return [str(checker)]


def run_checker(checker: Path, input_text: str, expected: str, actual: str) -> bool:
    """外部チェッカーを (input, expected, actual) のファイルパスで起動"""
    with tempfile.TemporaryDirectory(prefix="checker_") as tmp:
        tmp_dir = Path(tmp)
        paths = []
        for name, text in (("input.txt", input_text), ("expected.txt", expected), ("actual.txt", actual)):
            path = tmp_dir / name
            path.write_text(text, encoding="utf-8")
            paths.append(str(path))
        try:
            completed = subprocess.run(_checker_argv(checker) + paths, capture_output=True,
                                       timeout=CHECKER_TIMEOUT_S, cwd=tmp)
        except subprocess.TimeoutExpired as e:
            raise CheckerError(f"checker timed out after {CHECKER_TIMEOUT_S}s") from e
        except OSError as e:
            raise CheckerError(f"cannot start checker {checker}: {e}") from e

    if completed.returncode == 0:
        return True
    if completed.returncode == 1:
        return False
    stderr = (completed.stderr or b"").decode("utf-8", errors="replace").strip()
    logger.error(f"チェッカーが異常終了しました: exit={completed.returncode}")
    raise CheckerError(f"checker exited with {completed.returncode}: {stderr[:500]}")


def compare_outputs(expected: str, actual: str, cmp: ComparatorSpec,
                    input_text: Optional[str] = None) -> bool:
    """比較モードに従って2つの出力が等価か判定"""
    if cmp.mode == ComparatorMode.EXACT:
        if cmp.case_insensitive:
            return expected.casefold() == actual.casefold()
        return expected == actual

    if cmp.mode == ComparatorMode.CHECKER:
        checker = cmp.checker_path()
        if checker is None:
            raise ValidationError("checker path present iff mode is checker")
        return run_checker(checker, input_text or "", expected, actual)

    left = _tokens(expected, cmp.case_insensitive)
    right = _tokens(actual, cmp.case_insensitive)
    if len(left) != len(right):
        return False
    if cmp.mode == ComparatorMode.FLOAT_EPS:
        eps = cmp.epsilon or 0.0
        return all(_float_token_equal(a, b, eps) for a, b in zip(left, right))
    return left == right
