# -*- coding: utf-8 -*-
"""
テスト共通フィクスチャ

解答プログラムはすべて Python（sys.executable で実行）なので C++ ツールチェーンは不要。
"""

import os
import sys
import tempfile
from pathlib import Path

# services を import する前に作業ディレクトリを一時領域へ向ける
os.environ.setdefault("DEPRO_WORK_ROOT", tempfile.mkdtemp(prefix="depro-tests-"))
os.environ.setdefault("DEPRO_LOG_LEVEL", "WARNING")

project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

import pytest

from services.core.config import Config
from services.core.models import Role, SolutionArtifact
from services.problem.problem_model import load_problem_dir
from services.sandbox.runner import Sandbox


PROBLEM_SPEC = """\
id: sum-of-array
statement: |
  Given n integers, print their sum.
input_description: |
  The first line contains n (1 <= n <= 100). The second line contains n integers a_i (1 <= a_i <= 1000).
output_description: |
  Print the sum.
time_ms: 2000
memory_mb: 256
samples:
  - input: |
      3
      1 2 3
    output: |
      6
  - input: |
      1
      7
    output: |
      7
generator: gen.dsl
"""

GENERATOR_DSL = """\
int n 1 100
array a n 1 1000
"""

CORRECT_SOURCE = """\
n = int(input())
a = list(map(int, input().split()))
print(sum(a))
"""

# n が上限のときだけ誤答する
BUGGY_SOURCE = """\
n = int(input())
a = list(map(int, input().split()))
print(sum(a) + (1 if n == 100 else 0))
"""

# サンプルは通るが n > 3 で誤答する
WRONG_REFERENCE_SOURCE = """\
n = int(input())
a = list(map(int, input().split()))
print(sum(a) if n <= 3 else 0)
"""

SAMPLE_FAILING_SOURCE = """\
n = int(input())
a = list(map(int, input().split()))
print(max(a))
"""

CRASHING_SOURCE = """\
import sys
sys.exit(3)
"""

LOOPING_SOURCE = """\
while True:
    pass
"""

SYNTAX_ERROR_SOURCE = """\
def broken(:
    pass
"""


def response_with(source: str, language: str = "python", prose: str = "Here is the fix.") -> str:
    """LLM 応答風のテキスト（説明文 + コードブロック1つ）"""
    return f"{prose}\n\n```{language}\n{source}```\n"


@pytest.fixture
def config() -> Config:
    return Config()


@pytest.fixture
def sandbox(config) -> Sandbox:
    return Sandbox(config)


@pytest.fixture
def problem_dir(tmp_path) -> Path:
    directory = tmp_path / "problem"
    directory.mkdir()
    (directory / "problem.spec").write_text(PROBLEM_SPEC, encoding="utf-8")
    (directory / "gen.dsl").write_text(GENERATOR_DSL, encoding="utf-8")
    return directory


@pytest.fixture
def problem(problem_dir):
    return load_problem_dir(problem_dir)


def python_solution(source: str, role: Role = Role.CANDIDATE) -> SolutionArtifact:
    return SolutionArtifact(source=source, language="python", role=role)


@pytest.fixture
def correct_solution() -> SolutionArtifact:
    return python_solution(CORRECT_SOURCE, Role.REFERENCE)


@pytest.fixture
def buggy_solution() -> SolutionArtifact:
    return python_solution(BUGGY_SOURCE)


@pytest.fixture
def write_source(tmp_path):
    """ソースをファイルに書いてパスを返す"""
    def _write(name: str, source: str) -> Path:
        path = tmp_path / name
        path.write_text(source, encoding="utf-8")
        return path
    return _write
