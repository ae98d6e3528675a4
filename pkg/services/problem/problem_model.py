#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
問題定義モジュール

problem.spec（YAML）の読み込み・検証・保存と、全プロンプト共通の
問題コンテキスト文字列の生成を行う。
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from ..core.exceptions import ParseError, ValidationError
from ..core.logger import Logger
from ..core.models import (
    ComparatorMode, ComparatorSpec, ProblemSpec, ResourceLimits, SampleCase,
)


PROBLEM_FILENAME = "problem.spec"

TOP_LEVEL_FIELDS = (
    "id", "statement", "input_description", "output_description",
    "time_ms", "memory_mb", "samples", "comparator", "generator",
)
REQUIRED_FIELDS = (
    "id", "statement", "input_description", "output_description",
    "time_ms", "memory_mb", "samples", "generator",
)
SAMPLE_FIELDS = ("input", "output")
COMPARATOR_FIELDS = ("mode", "epsilon", "checker", "case_insensitive")

logger = Logger(__name__)


def _expect_str(value: Any, field: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"expected text, got {type(value).__name__}", field=field)
    return value


def _expect_int(value: Any, field: str) -> int:
    # YAML の bool は int のサブクラスなので除外する
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected integer, got {value!r}", field=field)
    return value


def _reject_unknown(data: Dict[str, Any], allowed, prefix: str = ""):
    for key in data:
        if key not in allowed:
            raise ParseError("unknown field", field=f"{prefix}{key}")


def _parse_comparator(raw: Any, base_dir: Optional[Path]) -> ComparatorSpec:
    if raw is None:
        return ComparatorSpec(base_dir=base_dir)
    if not isinstance(raw, dict):
        raise ParseError("expected mapping", field="comparator")
    _reject_unknown(raw, COMPARATOR_FIELDS, "comparator.")
    mode_text = _expect_str(raw.get("mode", "tokens"), "comparator.mode")
    try:
        mode = ComparatorMode(mode_text)
    except ValueError:
        raise ParseError(f"unknown comparator mode '{mode_text}'", field="comparator.mode")

    epsilon = raw.get("epsilon")
    if epsilon is not None:
        if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)):
            raise ParseError(f"expected number, got {epsilon!r}", field="comparator.epsilon")
        epsilon = float(epsilon)
    checker = raw.get("checker")
    if checker is not None:
        checker = _expect_str(checker, "comparator.checker")
    case_insensitive = raw.get("case_insensitive", False)
    if not isinstance(case_insensitive, bool):
        raise ParseError("expected boolean", field="comparator.case_insensitive")

    return ComparatorSpec(mode=mode, epsilon=epsilon, checker=checker,
                          case_insensitive=case_insensitive, base_dir=base_dir)


def _parse_samples(raw: Any) -> List[SampleCase]:
    if not isinstance(raw, list):
        raise ParseError("expected list of {input, output}", field="samples")
    samples = []
    for i, item in enumerate(raw):
        path = f"samples[{i}]"
        if not isinstance(item, dict):
            raise ParseError("expected mapping", field=path)
        _reject_unknown(item, SAMPLE_FIELDS, f"{path}.")
        for key in SAMPLE_FIELDS:
            if key not in item:
                raise ParseError("missing required field", field=f"{path}.{key}")
        samples.append(SampleCase(
            input=_expect_str(item["input"], f"{path}.input"),
            expected_output=_expect_str(item["output"], f"{path}.output"),
        ))
    return samples


def parse_problem(data: Any, base_dir: Optional[Path] = None) -> ProblemSpec:
    """読み込み済みの文書から ProblemSpec を構築して検証"""
    if not isinstance(data, dict):
        raise ParseError("problem spec must be a mapping", field="<root>")
    _reject_unknown(data, TOP_LEVEL_FIELDS)
    for key in REQUIRED_FIELDS:
        if key not in data:
            raise ParseError("missing required field", field=key)

    problem_id = _expect_str(data["id"], "id").strip()
    if not problem_id:
        raise ParseError("id must not be empty", field="id")

    spec = ProblemSpec(
        id=problem_id,
        statement=_expect_str(data["statement"], "statement"),
        input_description=_expect_str(data["input_description"], "input_description"),
        output_description=_expect_str(data["output_description"], "output_description"),
        limits=ResourceLimits(
            time_ms=_expect_int(data["time_ms"], "time_ms"),
            memory_mb=_expect_int(data["memory_mb"], "memory_mb"),
        ),
        samples=tuple(_parse_samples(data["samples"])),
        comparator=_parse_comparator(data.get("comparator"), base_dir),
        generator_path=_expect_str(data["generator"], "generator"),
        base_dir=base_dir,
    )
    spec.validate()
    return spec


def load_problem(path: Union[str, Path]) -> ProblemSpec:
    """problem.spec を読み込んで検証済みの ProblemSpec を返す"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"問題定義を読み込めません: {path}")
        raise ParseError(f"cannot read problem spec: {e}", field="<file>") from e

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        if mark is not None:
            raise ParseError(f"malformed document: {getattr(e, 'problem', e)}",
                             line=mark.line + 1, column=mark.column + 1) from e
        raise ParseError(f"malformed document: {e}") from e

    spec = parse_problem(data, base_dir=path.resolve().parent)
    logger.debug(f"問題定義を読み込みました: {spec.id} ({len(spec.samples)} samples)")
    return spec


def load_problem_dir(path: Union[str, Path]) -> ProblemSpec:
    """問題ディレクトリ または problem.spec ファイルを受け付ける"""
    path = Path(path)
    if path.is_dir():
        path = path / PROBLEM_FILENAME
    return load_problem(path)


class _SpecDumper(yaml.SafeDumper):
    pass


def _represent_str(dumper: yaml.SafeDumper, value: str):
    # 複数行テキストはリテラル形式（不可能な場合は PyYAML が引用形式に切り替える）
    if "\n" in value:
        return dumper.represent_scalar("tag:yaml.org,2002:str", value, style="|")
    return dumper.represent_scalar("tag:yaml.org,2002:str", value)


_SpecDumper.add_representer(str, _represent_str)


def problem_to_dict(spec: ProblemSpec) -> Dict[str, Any]:
    comparator: Dict[str, Any] = {"mode": spec.comparator.mode.value}
    if spec.comparator.epsilon is not None:
        comparator["epsilon"] = spec.comparator.epsilon
    if spec.comparator.checker is not None:
        comparator["checker"] = spec.comparator.checker
    if spec.comparator.case_insensitive:
        comparator["case_insensitive"] = True
    return {
        "id": spec.id,
        "statement": spec.statement,
        "input_description": spec.input_description,
        "output_description": spec.output_description,
        "time_ms": spec.limits.time_ms,
        "memory_mb": spec.limits.memory_mb,
        "samples": [{"input": s.input, "output": s.expected_output} for s in spec.samples],
        "comparator": comparator,
        "generator": spec.generator_path,
    }


def save_problem(spec: ProblemSpec, path: Union[str, Path]) -> Path:
    """ProblemSpec を problem.spec 形式で保存"""
    spec.validate()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = yaml.dump(problem_to_dict(spec), Dumper=_SpecDumper, sort_keys=False,
                     allow_unicode=True, default_flow_style=False)
    path.write_text(text, encoding="utf-8")
    logger.log_file_operation("保存", path)
    return path


def _format_limit_time(time_ms: int) -> str:
    return f"{time_ms} ms"


def render_problem_context(spec: ProblemSpec) -> str:
    """全プロンプト共通の問題コンテキスト（決定的）"""
    lines = [
        "Problem Statement:",
        spec.statement.strip("\n"),
        "",
        f"Time Limit: {_format_limit_time(spec.limits.time_ms)}",
        f"Memory Limit: {spec.limits.memory_mb} megabytes",
        "",
        "Input:",
        spec.input_description.strip("\n"),
        "",
        "Output:",
        spec.output_description.strip("\n"),
    ]
    for i, sample in enumerate(spec.samples, start=1):
        lines += [
            "",
            f"Sample Input {i}:",
            sample.input.rstrip("\n"),
            f"Sample Output {i}:",
            sample.expected_output.rstrip("\n"),
        ]
    return "\n".join(lines) + "\n"
