#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
入力生成 DSL モジュール

1行1宣言のテキスト形式で、問題文の制約（変数・範囲・形状）を記述する。

    cases t 1 10 [stress_max=3]
    int n 1 100 [stress_max=8]
    +int k 0 5                      (先頭の + は直前の値と同じ行に空白区切りで置く)
    array a n 1 1000000000 [sorted] [distinct] [stress_max=20]
    string s n a-z
    literal 0 0
"""

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from ..core.exceptions import ParseError, ValidationError


INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_INTEGER = re.compile(r"^[+-]?\d+(?:_\d+)*$")
_SCIENTIFIC = re.compile(r"^([+-]?\d+)[eE](\d+)$")


class DeclKind(str, Enum):
    INT = "int"
    ARRAY = "array"
    STRING = "string"
    LITERAL = "literal"


class Layout(str, Enum):
    OWN_LINE = "own_line"
    INLINE = "space_separated_with_previous"


@dataclass(frozen=True)
class VarDecl:
    """1つの宣言"""
    kind: DeclKind
    name: Optional[str] = None
    layout: Layout = Layout.OWN_LINE
    min: Optional[int] = None
    max: Optional[int] = None
    stress_max: Optional[int] = None
    len_ref: Optional[str] = None
    sorted: bool = False
    distinct: bool = False
    alphabet: Optional[str] = None
    text: Optional[str] = None
    line: int = 0

    @property
    def effective_max(self) -> Optional[int]:
        """ストレステスト用の上限（stress_max で下方修正）"""
        if self.max is None:
            return None
        if self.stress_max is None:
            return self.max
        return min(self.max, self.stress_max)


@dataclass(frozen=True)
class MultiCase:
    """複数テストケース形式（先頭行にケース数）"""
    count_var: str
    min: int
    max: int
    stress_max: Optional[int] = None

    @property
    def effective_max(self) -> int:
        return self.max if self.stress_max is None else min(self.max, self.stress_max)


@dataclass(frozen=True)
class GeneratorSpec:
    """入力生成仕様"""
    decls: Tuple[VarDecl, ...]
    multi_case: Optional[MultiCase] = None

    def decl(self, name: str) -> Optional[VarDecl]:
        for decl in self.decls:
            if decl.name == name:
                return decl
        return None

    @property
    def length_refs(self) -> frozenset:
        return frozenset(d.len_ref for d in self.decls if d.len_ref)

    @property
    def has_sequences(self) -> bool:
        return any(d.kind in (DeclKind.ARRAY, DeclKind.STRING) for d in self.decls)


def _parse_int(token: str, line: int, column: int) -> int:
    if _INTEGER.match(token):
        value = int(token)
    else:
        match = _SCIENTIFIC.match(token)
        if not match:
            raise ParseError(f"expected integer, got '{token}'", line=line, column=column)
        value = int(match.group(1)) * 10 ** int(match.group(2))
    if not INT64_MIN <= value <= INT64_MAX:
        raise ValidationError("values fit in 64 bits", f"line {line}: {token}")
    return value


def _expand_alphabet(token: str, line: int) -> str:
    chars: List[str] = []
    i = 0
    while i < len(token):
        if i + 2 < len(token) and token[i + 1] == "-":
            lo, hi = ord(token[i]), ord(token[i + 2])
            if lo > hi:
                raise ValidationError("alphabet range ascending", f"line {line}: {token[i:i + 3]}")
            chars.extend(chr(c) for c in range(lo, hi + 1))
            i += 3
        else:
            chars.append(token[i])
            i += 1
    return "".join(dict.fromkeys(chars))


class _LineParser:
    """1行分のトークン列（列番号付き）"""

    def __init__(self, text: str, line_no: int):
        self.line_no = line_no
        self.text = text
        self.tokens = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)]
        self.pos = 0

    def next(self, what: str) -> Tuple[str, int]:
        if self.pos >= len(self.tokens):
            column = len(self.text) + 1
            raise ParseError(f"missing {what}", line=self.line_no, column=column)
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def rest(self) -> List[Tuple[str, int]]:
        remaining = self.tokens[self.pos:]
        self.pos = len(self.tokens)
        return remaining

    def name(self) -> str:
        token, column = self.next("name")
        if not _IDENTIFIER.match(token):
            raise ParseError(f"invalid identifier '{token}'", line=self.line_no, column=column)
        return token

    def integer(self, what: str) -> int:
        token, column = self.next(what)
        return _parse_int(token, self.line_no, column)


def _parse_flags(parser: _LineParser, allowed) -> Dict[str, object]:
    flags: Dict[str, object] = {}
    for token, column in parser.rest():
        if token.startswith("stress_max=") and "stress_max" in allowed:
            flags["stress_max"] = _parse_int(token.split("=", 1)[1], parser.line_no, column + 11)
        elif token in allowed and token != "stress_max":
            flags[token] = True
        else:
            raise ParseError(f"unexpected token '{token}'", line=parser.line_no, column=column)
    return flags


def _check_range(name: str, lo: int, hi: int, stress_max: Optional[int], line: int):
    if lo > hi:
        raise ValidationError("min ≤ max", f"line {line}: {name} has {lo} > {hi}")
    if stress_max is not None and stress_max < lo:
        raise ValidationError("stress_max ≥ min", f"line {line}: {name} has stress_max {stress_max} < {lo}")


def parse_generator_spec(text: str) -> GeneratorSpec:
    """DSL テキストを解析して GeneratorSpec を返す"""
    decls: List[VarDecl] = []
    multi_case: Optional[MultiCase] = None
    declared: Dict[str, VarDecl] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue

        parser = _LineParser(raw, line_no)
        keyword, column = parser.next("keyword")
        layout = Layout.OWN_LINE
        if keyword.startswith("+"):
            layout = Layout.INLINE
            keyword = keyword[1:]

        if keyword == "cases":
            if decls or multi_case is not None:
                raise ParseError("'cases' must be the first declaration", line=line_no, column=column)
            name = parser.name()
            lo, hi = parser.integer("min"), parser.integer("max")
            flags = _parse_flags(parser, {"stress_max"})
            if lo < 0:
                raise ValidationError("cases min ≥ 0", f"line {line_no}")
            _check_range(name, lo, hi, flags.get("stress_max"), line_no)
            multi_case = MultiCase(count_var=name, min=lo, max=hi, stress_max=flags.get("stress_max"))
            continue

        if keyword == "literal":
            body = raw.split(None, 1)[1].strip() if len(stripped.split(None, 1)) > 1 else ""
            if not body:
                raise ParseError("missing literal text", line=line_no, column=len(raw) + 1)
            decls.append(VarDecl(kind=DeclKind.LITERAL, layout=layout, text=body, line=line_no))
            continue

        if keyword not in ("int", "array", "string"):
            raise ParseError(f"unknown declaration '{keyword}'", line=line_no, column=column)

        name = parser.name()
        if name in declared or (multi_case is not None and name == multi_case.count_var):
            raise ValidationError("declaration names unique", f"line {line_no}: {name}")

        if keyword == "int":
            lo, hi = parser.integer("min"), parser.integer("max")
            flags = _parse_flags(parser, {"stress_max"})
            _check_range(name, lo, hi, flags.get("stress_max"), line_no)
            decl = VarDecl(kind=DeclKind.INT, name=name, layout=layout, min=lo, max=hi,
                           stress_max=flags.get("stress_max"), line=line_no)
        else:
            len_ref = parser.name()
            length_decl = declared.get(len_ref)
            if length_decl is None:
                raise ValidationError(f"unknown length reference {len_ref}", f"line {line_no}")
            if length_decl.kind != DeclKind.INT:
                raise ValidationError(f"length reference {len_ref} is an integer", f"line {line_no}")
            if length_decl.min < 0:
                raise ValidationError("length reference min ≥ 0", f"line {line_no}: {len_ref}")

            if keyword == "array":
                lo, hi = parser.integer("min"), parser.integer("max")
                flags = _parse_flags(parser, {"sorted", "distinct", "stress_max"})
                _check_range(name, lo, hi, flags.get("stress_max"), line_no)
                decl = VarDecl(kind=DeclKind.ARRAY, name=name, layout=layout, min=lo, max=hi,
                               stress_max=flags.get("stress_max"), len_ref=len_ref,
                               sorted=bool(flags.get("sorted")), distinct=bool(flags.get("distinct")),
                               line=line_no)
                if decl.distinct:
                    if hi - lo + 1 < length_decl.max:
                        raise ValidationError(
                            "distinct arrays require (elem_max − elem_min + 1) ≥ declared max length",
                            f"line {line_no}: {name}")
                    if decl.effective_max - lo + 1 < length_decl.effective_max:
                        raise ValidationError(
                            "distinct arrays require (elem_max − elem_min + 1) ≥ declared max length",
                            f"line {line_no}: {name} under stress_max")
            else:
                token, col = parser.next("alphabet")
                alphabet = _expand_alphabet(token, line_no)
                _parse_flags(parser, set())
                decl = VarDecl(kind=DeclKind.STRING, name=name, layout=layout, len_ref=len_ref,
                               alphabet=alphabet, line=line_no)

        declared[name] = decl
        decls.append(decl)

    if not decls:
        raise ParseError("generator spec declares nothing", line=1, column=1)
    return GeneratorSpec(decls=tuple(decls), multi_case=multi_case)


def load_generator_spec(path) -> GeneratorSpec:
    """DSL ファイルを読み込む"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read generator spec: {e}", field="generator") from e
    return parse_generator_spec(text)
