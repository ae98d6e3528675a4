#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
入力検証モジュール

生成器とは独立に、入力テキストを GeneratorSpec に沿って読み直し、宣言された
範囲・形状・レイアウトに適合するかを確認する。読み取った構造化値は縮約でも使う。
"""

import re
from typing import List

from ..core.exceptions import ValidationError
from .dsl import DeclKind, GeneratorSpec, Layout, VarDecl
from .generator import Block, CaseValues


_CANONICAL_INT = re.compile(r"^(0|-?[1-9]\d*)$")


class _Reader:
    """行単位のトークン読み取り"""

    def __init__(self, text: str):
        if not text.endswith("\n") or (text != "\n" and text.endswith("\n\n")):
            raise ValidationError("input ends with exactly one newline")
        self.lines = text[:-1].split("\n")
        for number, line in enumerate(self.lines, start=1):
            if line != " ".join(line.split()):
                raise ValidationError("tokens separated by single spaces", f"line {number}")
        self.line_no = 0
        self.tokens: List[str] = []
        self.started = False

    def _finish_line(self):
        if self.started and self.tokens:
            raise ValidationError("no extra tokens", f"line {self.line_no}: {' '.join(self.tokens)}")

    def start_line(self):
        self._finish_line()
        self.line_no += 1
        self.started = True
        if self.line_no <= len(self.lines):
            self.tokens = self.lines[self.line_no - 1].split()
        else:
            self.tokens = []

    def take(self, count: int, what: str) -> List[str]:
        if len(self.tokens) < count:
            raise ValidationError("value present", f"line {self.line_no}: missing {what}")
        taken, self.tokens = self.tokens[:count], self.tokens[count:]
        return taken

    def finish(self):
        self._finish_line()
        if self.line_no < len(self.lines):
            raise ValidationError("no extra lines", f"line {self.line_no + 1}")


def _read_int(token: str, lo: int, hi: int, where: str) -> int:
    if not _CANONICAL_INT.match(token):
        raise ValidationError("integer token", f"{where}: '{token}'")
    value = int(token)
    if not lo <= value <= hi:
        raise ValidationError("value in range", f"{where}={value} not in [{lo}, {hi}]")
    return value


def _read_decl(reader: _Reader, decl: VarDecl, block: Block):
    if decl.layout == Layout.OWN_LINE or not reader.started:
        reader.start_line()
    where = f"line {reader.line_no}: {decl.name}"

    if decl.kind == DeclKind.LITERAL:
        expected = decl.text.split()
        if reader.take(len(expected), "literal") != expected:
            raise ValidationError("literal matches", f"line {reader.line_no}")
        return

    if decl.kind == DeclKind.INT:
        block[decl.name] = _read_int(reader.take(1, decl.name)[0], decl.min, decl.max, where)
        return

    length = block[decl.len_ref]
    if decl.kind == DeclKind.ARRAY:
        values = [_read_int(token, decl.min, decl.max, f"{where}[{i}]")
                  for i, token in enumerate(reader.take(length, decl.name))]
        if decl.sorted and any(a > b for a, b in zip(values, values[1:])):
            raise ValidationError("sorted array non-decreasing", where)
        if decl.distinct and len(set(values)) != len(values):
            raise ValidationError("distinct array elements unique", where)
        block[decl.name] = values
        return

    text = reader.take(1, decl.name)[0] if length > 0 else ""
    if len(text) != length:
        raise ValidationError("string length matches", f"{where}: {len(text)} != {length}")
    if any(ch not in decl.alphabet for ch in text):
        raise ValidationError("string alphabet", where)
    block[decl.name] = text


def parse_case(spec: GeneratorSpec, text: str) -> CaseValues:
    """入力テキストを読み直して構造化値を返す（不適合なら ValidationError）"""
    reader = _Reader(text)
    values = CaseValues()
    if spec.multi_case is not None:
        mc = spec.multi_case
        reader.start_line()
        count = _read_int(reader.take(1, mc.count_var)[0], mc.min, mc.max,
                          f"line 1: {mc.count_var}")
        block_count = count
    else:
        block_count = 1

    for _ in range(block_count):
        block: Block = {}
        for decl in spec.decls:
            _read_decl(reader, decl, block)
        values.blocks.append(block)
    reader.finish()
    return values


def validate_input(spec: GeneratorSpec, text: str) -> bool:
    try:
        parse_case(spec, text)
    except ValidationError:
        return False
    return True
