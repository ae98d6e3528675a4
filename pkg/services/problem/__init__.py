#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Problem services - 問題定義の読み込みとプロンプト用コンテキスト
"""

from .problem_model import (
    PROBLEM_FILENAME, load_problem, load_problem_dir, parse_problem, save_problem,
    render_problem_context,
)

__all__ = [
    'PROBLEM_FILENAME',
    'load_problem',
    'load_problem_dir',
    'parse_problem',
    'save_problem',
    'render_problem_context',
]
