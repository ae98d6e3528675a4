#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Test generation services - 入力生成 DSL・ランダム/エッジケース生成・入力検証
"""

from .dsl import (
    DeclKind, Layout, VarDecl, MultiCase, GeneratorSpec, parse_generator_spec,
    load_generator_spec,
)
from .generator import (
    CaseValues, EDGE_STRATEGIES, render_case, generate_random, generate_random_values,
    iter_random, generate_edge_cases, edge_case_by_strategy,
)
from .validator import parse_case, validate_input

__all__ = [
    'DeclKind',
    'Layout',
    'VarDecl',
    'MultiCase',
    'GeneratorSpec',
    'parse_generator_spec',
    'load_generator_spec',
    'CaseValues',
    'EDGE_STRATEGIES',
    'render_case',
    'generate_random',
    'generate_random_values',
    'iter_random',
    'generate_edge_cases',
    'edge_case_by_strategy',
    'parse_case',
    'validate_input',
]
