#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Differential services - 出力比較・ストレステスト・失敗ケース縮約
"""

from .comparator import compare_outputs, run_checker
from .stress import SampleCheck, StressConfig, StressTester, build_case_plan, stress_test
from .shrink import case_size, shrink_failure

__all__ = [
    'compare_outputs',
    'run_checker',
    'SampleCheck',
    'StressConfig',
    'StressTester',
    'build_case_plan',
    'stress_test',
    'case_size',
    'shrink_failure',
]
