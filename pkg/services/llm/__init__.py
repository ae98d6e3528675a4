#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
LLM services - プロンプト生成・プロバイダ呼び出し・コード抽出
"""

from .prompts import (
    fenced, build_bruteforce_prompt, build_zero_shot_debug_prompt, build_failure_debug_prompt,
    append_sample_mismatch, with_single_block_reminder,
)
from .extraction import extract_code, find_code_blocks
from .gateway import (
    ProviderKind, ProviderConfig, LLMGateway, TranscriptRecorder, load_fixture,
)

__all__ = [
    'fenced',
    'build_bruteforce_prompt',
    'build_zero_shot_debug_prompt',
    'build_failure_debug_prompt',
    'append_sample_mismatch',
    'with_single_block_reminder',
    'extract_code',
    'find_code_blocks',
    'ProviderKind',
    'ProviderConfig',
    'LLMGateway',
    'TranscriptRecorder',
    'load_fixture',
]
