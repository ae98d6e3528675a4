#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Core services - 設定管理・ログ機能・共通モデル
"""

from .config import Config, LanguageToolchain
from .logger import Logger
from .exceptions import (
    DeproError, InputFault, InfrastructureFault, ParseError, ValidationError, CompileError, NoCodeBlock,
    ReferenceGenerationFailed, SandboxError, CheckerError, ProviderError,
    ReplayMiss, ScriptExhausted,
)
from .files import write_text_atomic, write_json_atomic, read_json
from .models import (
    ResourceLimits, SampleCase, ComparatorMode, ComparatorSpec, ProblemSpec,
    OriginKind, CaseOrigin, TestCase, Role, SolutionArtifact, RunStatus, RunResult,
    Failure, OutcomeKind, StressOutcome, PromptKind, ChatExchange,
)

__all__ = [
    'Config',
    'LanguageToolchain',
    'Logger',
    'DeproError',
    'InputFault',
    'InfrastructureFault',
    'ParseError',
    'ValidationError',
    'CompileError',
    'NoCodeBlock',
    'ReferenceGenerationFailed',
    'SandboxError',
    'CheckerError',
    'ProviderError',
    'ReplayMiss',
    'ScriptExhausted',
    'ResourceLimits',
    'SampleCase',
    'ComparatorMode',
    'ComparatorSpec',
    'ProblemSpec',
    'OriginKind',
    'CaseOrigin',
    'TestCase',
    'Role',
    'SolutionArtifact',
    'RunStatus',
    'RunResult',
    'Failure',
    'OutcomeKind',
    'StressOutcome',
    'PromptKind',
    'ChatExchange',
    'write_text_atomic',
    'write_json_atomic',
    'read_json',
]
