#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Orchestrator services - デバッグループ・セッション管理・レポート
"""

from .session import (
    SessionStatus, SessionMode, CompileStatus, IterationRecord, DebugSession, SessionStore,
    session_slug,
)
from .loop import LoopConfig, DebugLoop, ReplayResult, compare_sessions, replay_session
from .report import (
    SessionReport, build_report, load_baseline, reduction_percent, comparison_table, export_excel,
)

__all__ = [
    'SessionStatus',
    'SessionMode',
    'CompileStatus',
    'IterationRecord',
    'DebugSession',
    'SessionStore',
    'session_slug',
    'LoopConfig',
    'DebugLoop',
    'ReplayResult',
    'compare_sessions',
    'replay_session',
    'SessionReport',
    'build_report',
    'load_baseline',
    'reduction_percent',
    'comparison_table',
    'export_excel',
]
