#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
DePro services - 問題定義・入力生成・サンドボックス・差分テスト・LLM・デバッグループ
"""

__version__ = "0.1.0"
