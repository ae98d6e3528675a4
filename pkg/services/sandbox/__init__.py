#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sandbox services - コンパイルと制限付き実行
"""

from .runner import CompiledProgram, Sandbox

__all__ = [
    'CompiledProgram',
    'Sandbox',
]
