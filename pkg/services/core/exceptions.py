#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
例外定義モジュール

入力起因のエラー（問題定義・DSL・設定）と基盤起因のエラー（プロセス起動・
LLM プロバイダ）を分けて定義する。プログラムの誤動作（TLE/RE など）は
例外ではなく RunStatus で表現する。
"""

from typing import Optional


class DeproError(Exception):
    """全例外の基底クラス"""

    message: str = ""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message


# =========================================================
# 入力起因のエラー
# =========================================================

class InputFault(DeproError):
    pass


class ParseError(InputFault):
    """文書の構文エラー（フィールドパス or 行・列を保持）"""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        location = ""
        if field:
            location = f"{field}: "
        elif line is not None:
            location = f"line {line}, column {column or 1}: "
        super().__init__(f"{location}{message}")


class ValidationError(InputFault):
    """不変条件違反（違反した条件名を保持）"""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant} ({detail})" if detail else invariant)


class CompileError(DeproError):
    """ソリューションのコンパイル失敗"""

    def __init__(self, diagnostics: str):
        self.diagnostics = diagnostics
        super().__init__(diagnostics)


class NoCodeBlock(DeproError):
    """LLM 応答にコードブロックが無い"""

    def __init__(self, message: str = "response contains no fenced code block"):
        super().__init__(message)


class ReferenceGenerationFailed(DeproError):
    """リトライ後もブルートフォース解がサンプルを通らない"""


# =========================================================
# 基盤起因のエラー
# =========================================================

class InfrastructureFault(DeproError):
    pass


class SandboxError(InfrastructureFault):
    """プロセス起動不可などの実行基盤エラー"""


class CheckerError(InfrastructureFault):
    """外部チェッカー自体の異常終了"""


class ProviderError(InfrastructureFault):
    """LLM プロバイダとの通信エラー（リトライ後）"""


class ReplayMiss(ProviderError):
    """リプレイ用フィクスチャに該当プロンプトが無い"""

    def __init__(self, prompt_hash: str):
        self.prompt_hash = prompt_hash
        super().__init__(f"no replay record for prompt_hash {prompt_hash}")


class ScriptExhausted(ProviderError):
    """スクリプト用フィクスチャの応答を使い切った"""

    def __init__(self, consumed: int):
        self.consumed = consumed
        super().__init__(f"scripted fixture exhausted after {consumed} responses")
