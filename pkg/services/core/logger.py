#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
ログ機能モジュール

ハンドラーは "depro" ロガーにだけ付ける（標準出力はコマンド結果専用なので
コンソールには標準エラー出力を使う）。セッション実行中はセッションディレクトリの
session.log にも同じ内容を書き出す。
"""

import logging
import logging.handlers
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, List, Optional


ROOT_LOGGER = "depro"
SESSION_LOG = "session.log"


def _qualified(name: str) -> str:
    """services.llm.gateway → depro.llm.gateway"""
    if name.startswith("services."):
        name = name[len("services."):]
    if name in ("__main__", "main"):
        name = "cli"
    return f"{ROOT_LOGGER}.{name}"


class Logger:
    """ログ管理クラス"""

    _configured = False
    _level = logging.INFO
    _formatter: Optional[logging.Formatter] = None
    _handlers: List[logging.Handler] = []

    def __init__(self, name: str):
        self.name = _qualified(name)
        self._logger: Optional[logging.Logger] = None

    @property
    def logger(self) -> logging.Logger:
        """depro 配下の標準ロガー"""
        # import 時ではなく最初の出力時に設定を読む
        if self._logger is None:
            if not Logger._configured:
                Logger._configure_from_config()
            self._logger = logging.getLogger(self.name)
        return self._logger

    # =========================================================
    # 設定
    # =========================================================

    @classmethod
    def _configure_from_config(cls):
        """Config の logs_dir・log_level などで初期化"""
        from .config import Config
        config = Config()
        cls.configure(config.logs_dir, config.log_level, config.log_format,
                      config.log_max_bytes, config.log_backup_count)

    @classmethod
    def configure(cls, log_dir: Optional[Path], log_level: str = "INFO",
                  log_format: Optional[str] = None, max_bytes: int = 10 * 1024 * 1024,
                  backup_count: int = 5):
        """コンソールと日付別ローテーションファイルへの出力を設定"""
        if cls._configured:
            return
        cls._level = getattr(logging, log_level.upper(), logging.INFO)
        cls._formatter = logging.Formatter(
            log_format or "%(asctime)s - %(name)s - %(levelname)s - %(message)s")

        base = logging.getLogger(ROOT_LOGGER)
        base.setLevel(cls._level)
        base.propagate = False

        console = logging.StreamHandler()
        cls._install(base, console)

        if log_dir is not None:
            try:
                log_dir.mkdir(parents=True, exist_ok=True)
                log_file = log_dir / f"depro_{datetime.now().strftime('%Y%m%d')}.log"
                cls._install(base, logging.handlers.RotatingFileHandler(
                    log_file, maxBytes=max_bytes, backupCount=backup_count, encoding='utf-8'))
            except OSError as e:
                base.warning(f"ログファイルを作成できません: {e}")

        cls._configured = True

    @classmethod
    def _install(cls, base: logging.Logger, handler: logging.Handler):
        """共通のレベルとフォーマットを付けてハンドラーを登録"""
        handler.setLevel(cls._level)
        handler.setFormatter(cls._formatter)
        base.addHandler(handler)
        cls._handlers.append(handler)

    @classmethod
    def set_level(cls, log_level: str):
        """ログレベルを変更（CLI の --log-level 用）"""
        if not cls._configured:
            cls._configure_from_config()
        cls._level = getattr(logging, log_level.upper(), logging.INFO)
        logging.getLogger(ROOT_LOGGER).setLevel(cls._level)
        for handler in cls._handlers:
            handler.setLevel(cls._level)

    @classmethod
    @contextmanager
    def session_log(cls, session_dir: Path) -> Iterator[Path]:
        """ブロック内のログをセッションディレクトリの session.log にも書く"""
        if not cls._configured:
            cls._configure_from_config()
        path = Path(session_dir) / SESSION_LOG
        base = logging.getLogger(ROOT_LOGGER)
        handler = logging.FileHandler(path, encoding='utf-8')
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(cls._formatter)
        base.addHandler(handler)
        previous = base.level
        base.setLevel(min(previous, logging.DEBUG))
        try:
            yield path
        finally:
            base.removeHandler(handler)
            base.setLevel(previous)
            handler.close()

    # =========================================================
    # 出力
    # =========================================================

    def debug(self, message: str, *args, **kwargs):
        """DEBUG レベルで出力"""
        self.logger.debug(message, *args, **kwargs)

    def info(self, message: str, *args, **kwargs):
        """INFO レベルで出力"""
        self.logger.info(message, *args, **kwargs)

    def warning(self, message: str, *args, **kwargs):
        """WARNING レベルで出力"""
        self.logger.warning(message, *args, **kwargs)

    def error(self, message: str, *args, **kwargs):
        """ERROR レベルで出力"""
        self.logger.error(message, *args, **kwargs)

    def exception(self, exception: Exception, message: Optional[str] = None):
        """例外情報（トレースバック付き）"""
        self.logger.exception(f"{message or '例外が発生しました'}: {exception}")

    def log_phase_start(self, phase: str, description: Optional[str] = None):
        """フェーズ開始（参照解生成・ストレステストなど）"""
        suffix = f" ({description})" if description else ""
        self.info(f"=== {phase} 開始 ==={suffix}")

    def log_phase_end(self, phase: str, success: bool = True, duration: Optional[float] = None):
        """フェーズ終了（失敗時は ERROR）"""
        suffix = f" (処理時間: {duration:.1f}秒)" if duration is not None else ""
        if success:
            self.info(f"=== {phase} 成功 ==={suffix}")
        else:
            self.error(f"=== {phase} 失敗 ==={suffix}")

    @staticmethod
    def _details(details: Optional[dict]) -> str:
        """{k: v} を " (k=v, ...)" の形にする"""
        if not details:
            return ""
        return " (" + ", ".join(f"{k}={v}" for k, v in details.items()) + ")"

    def log_operation(self, operation: str, details: Optional[dict] = None):
        """操作ログ（詳細は key=value で付記）"""
        self.info(f"操作: {operation}{self._details(details)}")

    def log_file_operation(self, operation: str, file_path: Path, success: bool = True):
        """ファイルの保存・読み込み（成功時は DEBUG）"""
        if success:
            self.debug(f"ファイル{operation}: {file_path}")
        else:
            self.error(f"ファイル{operation}失敗: {file_path}")

    def log_data_processing(self, operation: str, count: int, details: Optional[dict] = None):
        """件数付きの処理ログ"""
        self.info(f"{operation}: {count}件{self._details(details)}")

    def log_run(self, label: str, verdict: str, time_ms: int, memory_kb: int):
        """プログラム1回の実行結果（件数が多いので DEBUG）"""
        self.debug(f"実行 {label}: {verdict} ({time_ms} ms, {memory_kb} KB)")
