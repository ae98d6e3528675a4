#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
設定管理モジュール

デフォルト値 → ツール設定ファイル（YAML）→ 環境変数 の順に上書きする。
"""

import os
import shutil
import shlex
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .exceptions import ParseError, SandboxError


DEFAULT_LANGUAGES = {
    "cpp": {
        "compile_cmd": "g++ -std=c++17 -O2 -pipe -o {bin} {src}",
        "run_cmd": "{bin}",
        "extension": "cpp",
    },
    "python": {
        "compile_cmd": "{python} -m py_compile {src}",
        "run_cmd": "{python} {src}",
        "extension": "py",
    },
}


@dataclass(frozen=True)
class LanguageToolchain:
    """言語ごとのコンパイル・実行コマンド"""
    name: str
    compile_cmd: Optional[str]
    run_cmd: str
    extension: str

    def compile_argv(self, src: Path, binary: Path) -> Optional[list]:
        if not self.compile_cmd:
            return None
        return self._expand(self.compile_cmd, src, binary)

    def run_argv(self, src: Path, binary: Path) -> list:
        return self._expand(self.run_cmd, src, binary)

    @staticmethod
    def _expand(template: str, src: Path, binary: Path) -> list:
        # プレースホルダはトークン単位で置換する（パスに空白があっても壊れない）
        values = {"src": str(src), "bin": str(binary), "python": sys.executable}
        return [token.format(**values) for token in shlex.split(template)]


class Config:
    """システム設定クラス"""

    def __init__(self, config_path: Optional[Path] = None):
        # 作業ディレクトリ（コンパイル・実行・セッション・ログ）
        self.work_root = Path(os.getenv('DEPRO_WORK_ROOT', str(Path.cwd() / ".depro")))

        # 言語設定
        self.languages: Dict[str, LanguageToolchain] = {
            name: LanguageToolchain(name=name, **spec) for name, spec in DEFAULT_LANGUAGES.items()
        }

        # サンドボックス設定
        self.reference_time_factor = 10
        self.watchdog_factor = 2.0
        self.compile_timeout_s = 60
        self.memory_poll_ms = 10
        self.max_output_mb = 64

        # LLM プロバイダ設定（認証情報は環境変数名のみ保持）
        self.llm_endpoint = "https://api.openai.com/v1/chat/completions"
        self.llm_model = "gpt-5"
        self.llm_credentials_env = "DEPRO_LLM_API_KEY"
        self.llm_request_timeout_ms = 300_000
        self.llm_max_retries = 3
        self.llm_retry_delay_s = 2.0
        self.llm_params: Dict[str, Any] = {}

        # ログ設定
        self.log_level = "INFO"
        self.log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        self.log_max_bytes = 10 * 1024 * 1024  # 10MB
        self.log_backup_count = 5

        # 設定ファイルを反映
        self.config_path = self._resolve_config_path(config_path)
        if self.config_path is not None:
            self._apply_file(self.config_path)

        # 環境変数を反映
        self._apply_environment()

    @property
    def logs_dir(self) -> Path:
        return self.work_root / "logs"

    @property
    def sessions_dir(self) -> Path:
        return self.work_root / "sessions"

    @property
    def builds_dir(self) -> Path:
        return self.work_root / "builds"

    def _resolve_config_path(self, config_path: Optional[Path]) -> Optional[Path]:
        """ツール設定ファイルのパスを決定"""
        if config_path is not None:
            return Path(config_path)
        env_path = os.getenv('DEPRO_CONFIG', '')
        if env_path:
            return Path(env_path)
        local = Path.cwd() / "depro.yaml"
        return local if local.exists() else None

    def _apply_file(self, path: Path):
        """YAML 設定ファイルを読み込んで上書き"""
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as e:
            raise ParseError(f"cannot read tool config {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ParseError(f"malformed tool config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ParseError("tool config must be a mapping", field="<root>")

        for name, spec in (data.get("languages") or {}).items():
            if not isinstance(spec, dict) or "run_cmd" not in spec:
                raise ParseError("language entry needs run_cmd", field=f"languages.{name}")
            base = DEFAULT_LANGUAGES.get(name, {})
            self.languages[name] = LanguageToolchain(
                name=name,
                compile_cmd=spec.get("compile_cmd", base.get("compile_cmd")),
                run_cmd=spec["run_cmd"],
                extension=spec.get("extension", base.get("extension", name)),
            )

        sandbox = data.get("sandbox") or {}
        self.reference_time_factor = int(sandbox.get("reference_time_factor", self.reference_time_factor))
        self.watchdog_factor = float(sandbox.get("watchdog_factor", self.watchdog_factor))
        self.compile_timeout_s = int(sandbox.get("compile_timeout_s", self.compile_timeout_s))
        self.memory_poll_ms = int(sandbox.get("memory_poll_ms", self.memory_poll_ms))
        self.max_output_mb = int(sandbox.get("max_output_mb", self.max_output_mb))

        provider = data.get("provider") or {}
        self.llm_endpoint = provider.get("endpoint", self.llm_endpoint)
        self.llm_model = provider.get("model", self.llm_model)
        self.llm_credentials_env = provider.get("credentials_env", self.llm_credentials_env)
        self.llm_request_timeout_ms = int(provider.get("request_timeout_ms", self.llm_request_timeout_ms))
        self.llm_max_retries = int(provider.get("max_retries", self.llm_max_retries))
        self.llm_retry_delay_s = float(provider.get("retry_delay_s", self.llm_retry_delay_s))
        self.llm_params = dict(provider.get("params") or {})

        logging_cfg = data.get("logging") or {}
        self.log_level = str(logging_cfg.get("level", self.log_level)).upper()
        self.log_max_bytes = int(logging_cfg.get("max_bytes", self.log_max_bytes))
        self.log_backup_count = int(logging_cfg.get("backup_count", self.log_backup_count))

        if "work_root" in data:
            self.work_root = Path(data["work_root"])

    def _apply_environment(self):
        """環境変数で個別に上書き"""
        env_root = os.getenv('DEPRO_WORK_ROOT', '')
        if env_root:
            self.work_root = Path(env_root)
        self.log_level = os.getenv('DEPRO_LOG_LEVEL', self.log_level).upper()
        self.llm_endpoint = os.getenv('DEPRO_LLM_ENDPOINT', self.llm_endpoint)
        self.llm_model = os.getenv('DEPRO_LLM_MODEL', self.llm_model)

    def ensure_directories(self):
        """必要なディレクトリを作成"""
        for directory in (self.work_root, self.logs_dir, self.sessions_dir, self.builds_dir):
            directory.mkdir(parents=True, exist_ok=True)

    def get_language(self, name: str) -> LanguageToolchain:
        """言語設定を取得"""
        toolchain = self.languages.get(name)
        if toolchain is None:
            raise SandboxError(f"no toolchain configured for language '{name}'")
        return toolchain

    def language_for_extension(self, extension: str) -> Optional[str]:
        """拡張子から言語名を推定"""
        ext = extension.lstrip(".").lower()
        for toolchain in self.languages.values():
            if toolchain.extension == ext:
                return toolchain.name
        if ext in ("cc", "cxx", "c++"):
            return "cpp"
        return None

    def validate_configuration(self) -> dict:
        """設定の検証を行い、結果を辞書で返す"""
        result = {"valid": True, "warnings": [], "errors": []}

        for toolchain in self.languages.values():
            for template in filter(None, (toolchain.compile_cmd, toolchain.run_cmd)):
                program = shlex.split(template)[0] if template.strip() else ""
                if "{" in program:
                    continue
                if not shutil.which(program):
                    result["warnings"].append(
                        f"{toolchain.name}: '{program}' が PATH に見つかりません"
                    )

        if self.reference_time_factor < 1:
            result["errors"].append("sandbox.reference_time_factor は 1 以上が必要です")
        if self.watchdog_factor < 1.0:
            result["errors"].append("sandbox.watchdog_factor は 1.0 以上が必要です")

        result["valid"] = not result["errors"]
        return result

    def snapshot(self) -> dict:
        """セッション保存用の設定スナップショット（秘密情報は含まない）"""
        return {
            "languages": {
                name: {"compile_cmd": t.compile_cmd, "run_cmd": t.run_cmd, "extension": t.extension}
                for name, t in self.languages.items()
            },
            "sandbox": {
                "reference_time_factor": self.reference_time_factor,
                "watchdog_factor": self.watchdog_factor,
                "compile_timeout_s": self.compile_timeout_s,
                "memory_poll_ms": self.memory_poll_ms,
                "max_output_mb": self.max_output_mb,
            },
        }
