#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
LLM ゲートウェイモジュール

プロバイダは3種類:
- live:     OpenAI 互換の chat completions API（requests で送信）
- replay:   記録済みトランスクリプトからプロンプトのハッシュで応答を引く
- scripted: フィクスチャの応答をプロンプトに関係なく順番に返す

すべてのやり取りは TranscriptRecorder によってセッションの transcript.json に
追記される（これがそのまま replay 用フィクスチャになる）。
"""

import os
import re
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import requests

from ..core.config import Config
from ..core.exceptions import ParseError, ProviderError, ReplayMiss, ScriptExhausted, ValidationError
from ..core.files import read_json, write_json_atomic
from ..core.logger import Logger
from ..core.models import ChatExchange, PromptKind, sha256_hex


_ENV_NAME = re.compile(r"^[A-Z_][A-Z0-9_]*$")


class ProviderKind(str, Enum):
    LIVE = "live"
    REPLAY = "replay"
    SCRIPTED = "scripted"


@dataclass(frozen=True)
class ProviderConfig:
    """プロバイダ設定（認証情報は環境変数名でのみ参照する）"""
    provider: ProviderKind = ProviderKind.LIVE
    endpoint: Optional[str] = None
    model_name: Optional[str] = None
    credentials_ref: Optional[str] = None
    fixture_path: Optional[Path] = None
    request_timeout_ms: int = 300_000
    max_retries: int = 3
    retry_delay_s: float = 2.0
    params: Dict[str, Any] = field(default_factory=dict)

    def validate(self):
        if self.provider == ProviderKind.LIVE:
            if not self.endpoint or not self.model_name:
                raise ValidationError("live provider needs endpoint and model")
            if not self.credentials_ref or not _ENV_NAME.match(self.credentials_ref):
                raise ValidationError("credentials_ref is an environment-variable name",
                                      f"got {self.credentials_ref!r}")
        elif self.fixture_path is None:
            raise ValidationError(f"{self.provider.value} provider needs a fixture path")
        if self.request_timeout_ms <= 0:
            raise ValidationError("request_timeout_ms > 0")
        if self.max_retries < 0:
            raise ValidationError("max_retries ≥ 0")

    @property
    def provider_id(self) -> str:
        if self.provider == ProviderKind.LIVE:
            return f"live:{self.model_name}"
        return f"{self.provider.value}:{Path(self.fixture_path).name}"

    @classmethod
    def from_config(cls, config: Config, provider: Union[str, ProviderKind] = ProviderKind.LIVE,
                    fixture: Optional[Union[str, Path]] = None, model: Optional[str] = None,
                    endpoint: Optional[str] = None) -> "ProviderConfig":
        """ツール設定と CLI 引数から組み立てる"""
        return cls(
            provider=ProviderKind(provider),
            endpoint=endpoint or config.llm_endpoint,
            model_name=model or config.llm_model,
            credentials_ref=config.llm_credentials_env,
            fixture_path=Path(fixture) if fixture else None,
            request_timeout_ms=config.llm_request_timeout_ms,
            max_retries=config.llm_max_retries,
            retry_delay_s=config.llm_retry_delay_s,
            params=dict(config.llm_params),
        )


def load_fixture(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """フィクスチャ（レコードの配列）を読み込む。文字列だけの要素は {response} とみなす"""
    data = read_json(path, what="fixture")
    if not isinstance(data, list):
        raise ParseError("fixture must be a list of records", field="fixture")
    records = []
    for i, item in enumerate(data):
        if isinstance(item, str):
            item = {"response": item}
        if not isinstance(item, dict) or not isinstance(item.get("response"), str):
            raise ParseError("record needs a text 'response'", field=f"fixture[{i}]")
        records.append(item)
    return records


class TranscriptRecorder:
    """transcript.json への追記（単一ライター）"""

    def __init__(self, path: Union[str, Path], resume: bool = False):
        self.path = Path(path)
        self.records: List[Dict[str, Any]] = []
        if resume and self.path.exists():
            self.records = load_fixture(self.path)

    def append(self, exchange: ChatExchange):
        self.records.append(exchange.to_record())
        write_json_atomic(self.path, self.records)


class _LiveProvider:
    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg
        self.logger = Logger(__name__)

    def _content(self, data: Dict[str, Any]) -> str:
        content = data["choices"][0]["message"]["content"]
        if isinstance(content, list):
            content = "".join(part.get("text", "") for part in content if isinstance(part, dict))
        if not isinstance(content, str):
            raise TypeError("content is not text")
        return content

    def complete(self, prompt: str, kind: PromptKind) -> str:
        api_key = os.getenv(self.cfg.credentials_ref, "")
        if not api_key:
            raise ProviderError(f"environment variable {self.cfg.credentials_ref} is not set")

        headers = {
            'Authorization': f'Bearer {api_key}',
            'Content-Type': 'application/json',
        }
        payload = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        payload.update(self.cfg.params)

        last_error = ""
        for attempt in range(1, self.cfg.max_retries + 2):
            try:
                response = requests.post(
                    self.cfg.endpoint,
                    headers=headers,
                    json=payload,
                    timeout=self.cfg.request_timeout_ms / 1000.0,
                )
            except requests.exceptions.RequestException as e:
                last_error = str(e)
                self.logger.warning(f"LLM API リクエストエラー ({attempt}回目): {last_error}")
            else:
                if response.status_code == 200:
                    try:
                        return self._content(response.json())
                    except (ValueError, KeyError, IndexError, TypeError) as e:
                        self.logger.error(f"LLM API の応答形式が不正です: {e}")
                        raise ProviderError(f"malformed provider response: {e}") from e
                last_error = f"HTTP {response.status_code}: {response.text[:300]}"
                if response.status_code != 429 and response.status_code < 500:
                    self.logger.error(f"LLM API エラー: {last_error}")
                    raise ProviderError(last_error)
                self.logger.warning(f"LLM API 一時エラー ({attempt}回目): {last_error}")

            if attempt <= self.cfg.max_retries:
                time.sleep(self.cfg.retry_delay_s * attempt)

        raise ProviderError(f"provider failed after {self.cfg.max_retries + 1} attempts: {last_error}")


class _ReplayProvider:
    """同じハッシュの応答は記録順に返し、使い切ったら ReplayMiss"""

    def __init__(self, cfg: ProviderConfig):
        self.queues: Dict[str, deque] = defaultdict(deque)
        for i, record in enumerate(load_fixture(cfg.fixture_path)):
            prompt_hash = record.get("prompt_hash")
            if not isinstance(prompt_hash, str):
                raise ParseError("replay record needs 'prompt_hash'", field=f"fixture[{i}]")
            self.queues[prompt_hash].append(record["response"])

    def complete(self, prompt: str, kind: PromptKind) -> str:
        prompt_hash = sha256_hex(prompt)
        queue = self.queues.get(prompt_hash)
        if not queue:
            raise ReplayMiss(prompt_hash)
        return queue.popleft()


class _ScriptedProvider:
    def __init__(self, cfg: ProviderConfig):
        self.responses = [record["response"] for record in load_fixture(cfg.fixture_path)]
        self.position = 0

    def complete(self, prompt: str, kind: PromptKind) -> str:
        if self.position >= len(self.responses):
            raise ScriptExhausted(self.position)
        response = self.responses[self.position]
        self.position += 1
        return response


class LLMGateway:
    """プロンプトを送り、やり取りをトランスクリプトに記録する"""

    def __init__(self, cfg: ProviderConfig, recorder: Optional[TranscriptRecorder] = None):
        cfg.validate()
        self.cfg = cfg
        self.recorder = recorder
        self.logger = Logger(__name__)
        if cfg.provider == ProviderKind.LIVE:
            self.provider = _LiveProvider(cfg)
        elif cfg.provider == ProviderKind.REPLAY:
            self.provider = _ReplayProvider(cfg)
        else:
            self.provider = _ScriptedProvider(cfg)

    def skip(self, count: int):
        """再開時に消費済みの応答を読み飛ばす（scripted のみ位置を持つ）"""
        if isinstance(self.provider, _ScriptedProvider):
            self.provider.position += count

    def complete(self, prompt: str, kind: PromptKind) -> ChatExchange:
        started = time.monotonic()
        response = self.provider.complete(prompt, kind)
        exchange = ChatExchange(prompt=prompt, response=response, kind=kind,
                                provider_id=self.cfg.provider_id)
        self.logger.info(f"LLM 応答受信: {kind.value} ({len(response)} chars, "
                         f"{time.monotonic() - started:.1f}s, hash={exchange.prompt_hash[:12]})")
        if self.recorder is not None:
            self.recorder.append(exchange)
        return exchange
