#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
ファイル入出力ユーティリティ（JSON・テキストのアトミック書き込み）
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

from .exceptions import ParseError


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """一時ファイルに書いてから置き換える"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
    return path


def write_json_atomic(path: Union[str, Path], data: Any) -> Path:
    return write_text_atomic(path, json.dumps(data, ensure_ascii=False, indent=2) + "\n")


def read_json(path: Union[str, Path], what: str = "document") -> Any:
    """JSON を読み込む（読めない・壊れている場合は ParseError）"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {what} {path}: {e}", field=what) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed {what}: {e.msg}", line=e.lineno, column=e.colno) from e
