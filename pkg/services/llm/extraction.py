#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
LLM 応答からのコード抽出
"""

import re
from typing import List, Optional, Tuple

from ..core.exceptions import NoCodeBlock
from ..core.models import Role, SolutionArtifact


FENCE_TAGS = {
    "cpp": "cpp", "c++": "cpp", "cc": "cpp", "cxx": "cpp",
    "py": "python", "python": "python", "python3": "python",
}

_OPEN = re.compile(r"^\s*(`{3,})\s*([^`\s]*)[^`]*$")


def find_code_blocks(response: str) -> List[Tuple[str, str]]:
    """閉じたフェンス付きブロックを (タグ, 内容) で列挙"""
    blocks = []
    fence: Optional[str] = None
    tag = ""
    content: List[str] = []
    for line in response.splitlines():
        if fence is None:
            match = _OPEN.match(line)
            if match:
                fence, tag, content = match.group(1), match.group(2).lower(), []
            continue
        stripped = line.strip()
        if stripped and set(stripped) == {"`"} and len(stripped) >= len(fence):
            blocks.append((tag, "\n".join(content) + "\n" if content else ""))
            fence = None
        else:
            content.append(line)
    return blocks


def extract_code(response: str, language_hint: str, role: Role = Role.CANDIDATE,
                 iteration: Optional[int] = None) -> SolutionArtifact:
    """最後のコードブロックを取り出す（言語はフェンスのタグ、無ければヒント）"""
    blocks = find_code_blocks(response)
    if not blocks:
        raise NoCodeBlock()
    tag, source = blocks[-1]
    language = FENCE_TAGS.get(tag, language_hint)
    return SolutionArtifact(source=source, language=language, role=role, origin="llm",
                            iteration=iteration)
