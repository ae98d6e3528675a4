#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
セッションレポートモジュール

セッションごとの要約（状態・試行回数・反復ごとの所要時間）と、外部の
ベースライン（人手・ゼロショット）を併合した比較表を pandas で作る。
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from ..core.exceptions import ParseError
from ..core.logger import Logger
from .session import DebugSession


BASELINE_COLUMNS = ("problem_id", "human_attempts", "human_minutes", "zero_shot_attempts")

logger = Logger(__name__)


@dataclass
class SessionReport:
    """1セッションの要約"""
    problem_id: str
    mode: str
    status: str
    attempts: int
    iterations: int
    wall_ms_total: int
    bruteforce_exchanges: int
    initial_outcome: Optional[str]
    iteration_rows: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def minutes(self) -> float:
        return round(self.wall_ms_total / 60000.0, 2)

    def iteration_table(self) -> pd.DataFrame:
        columns = ["iteration", "compile", "verdict", "cases_run", "wall_ms"]
        return pd.DataFrame(self.iteration_rows, columns=columns)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem_id": self.problem_id,
            "mode": self.mode,
            "status": self.status,
            "attempts": self.attempts,
            "iterations": self.iterations,
            "wall_ms_total": self.wall_ms_total,
            "minutes": self.minutes,
            "bruteforce_exchanges": self.bruteforce_exchanges,
            "initial_outcome": self.initial_outcome,
            "iteration_table": self.iteration_table().to_dict(orient="records"),
        }

    def to_text(self) -> str:
        lines = [
            f"Problem: {self.problem_id} ({self.mode})",
            f"Status: {self.status}",
            f"Attempts: {self.attempts}",
            f"Total time: {self.wall_ms_total} ms ({self.minutes} min)",
        ]
        if self.initial_outcome:
            lines.append(f"Initial stress: {self.initial_outcome}")
        if self.iteration_rows:
            lines.append("")
            lines.append(self.iteration_table().to_string(index=False))
        return "\n".join(lines) + "\n"


def build_report(session: DebugSession) -> SessionReport:
    """セッションから要約を作る"""
    rows = []
    for record in session.iterations:
        rows.append({
            "iteration": record.index,
            "compile": record.compile_status.value,
            "verdict": record.verdict_kind(),
            "cases_run": record.stress_out.cases_run if record.stress_out else 0,
            "wall_ms": record.wall_ms,
        })
    return SessionReport(
        problem_id=session.problem_id,
        mode=session.mode.value,
        status=session.status_label,
        attempts=session.attempts,
        iterations=len(session.iterations),
        wall_ms_total=session.wall_ms_total,
        bruteforce_exchanges=session.bruteforce_exchanges,
        initial_outcome=session.initial_outcome.summary() if session.initial_outcome else None,
        iteration_rows=rows,
    )


def load_baseline(path: Union[str, Path]) -> pd.DataFrame:
    """ベースライン CSV（problem_id, human_attempts, human_minutes, zero_shot_attempts）"""
    try:
        df = pd.read_csv(path, dtype={"problem_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"cannot read baseline {path}: {e}", field="baseline") from e
    df.columns = [str(col).strip() for col in df.columns]
    if "problem_id" not in df.columns:
        raise ParseError("missing column problem_id", field="baseline")
    for column in BASELINE_COLUMNS[1:]:
        if column not in df.columns:
            df[column] = float("nan")
        df[column] = pd.to_numeric(df[column], errors="coerce")
    return df[list(BASELINE_COLUMNS)]


def reduction_percent(baseline: Any, ours: Any) -> Optional[float]:
    """(baseline − ours) / baseline × 100（ベースラインが無い・0 の場合は None）"""
    if baseline is None or ours is None or pd.isna(baseline) or pd.isna(ours) or baseline == 0:
        return None
    return round((float(baseline) - float(ours)) / float(baseline) * 100.0, 2)


def comparison_table(reports: List[SessionReport],
                     baseline: Optional[pd.DataFrame] = None) -> pd.DataFrame:
    """試行回数・時間の比較表（ベースラインがあれば削減率を付ける）"""
    df = pd.DataFrame([{
        "problem_id": r.problem_id,
        "mode": r.mode,
        "status": r.status,
        "attempts": r.attempts,
        "minutes": r.minutes,
    } for r in reports], columns=["problem_id", "mode", "status", "attempts", "minutes"])

    if baseline is not None:
        df = df.merge(baseline, on="problem_id", how="left")
        df["attempt_reduction_pct"] = [
            reduction_percent(b, o) for b, o in zip(df["human_attempts"], df["attempts"])]
        df["time_reduction_pct"] = [
            reduction_percent(b, o) for b, o in zip(df["human_minutes"], df["minutes"])]
        df["zero_shot_reduction_pct"] = [
            reduction_percent(b, o) for b, o in zip(df["zero_shot_attempts"], df["attempts"])]
    logger.log_data_processing("比較表作成", len(df))
    return df


def export_excel(df: pd.DataFrame, path: Union[str, Path]) -> Path:
    """比較表を Excel に出力"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_excel(path, index=False, sheet_name="report", engine="openpyxl")
    logger.log_file_operation("保存", path)
    return path
