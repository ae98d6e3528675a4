#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
サンドボックス実行モジュール

ソリューションをコンパイルし、時間・メモリ制限付きで1つの入力に対して実行する。
標準入出力は実行ごとの専用ディレクトリ内のファイル経由でやり取りし、
メモリ使用量は psutil で定期的にサンプリングする。
"""

import os
import shutil
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import psutil

from ..core.config import Config
from ..core.exceptions import CompileError, SandboxError
from ..core.logger import Logger
from ..core.models import ResourceLimits, RunResult, RunStatus, SolutionArtifact


MIB = 1024 * 1024
MAX_DIAGNOSTICS_CHARS = 8000


@dataclass(frozen=True)
class CompiledProgram:
    """コンパイル済みプログラム（以後の実行で共有する）"""
    artifact: SolutionArtifact
    workdir: Path
    source_path: Path
    binary_path: Path
    run_argv: Tuple[str, ...]

    @property
    def language(self) -> str:
        return self.artifact.language

    @property
    def digest(self) -> str:
        return self.artifact.digest


def _read_text(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8", errors="replace")
    except OSError:
        return ""


class _Monitor(threading.Thread):
    """実行中プロセス（子孫を含む）の RSS と出力サイズを監視"""

    def __init__(self, process: subprocess.Popen, stdout_path: Path, memory_bytes: int,
                 output_bytes: int, poll_s: float, kill):
        super().__init__(daemon=True)
        self.process = process
        self.stdout_path = stdout_path
        self.memory_bytes = memory_bytes
        self.output_bytes = output_bytes
        self.poll_s = poll_s
        self.kill = kill
        self.peak_bytes = 0
        self.reason: Optional[str] = None
        self._stop_event = threading.Event()

    def stop(self):
        self._stop_event.set()

    def _rss(self, proc: psutil.Process) -> int:
        total = proc.memory_info().rss
        for child in proc.children(recursive=True):
            try:
                total += child.memory_info().rss
            except (psutil.NoSuchProcess, psutil.AccessDenied, psutil.ZombieProcess):
                continue
        return total

    def run(self):
        try:
            proc = psutil.Process(self.process.pid)
        except psutil.NoSuchProcess:
            return
        while not self._stop_event.is_set() and self.process.poll() is None:
            try:
                rss = self._rss(proc)
            except (psutil.NoSuchProcess, psutil.AccessDenied, psutil.ZombieProcess):
                break
            self.peak_bytes = max(self.peak_bytes, rss)
            if rss > self.memory_bytes:
                self.reason = "MLE"
                self.kill()
                break
            try:
                if self.stdout_path.stat().st_size > self.output_bytes:
                    self.reason = "OLE"
                    self.kill()
                    break
            except OSError:
                pass
            self._stop_event.wait(self.poll_s)


class Sandbox:
    """コンパイル・実行を担当するサンドボックス"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.logger = Logger(__name__)

    # =========================================================
    # コンパイル
    # =========================================================

    def compile(self, artifact: SolutionArtifact, workdir: Optional[Path] = None) -> CompiledProgram:
        """ソースを書き出してコンパイル（失敗時は CompileError）"""
        toolchain = self.config.get_language(artifact.language)
        base = Path(workdir) if workdir is not None else self.config.builds_dir
        try:
            base.mkdir(parents=True, exist_ok=True)
            build_dir = Path(tempfile.mkdtemp(prefix=f"{artifact.role.value}_", dir=str(base)))
            source_path = build_dir / f"main.{toolchain.extension}"
            source_path.write_text(artifact.source, encoding="utf-8")
        except OSError as e:
            raise SandboxError(f"cannot prepare build directory: {e}") from e
        binary_path = build_dir / "main"

        argv = toolchain.compile_argv(source_path, binary_path)
        if argv:
            self.logger.debug(f"コンパイル: {' '.join(argv)}")
            try:
                completed = subprocess.run(
                    argv, cwd=str(build_dir), capture_output=True,
                    timeout=self.config.compile_timeout_s,
                )
            except subprocess.TimeoutExpired as e:
                raise CompileError(f"compilation timed out after {self.config.compile_timeout_s}s") from e
            except OSError as e:
                raise SandboxError(f"cannot start compiler '{argv[0]}': {e}") from e

            if completed.returncode != 0:
                diagnostics = (completed.stderr or b"").decode("utf-8", errors="replace")
                diagnostics += (completed.stdout or b"").decode("utf-8", errors="replace")
                self.logger.info(f"コンパイルエラー: {artifact.role.value} ({artifact.language})")
                raise CompileError(diagnostics.strip()[:MAX_DIAGNOSTICS_CHARS] or
                                   f"compiler exited with {completed.returncode}")

        run_argv = tuple(toolchain.run_argv(source_path, binary_path))
        return CompiledProgram(artifact=artifact, workdir=build_dir, source_path=source_path,
                               binary_path=binary_path, run_argv=run_argv)

    def cleanup(self, program: CompiledProgram):
        shutil.rmtree(program.workdir, ignore_errors=True)

    # =========================================================
    # 実行
    # =========================================================

    @staticmethod
    def _kill_group(process: subprocess.Popen):
        try:
            os.killpg(process.pid, signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            try:
                process.kill()
            except OSError:
                pass

    def run(self, program: CompiledProgram, input_text: str, limits: ResourceLimits) -> RunResult:
        """1つの入力でプログラムを実行して判定を返す"""
        limits.validate()
        deadline_ms = int(limits.time_ms * self.config.watchdog_factor)

        try:
            run_dir = Path(tempfile.mkdtemp(prefix="run_", dir=str(program.workdir)))
        except OSError as e:
            raise SandboxError(f"cannot create run directory: {e}") from e
        stdin_path = run_dir / "input.txt"
        stdout_path = run_dir / "output.txt"
        stderr_path = run_dir / "error.txt"

        try:
            stdin_path.write_text(input_text, encoding="utf-8")
            with open(stdin_path, "rb") as fin, open(stdout_path, "wb") as fout, \
                    open(stderr_path, "wb") as ferr:
                try:
                    process = subprocess.Popen(
                        list(program.run_argv), stdin=fin, stdout=fout, stderr=ferr,
                        cwd=str(run_dir), start_new_session=True,
                    )
                except OSError as e:
                    raise SandboxError(f"cannot start '{program.run_argv[0]}': {e}") from e

                started = time.monotonic()
                monitor = _Monitor(
                    process, stdout_path,
                    memory_bytes=limits.memory_mb * MIB,
                    output_bytes=self.config.max_output_mb * MIB,
                    poll_s=self.config.memory_poll_ms / 1000.0,
                    kill=lambda: self._kill_group(process),
                )
                monitor.start()

                timed_out = False
                try:
                    process.wait(timeout=deadline_ms / 1000.0)
                except subprocess.TimeoutExpired:
                    timed_out = True
                    self._kill_group(process)
                    process.wait()
                wall_ms = int((time.monotonic() - started) * 1000)
                monitor.stop()
                monitor.join(timeout=1.0)
                # 子孫プロセスが残らないようにする
                self._kill_group(process)

            stdout = _read_text(stdout_path)
            stderr = _read_text(stderr_path)
        finally:
            shutil.rmtree(run_dir, ignore_errors=True)

        peak_mb = round(monitor.peak_bytes / MIB, 2) if monitor.peak_bytes else None
        common = dict(stdout=stdout, stderr=stderr, peak_mem_mb=peak_mb,
                      exit_code=process.returncode)

        if monitor.reason == "MLE":
            result = RunResult(RunStatus.MLE, wall_ms=wall_ms, **common)
        elif monitor.reason == "OLE":
            result = RunResult(RunStatus.RE, wall_ms=wall_ms,
                               diagnostics=f"output limit exceeded ({self.config.max_output_mb} MB)",
                               **common)
        elif timed_out:
            result = RunResult(RunStatus.TLE, wall_ms=deadline_ms, **common)
        elif wall_ms >= limits.time_ms:
            result = RunResult(RunStatus.TLE, wall_ms=wall_ms, **common)
        elif process.returncode != 0:
            result = RunResult(RunStatus.RE, wall_ms=wall_ms, **common)
        else:
            result = RunResult(RunStatus.OK, wall_ms=wall_ms, **common)
        self.logger.log_run(program.artifact.role.value, result.verdict(), result.wall_ms,
                            int((peak_mb or 0) * 1024))
        return result

    def run_source(self, artifact: SolutionArtifact, input_text: str,
                   limits: ResourceLimits) -> RunResult:
        """コンパイルから実行までを一度に行う（CE は RunResult で返す）"""
        try:
            program = self.compile(artifact)
        except CompileError as e:
            return RunResult(RunStatus.CE, diagnostics=e.diagnostics)
        try:
            return self.run(program, input_text, limits)
        finally:
            self.cleanup(program)
