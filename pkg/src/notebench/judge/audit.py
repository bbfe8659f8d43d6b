"""Append-only JSON-lines store of judge verdicts; checkpoint for resume.

Every backend attempt is persisted with its raw response; the line that
ends a run is flagged final.  Loading tolerates a torn trailing line
(crash mid-append), so restart never loses more than the in-flight record.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .prompts import PromptKind
from .verdicts import JudgeVerdict

VerdictKey = tuple[str, str, int]  # (encounter_id, prompt_kind, run_index)


class VerdictStore:
    """`fsync` guards against machine crashes; a flushed line already
    survives SIGKILL of the process, so it stays off by default."""

    def __init__(self, path: str | Path, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync
        self._lock = threading.Lock()
        self._handle = None

    def append(self, verdict: JudgeVerdict, final: bool) -> None:
        record = verdict.as_dict()
        record["final"] = final
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            if self._handle is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._handle = self.path.open("a", encoding="utf-8")
            self._handle.write(line + "\n")
            self._handle.flush()
            if self.fsync:
                os.fsync(self._handle.fileno())

    def close(self) -> None:
        with self._lock:
            if self._handle is not None:
                self._handle.close()
                self._handle = None

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    def load_final(self) -> dict[VerdictKey, JudgeVerdict]:
        """Final verdict per (encounter, kind, run); last final line wins."""
        final: dict[VerdictKey, JudgeVerdict] = {}
        for record in self._iter_records():
            if not record.get("final"):
                continue
            verdict = JudgeVerdict.from_dict(record)
            key = (verdict.encounter_id, verdict.prompt_kind.value, verdict.run_index)
            final[key] = verdict
        return final

    def load_attempts(self) -> list[JudgeVerdict]:
        return [JudgeVerdict.from_dict(r) for r in self._iter_records()]

    def _iter_records(self):
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError:
                    # torn write from a crash; drop the partial record
                    continue
                if isinstance(record, dict) and "prompt_kind" in record:
                    try:
                        PromptKind(record["prompt_kind"])
                    except ValueError:
                        continue
                    yield record
