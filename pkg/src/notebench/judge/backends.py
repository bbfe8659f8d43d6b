"""Judge backends: HTTP chat-completion client and scripted (offline) rules.

The backend contract is a single call: (model_id, prompt) -> completion
string.  The scripted backend replays canned responses from a rules file
so the whole pipeline is runnable and reproducible with no network.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from pathlib import Path
from typing import Protocol

from ..errors import BackendCallError


class JudgeBackend(Protocol):
    def complete(self, model_id: str, prompt: str) -> str: ...


class HttpChatBackend:
    """Chat-completions client with per-call timeout and bounded retries."""

    def __init__(
        self,
        endpoint: str,
        credential_env: str = "",
        timeout_s: float = 60.0,
        temperature: float = 0.0,
        max_attempts: int = 3,
        backoff_s: float = 1.0,
    ) -> None:
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout_s = timeout_s
        self.temperature = temperature
        self.max_attempts = max_attempts
        self.backoff_s = backoff_s

    def complete(self, model_id: str, prompt: str) -> str:
        import httpx

        headers = {}
        if self.credential_env:
            token = os.environ.get(self.credential_env, "")
            if not token:
                raise BackendCallError(f"credential env var {self.credential_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                resp = httpx.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout_s
                )
                resp.raise_for_status()
                payload = resp.json()
                return payload["choices"][0]["message"]["content"]
            except Exception as exc:
                last_error = exc
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff_s * (2**attempt))
        raise BackendCallError(f"chat completion failed: {last_error}") from last_error


class ScriptedBackend:
    """Canned responses selected by prompt content hash or regex rules.

    Rules file schema (JSON)::

        {
          "hash_responses": {"<sha256 of prompt>": "response", ...},
          "rules": [{"pattern": "<regex>", "response": "..."} |
                    {"pattern": "<regex>", "error": "message"}, ...],
          "default": "response or null",
          "delay_ms": 0
        }

    Regex rules are tried in order with DOTALL search; a matching "error"
    rule simulates a backend failure.  A null/omitted default means
    unmatched prompts fail.  ``call_log`` appends one line per call, which
    fault-injection tests use to count real backend traffic.
    """

    def __init__(
        self,
        hash_responses: dict[str, str] | None = None,
        rules: list[dict] | None = None,
        default: str | None = None,
        delay_ms: float = 0.0,
        call_log: str | Path | None = None,
    ) -> None:
        self.hash_responses = hash_responses or {}
        self.rules = [
            (re.compile(rule["pattern"], re.DOTALL), rule)
            for rule in (rules or [])
        ]
        self.default = default
        self.delay_ms = delay_ms
        self.call_log = Path(call_log) if call_log else None
        self.call_count = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, call_log: str | Path | None = None) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            hash_responses=data.get("hash_responses"),
            rules=data.get("rules"),
            default=data.get("default"),
            delay_ms=data.get("delay_ms", 0.0),
            call_log=call_log or data.get("call_log"),
        )

    def _log_call(self, digest: str) -> None:
        if self.call_log is None:
            return
        with self.call_log.open("a", encoding="utf-8") as fh:
            fh.write(digest + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def complete(self, model_id: str, prompt: str) -> str:
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        with self._lock:
            self.call_count += 1
            self._log_call(digest)
        if self.delay_ms:
            time.sleep(self.delay_ms / 1000.0)
        if digest in self.hash_responses:
            return self.hash_responses[digest]
        for compiled, rule in self.rules:
            if compiled.search(prompt):
                if "error" in rule:
                    raise BackendCallError(str(rule["error"]))
                return rule["response"]
        if self.default is not None:
            return self.default
        raise BackendCallError(f"no scripted rule matches prompt {digest[:12]}")
