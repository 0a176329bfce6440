"""Chat backends: scripted replay for tests, OpenAI-compatible HTTP for live runs."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional


class BackendError(Exception):
    """Base class for backend failures."""


class TransportError(BackendError):
    """Network / auth failure after retries were exhausted."""


class ScriptUnderrunError(BackendError):
    """A scripted backend ran out of replies."""


@dataclass(frozen=True)
class ChatRequest:
    """One chat completion call: system prompt plus alternating history."""

    system: str
    history: tuple  # ((role, content), ...) oldest first
    temperature: float = 0.0

    def digest(self) -> str:
        payload = json.dumps(
            {"system": self.system, "history": list(self.history),
             "temperature": self.temperature},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def truncate_history(history, window: int):
    """Keep only the last `window` (role, content) tuples."""
    if window <= 0:
        return tuple()
    return tuple(history[-window:])


class Backend:
    """Abstract chat backend with a call counter."""

    def __init__(self):
        self.calls = 0

    def complete(self, request: ChatRequest) -> str:
        self.calls += 1
        return self._complete(request)

    def _complete(self, request: ChatRequest) -> str:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Replays a fixed list of replies in order."""

    def __init__(self, replies):
        super().__init__()
        self.replies = list(replies)

    @classmethod
    def from_path(cls, path) -> "ScriptedBackend":
        lines = Path(path).read_text().splitlines()
        return cls([json.loads(line)["reply"] for line in lines if line.strip()])

    def _complete(self, request: ChatRequest) -> str:
        if self.calls > len(self.replies):
            raise ScriptUnderrunError(
                f"scripted backend exhausted after {len(self.replies)} replies"
            )
        return self.replies[self.calls - 1]


class RuleBackend(Backend):
    """Computes the reply from the request; stateless, so safe under resume."""

    def __init__(self, rule: Callable[[ChatRequest], str]):
        super().__init__()
        self.rule = rule

    def _complete(self, request: ChatRequest) -> str:
        return self.rule(request)


class LiveBackend(Backend):
    """OpenAI-compatible chat completions endpoint.

    The API key is read from the environment variable named by `key_env`
    and never stored on the object or written to any artifact.
    """

    def __init__(self, base_url: str, model: str, key_env: str = "PROMST_API_KEY",
                 max_attempts: int = 3, timeout: float = 120.0):
        super().__init__()
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.key_env = key_env
        self.max_attempts = max_attempts
        self.timeout = timeout

    def _complete(self, request: ChatRequest) -> str:
        import requests

        key = os.environ.get(self.key_env)
        if not key:
            raise TransportError(f"environment variable {self.key_env} is not set")
        messages = [{"role": "system", "content": request.system}]
        messages += [{"role": r, "content": c} for r, c in request.history]
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
        }
        delay = 1.0
        last_error = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(delay)
                delay *= 2
            try:
                resp = requests.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers={"Authorization": f"Bearer {key}"},
                    timeout=self.timeout,
                )
                if resp.status_code in (401, 403):
                    raise TransportError(f"authentication failed ({resp.status_code})")
                if resp.status_code >= 400:
                    last_error = f"HTTP {resp.status_code}: {resp.text[:200]}"
                    continue
                return resp.json()["choices"][0]["message"]["content"]
            except TransportError:
                raise
            except Exception as exc:  # noqa: BLE001 - network errors vary widely
                last_error = str(exc)
        raise TransportError(f"backend failed after {self.max_attempts} attempts: {last_error}")


class RecordingBackend(Backend):
    """Wraps a backend, appending {request_hash, reply} lines to an NDJSON tape."""

    def __init__(self, inner: Backend, tape_path):
        super().__init__()
        self.inner = inner
        self.tape_path = Path(tape_path)

    def _complete(self, request: ChatRequest) -> str:
        reply = self.inner.complete(request)
        with self.tape_path.open("a") as fh:
            fh.write(json.dumps({"request_hash": request.digest(), "reply": reply}) + "\n")
            fh.flush()
        return reply


@dataclass
class BackendSpec:
    """Parsed `kind:spec` backend selector from the command line."""

    kind: str
    spec: str = ""
    extra: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "BackendSpec":
        kind, _, spec = text.partition(":")
        kind = kind.strip().lower()
        if kind not in ("scripted", "live"):
            raise ValueError(f"unknown backend kind {kind!r}; use scripted: or live:")
        if not spec:
            raise ValueError(f"backend spec {text!r} is missing its argument")
        return cls(kind=kind, spec=spec)

    def build(self) -> Backend:
        if self.kind == "scripted":
            return ScriptedBackend.from_path(self.spec)
        # live:BASE_URL|MODEL[|KEY_ENV]
        parts = self.spec.split("|")
        if len(parts) < 2:
            raise ValueError(
                "live backend spec must be live:BASE_URL|MODEL[|KEY_ENV]"
            )
        key_env = parts[2] if len(parts) > 2 else "PROMST_API_KEY"
        return LiveBackend(base_url=parts[0], model=parts[1], key_env=key_env)
