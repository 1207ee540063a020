"""Chat-completion providers: a conversation goes in, one reply comes out."""
from __future__ import annotations

import json
import os
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

Message = Mapping[str, str]  # {"role": "user" | "assistant" | "system", "content": ...}


class ProviderError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class Provider(Protocol):
    def complete(self, messages: Sequence[Message]) -> str: ...


class ScriptedProvider:
    """Replays canned replies for tests.

    ``replies`` is either a list consumed in order or a callable receiving
    the conversation. Exceptions in the list are raised instead of returned.
    Thread-safe; ``calls`` counts every request.
    """

    def __init__(self, replies: Sequence[str | Exception] | Callable[[Sequence[Message]], str]):
        self._replies = replies if callable(replies) else list(replies)
        self._pos = 0
        self._lock = threading.Lock()
        self.calls = 0
        self.history: list[list[dict]] = []

    def complete(self, messages: Sequence[Message]) -> str:
        with self._lock:
            self.calls += 1
            self.history.append([dict(m) for m in messages])
            if callable(self._replies):
                reply = self._replies(messages)
            else:
                if self._pos >= len(self._replies):
                    raise ProviderError("scripted provider ran out of replies")
                reply = self._replies[self._pos]
                self._pos += 1
        if isinstance(reply, Exception):
            raise reply
        return reply


@dataclass
class HttpChatProvider:
    """OpenAI-compatible ``/chat/completions`` endpoint over plain HTTP."""

    url: str
    model: str
    api_key_env: str = "LLM_API_KEY"
    temperature: float = 0.0
    timeout: float = 120.0
    extra: dict = field(default_factory=dict)

    def complete(self, messages: Sequence[Message]) -> str:
        key = os.environ.get(self.api_key_env)
        if not key:
            raise ProviderError(f"credential variable {self.api_key_env} is not set")
        body = {"model": self.model, "messages": [dict(m) for m in messages],
                "temperature": self.temperature, **self.extra}
        req = urllib.request.Request(
            self.url, data=json.dumps(body).encode(), method="POST",
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {key}"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.load(resp)
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderError(f"request to {self.url} failed: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ProviderError(f"non-JSON reply from {self.url}: {exc}") from exc
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProviderError(f"unexpected reply shape from {self.url}") from None


def provider_from_config(cfg: Mapping) -> Provider:
    """Build a provider from ``{"kind": "http" | "reference", ...}``."""
    kind = cfg.get("kind", "http")
    if kind == "http":
        try:
            return HttpChatProvider(url=cfg["url"], model=cfg["model"],
                                    api_key_env=cfg.get("api_key_env", "LLM_API_KEY"),
                                    temperature=cfg.get("temperature", 0.0),
                                    timeout=cfg.get("timeout", 120.0))
        except KeyError as exc:
            raise ConfigError(f"http provider needs {exc.args[0]!r}") from None
    if kind == "reference":
        from .reference import ReferenceProvider
        return ReferenceProvider(failures=cfg.get("failures", {}))
    raise ConfigError(f"unknown provider kind {kind!r}")
