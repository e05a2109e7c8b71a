"""Chat-completion client: OpenAI-compatible HTTP with retries, plus an
offline mock used throughout the test suite."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import requests

from .errors import ConfigurationError, GenerationError, TransportError

logger = logging.getLogger(__name__)

Message = dict[str, str]


@dataclass
class LlmClientConfig:
    base_url: str = "https://api.openai.com/v1"
    model_name: str = "gpt-4-turbo"
    credential_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0
    max_concurrency: int = 8
    debug_log_bodies: bool = False

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigurationError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigurationError("max_retries must be >= 0")
        if self.max_concurrency < 1:
            raise ConfigurationError("max_concurrency must be >= 1")


class ChatClient:
    """OpenAI-compatible ``/chat/completions`` client.

    Retries transport failures with exponential backoff and caps the number
    of in-flight requests; the API key is read from the environment variable
    named in the config, never stored.
    """

    def __init__(self, config: LlmClientConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(config.max_concurrency)

    @property
    def model_name(self) -> str:
        return self.config.model_name

    def complete(self, messages: list[Message]) -> str:
        with self._slots:
            return self._complete(messages)

    def _complete(self, messages: list[Message]) -> str:
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(cfg.credential_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {"model": cfg.model_name, "messages": messages, "temperature": cfg.temperature}
        if cfg.debug_log_bodies:
            logger.debug("chat request: %s", json.dumps(body, ensure_ascii=False))

        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = self.session.post(url, json=body, headers=headers, timeout=cfg.timeout)
                resp.raise_for_status()
                payload = resp.json()
                if cfg.debug_log_bodies:
                    logger.debug("chat response: %s", json.dumps(payload, ensure_ascii=False))
                text = payload["choices"][0]["message"]["content"]
                if not text or not text.strip():
                    raise GenerationError("model returned an empty completion")
                return text
            except GenerationError:
                raise
            except Exception as exc:  # transport or decode failure: retry
                last_error = exc
                if attempt < cfg.max_retries:
                    delay = 0.5 * (2**attempt)
                    logger.warning("chat attempt %d failed (%s); retrying in %.1fs", attempt + 1, exc, delay)
                    time.sleep(delay)
        raise TransportError(f"chat completion failed after {cfg.max_retries + 1} attempts: {last_error}")


@dataclass
class MockChatClient:
    """Deterministic offline stand-in for a chat model.

    Responses are resolved in order: exact canned responses keyed by prompt
    sha256, then substring rules, then a scripted FIFO queue, then a default
    echo that quotes the prompt. Records every request for assertions.
    """

    model_name: str = "mock-chat"
    canned: dict[str, str] = field(default_factory=dict)
    rules: list[tuple[str, Callable[[str], str] | str]] = field(default_factory=list)
    script: list[str] = field(default_factory=list)
    calls: list[list[Message]] = field(default_factory=list)
    fail_times: int = 0

    @staticmethod
    def prompt_key(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()

    def can_response(self, prompt: str, response: str) -> None:
        self.canned[self.prompt_key(prompt)] = response

    def complete(self, messages: list[Message]) -> str:
        self.calls.append(messages)
        if self.fail_times > 0:
            self.fail_times -= 1
            raise TransportError("mock transport failure")
        prompt = "\n".join(m["content"] for m in messages)
        key = self.prompt_key(prompt)
        if key in self.canned:
            return self.canned[key]
        for needle, out in self.rules:
            if needle in prompt:
                return out(prompt) if callable(out) else out
        if self.script:
            return self.script.pop(0)
        return f"[mock {self.model_name}] {prompt}"


class FailingChatClient:
    """Always raises a transport error; used to exercise failure paths."""

    model_name = "unreachable"

    def complete(self, messages: list[Message]) -> str:
        raise TransportError("LLM endpoint unreachable")
