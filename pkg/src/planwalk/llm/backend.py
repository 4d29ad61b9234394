"""Chat-completion backends: a deterministic scripted one for offline runs
and an OpenAI-compatible HTTP one for live runs."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field

import requests

from planwalk.errors import PlanwalkError

logger = logging.getLogger(__name__)

DEFAULT_API_KEY_ENV = "PLANWALK_API_KEY"


class NoMatchingRule(PlanwalkError):
    """No scripted rule matched; carries the prompt hash to author one."""

    def __init__(self, prompt_sha: str):
        super().__init__(f"no scripted rule matches prompt sha256:{prompt_sha}")
        self.prompt_sha = prompt_sha


class FixtureExhausted(PlanwalkError):
    pass


class TransportError(PlanwalkError):
    pass


class NonRetriableStatus(PlanwalkError):
    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body[:200]}")
        self.status = status


@dataclass(frozen=True)
class Message:
    role: str  # "system" | "user" | "assistant"
    content: str


@dataclass(frozen=True)
class LlmRequest:
    messages: tuple[Message, ...]
    n: int = 1
    temperature: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def effective_temperature(self) -> float:
        """Greedy (0) for single samples, 0.7 for multi-sample, unless set."""
        if self.temperature is not None:
            return self.temperature
        return 0.0 if self.n == 1 else 0.7

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


@dataclass
class ScriptedRule:
    """Matches the last user message by substring, or exactly when the
    matcher is `sha256:<hex>`. Each match consumes the next n responses;
    consume_once rules retire after their first match."""

    matcher: str
    responses: list[str]
    consume_once: bool = False
    _cursor: int = field(default=0, repr=False)
    _retired: bool = field(default=False, repr=False)

    def exhausted(self) -> bool:
        return self._retired or self._cursor >= len(self.responses)

    def matches(self, prompt: str) -> bool:
        if self.matcher.startswith("sha256:"):
            return hashlib.sha256(prompt.encode()).hexdigest() == self.matcher[7:]
        return self.matcher in prompt


class ScriptedBackend:
    """Replays canned responses; raises on anything it was not scripted for."""

    def __init__(self, rules):
        self._rules = list(rules)
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path) -> "ScriptedBackend":
        rules = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                rules.append(
                    ScriptedRule(
                        matcher=record["matcher"],
                        responses=list(record["responses"]),
                        consume_once=bool(record.get("consume_once", False)),
                    )
                )
        return cls(rules)

    def complete(self, request: LlmRequest) -> list[str]:
        prompt = request.last_user_content()
        with self._lock:
            for rule in self._rules:
                if rule.exhausted() or not rule.matches(prompt):
                    continue
                end = rule._cursor + request.n
                if end > len(rule.responses):
                    raise FixtureExhausted(
                        f"rule {rule.matcher!r} has "
                        f"{len(rule.responses) - rule._cursor} responses left, "
                        f"needs {request.n}"
                    )
                out = rule.responses[rule._cursor : end]
                rule._cursor = end
                if rule.consume_once:
                    rule._retired = True
                return out
            raise NoMatchingRule(hashlib.sha256(prompt.encode()).hexdigest())


class HttpBackend:
    """OpenAI-compatible /chat/completions client.

    The API key comes from an environment variable and is never logged or
    echoed in errors. Transient failures (connection errors, 429, 5xx) are
    retried with exponential backoff.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = DEFAULT_API_KEY_ENV,
        timeout: float = 120.0,
        max_attempts: int = 3,
        backoff_seconds: float = 1.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._api_key = os.environ.get(api_key_env, "")
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff_seconds = backoff_seconds

    def __repr__(self) -> str:
        return f"HttpBackend(base_url={self.base_url!r}, model={self.model!r})"

    def complete(self, request: LlmRequest) -> list[str]:
        payload = {
            "model": self.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "n": request.n,
            "temperature": request.effective_temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        url = self.base_url + "/chat/completions"
        last_error = "no attempt made"
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff_seconds * 2 ** (attempt - 1))
            try:
                response = requests.post(
                    url, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = type(exc).__name__
                logger.warning("request to %s failed (%s), retrying", url, last_error)
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                logger.warning("%s from %s, retrying", last_error, url)
                continue
            if response.status_code != 200:
                raise NonRetriableStatus(response.status_code, response.text)
            body = response.json()
            choices = body.get("choices", [])
            if len(choices) < request.n:
                raise TransportError(
                    f"expected {request.n} choices, got {len(choices)}"
                )
            return [c["message"]["content"] for c in choices[: request.n]]
        raise TransportError(
            f"giving up on {url} after {self.max_attempts} attempts ({last_error})"
        )
