"""Language-model client abstraction: HTTP chat-completion client plus a deterministic mock."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Protocol

import httpx


class CompletionError(RuntimeError):
    """The client could not produce a completion (transport failure or no match)."""


@dataclass(frozen=True)
class Prompt:
    system: str
    user: str


class LanguageModelClient(Protocol):
    def complete(self, prompt: Prompt) -> str: ...


def load_prompt_template(name: str) -> str:
    """Read a versioned prompt template shipped with the package."""
    return resources.files("kgscape.prompts").joinpath(name).read_text(encoding="utf-8")


_JSON_BLOCK = re.compile(r"\{.*\}", re.DOTALL)


def extract_json_object(text: str) -> dict:
    """Pull the first JSON object out of a completion, tolerating surrounding prose."""
    match = _JSON_BLOCK.search(text)
    if not match:
        raise ValueError("no JSON object found in completion")
    return json.loads(match.group(0))


@dataclass
class HttpChatClient:
    """Provider-agnostic chat-completion client.

    Posts {model, messages, temperature=0} to the configured endpoint and reads
    choices[0].message.content. Retries transport errors and 5xx responses.
    """

    endpoint: str
    model: str
    api_key: str = ""
    timeout: float = 30.0
    max_retries: int = 2

    def complete(self, prompt: Prompt) -> str:
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": 0,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
                if response.status_code >= 500:
                    last_error = CompletionError(f"server error {response.status_code}")
                elif response.status_code >= 400:
                    raise CompletionError(f"completion request rejected: {response.status_code} {response.text[:200]}")
                else:
                    payload = response.json()
                    return payload["choices"][0]["message"]["content"]
            except (httpx.TransportError, KeyError, ValueError) as exc:
                last_error = exc
            if attempt < self.max_retries:
                time.sleep(0.2 * (attempt + 1))
        raise CompletionError(f"completion failed after {self.max_retries + 1} attempts: {last_error}")


@dataclass
class MockChatClient:
    """Deterministic client for tests: maps recorded keys to recorded completions.

    Lookup scans keys in sorted order and returns the completion of the first key
    found as a substring of the prompt's user message, so fixture prompts resolve
    identically on every run.
    """

    responses: dict[str, str] = field(default_factory=dict)
    calls: list[Prompt] = field(default_factory=list)

    def complete(self, prompt: Prompt) -> str:
        self.calls.append(prompt)
        for key in sorted(self.responses):
            if key in prompt.user:
                return self.responses[key]
        raise CompletionError(f"no recorded completion matches prompt: {prompt.user[:120]!r}")
