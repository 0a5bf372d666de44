"""Chat-completion providers: a real HTTP client and a deterministic mock.

Both speak the same reduced protocol: given the transcript and the tool
schemas, reply with either tool calls or final text.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import httpx


class ProviderError(Exception):
    """Provider unreachable or returned garbage; the turn may be retried."""


@dataclass(frozen=True)
class LlmProviderConfig:
    endpoint: str = ""
    model: str = ""
    token_env: str = "TAGMAP_LLM_TOKEN"  # name of the env var holding the API token
    max_rounds: int = 8  # tool-call rounds per turn
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")


@dataclass
class ToolCallRequest:
    id: str
    name: str
    arguments: dict


@dataclass
class ProviderReply:
    text: str | None = None
    tool_calls: list[ToolCallRequest] = field(default_factory=list)


class HttpChatProvider:
    """OpenAI-style chat-completions client with function calling."""

    def __init__(self, config: LlmProviderConfig, client: httpx.Client | None = None):
        if not config.endpoint:
            raise ValueError("provider endpoint is required")
        token = os.environ.get(config.token_env)
        if token is None:
            raise ProviderError(f"provider token env var {config.token_env!r} is not set")
        self.config = config
        self._client = client or httpx.Client(
            timeout=120.0, headers={"Authorization": f"Bearer {token}"}
        )

    def complete(self, messages: list[dict], tools: list[dict]) -> ProviderReply:
        payload = {
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        }
        if tools:
            payload["tools"] = tools
        try:
            resp = self._client.post(self.config.endpoint, json=payload)
            resp.raise_for_status()
            data = resp.json()
            message = data["choices"][0]["message"]
        except (httpx.HTTPError, json.JSONDecodeError, KeyError, IndexError, TypeError) as e:
            raise ProviderError(f"chat completion failed: {e}") from e

        calls = []
        for i, tc in enumerate(message.get("tool_calls") or []):
            fn = tc.get("function", {})
            try:
                arguments = json.loads(fn.get("arguments") or "{}")
            except json.JSONDecodeError:
                arguments = {"_raw": fn.get("arguments")}
            calls.append(ToolCallRequest(id=tc.get("id") or f"call_{i}",
                                         name=fn.get("name", ""), arguments=arguments))
        return ProviderReply(text=message.get("content"), tool_calls=calls)


def _normalize_query(text: str) -> str:
    text = text.replace("’", "'").replace("‘", "'").lower()
    return re.sub(r"\s+", " ", text).strip()


class ScriptedMockProvider:
    """Deterministic provider driven by a scenario script.

    Script: ``{"scenarios": [{"match": <query>, "rounds": [[{name, arguments},
    ...], ...], "response": <text>}], "fallback": <text>}``. A scenario is
    selected by exact match on the normalized last user message, falling back
    to substring containment. Each round yields one batch of tool calls; the
    round index is recovered from the transcript, so the provider itself is
    stateless.
    """

    def __init__(self, script: dict):
        self.scenarios = script.get("scenarios", [])
        self.fallback = script.get(
            "fallback", "I could not find anything in the map related to that request."
        )

    @classmethod
    def from_file(cls, path) -> "ScriptedMockProvider":
        try:
            return cls(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            raise ProviderError(f"cannot load mock provider script {path}: {e}") from e

    def _select(self, query: str) -> dict | None:
        q = _normalize_query(query)
        for sc in self.scenarios:
            if _normalize_query(sc.get("match", "")) == q:
                return sc
        for sc in self.scenarios:
            if _normalize_query(sc.get("match", "")) in q:
                return sc
        return None

    def complete(self, messages: list[dict], tools: list[dict]) -> ProviderReply:
        last_user = next((m for m in reversed(messages) if m["role"] == "user"), None)
        if last_user is None:
            return ProviderReply(text=self.fallback)
        # Rounds already played this turn = assistant tool-call messages since the user message.
        idx = messages.index(last_user)
        rounds_done = sum(
            1 for m in messages[idx + 1:] if m["role"] == "assistant" and m.get("tool_calls")
        )
        scenario = self._select(last_user.get("content") or "")
        if scenario is None:
            return ProviderReply(text=self.fallback)
        rounds = scenario.get("rounds", [])
        if rounds_done < len(rounds):
            calls = [
                ToolCallRequest(id=f"mock_{rounds_done}_{i}", name=c["name"],
                                arguments=c.get("arguments", {}))
                for i, c in enumerate(rounds[rounds_done])
            ]
            return ProviderReply(tool_calls=calls)
        return ProviderReply(text=scenario.get("response", self.fallback))
