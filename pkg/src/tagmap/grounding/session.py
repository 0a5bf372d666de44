"""Chat sessions: transcript management and the tool-calling turn loop."""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from typing import Iterator

from .prompt import render_system_prompt
from .providers import LlmProviderConfig, ProviderError, ProviderReply
from .tools import TOOL_SCHEMAS, ToolExecutor

CAPPED_ROUNDS_NOTICE = (
    "I could not finish answering: the maximum number of tool-call rounds for "
    "one turn was reached."
)


@dataclass
class ChatSession:
    """One conversation: the first message is always the rendered system
    prompt, tool results always follow their call, and the transcript is
    append-only."""

    id: str
    messages: list[dict] = field(default_factory=list)
    goal: dict | None = None
    config: LlmProviderConfig = field(default_factory=LlmProviderConfig)

    @classmethod
    def start(cls, tags: list[str], config: LlmProviderConfig | None = None,
              session_id: str | None = None) -> "ChatSession":
        return cls(
            id=session_id or uuid.uuid4().hex,
            messages=[{"role": "system", "content": render_system_prompt(tags)}],
            config=config or LlmProviderConfig(),
        )

    def to_dict(self) -> dict:
        return {"id": self.id, "goal": self.goal, "messages": list(self.messages)}


def chat_turn_events(session: ChatSession, user_message: str, provider,
                     executor: ToolExecutor) -> Iterator[dict]:
    """Run one user turn, yielding events as they happen.

    Events: user, tool_call, tool_result, goal, assistant, error. The session
    is committed only when the turn completes; a provider failure leaves the
    transcript and goal unchanged and ends the stream with an error event.
    """
    staged = list(session.messages)
    staged_goal = session.goal
    staged.append({"role": "user", "content": user_message})
    yield {"type": "user", "text": user_message}

    assistant_text: str | None = None
    try:
        for _ in range(session.config.max_rounds):
            reply: ProviderReply = provider.complete(staged, TOOL_SCHEMAS)
            if reply.tool_calls:
                staged.append(
                    {
                        "role": "assistant",
                        "content": reply.text,
                        "tool_calls": [
                            {
                                "id": tc.id,
                                "type": "function",
                                "function": {"name": tc.name,
                                             "arguments": json.dumps(tc.arguments)},
                            }
                            for tc in reply.tool_calls
                        ],
                    }
                )
                for tc in reply.tool_calls:
                    yield {"type": "tool_call", "id": tc.id, "name": tc.name,
                           "arguments": tc.arguments}
                    payload, goal = executor.execute(tc.name, tc.arguments)
                    if goal is not None:
                        staged_goal = goal
                        yield {"type": "goal", "goal": goal}
                    staged.append(
                        {
                            "role": "tool",
                            "tool_call_id": tc.id,
                            "name": tc.name,
                            "content": json.dumps(payload),
                        }
                    )
                    yield {"type": "tool_result", "id": tc.id, "name": tc.name,
                           "result": payload}
                continue
            assistant_text = reply.text or ""
            break
        else:
            assistant_text = CAPPED_ROUNDS_NOTICE
    except ProviderError as e:
        yield {"type": "error", "error": str(e), "retriable": True}
        return

    staged.append({"role": "assistant", "content": assistant_text})
    # Commit: the turn finished, so the staged transcript/goal become real.
    session.messages = staged
    session.goal = staged_goal
    yield {"type": "assistant", "text": assistant_text}


def chat_turn(session: ChatSession, user_message: str, provider,
              executor: ToolExecutor) -> str:
    """Blocking turn; returns the assistant's final text.

    Raises ProviderError (retriable, transcript unchanged) when the provider
    is unreachable mid-turn.
    """
    assistant = None
    for event in chat_turn_events(session, user_message, provider, executor):
        if event["type"] == "assistant":
            assistant = event["text"]
        elif event["type"] == "error":
            raise ProviderError(event["error"])
    assert assistant is not None
    return assistant
