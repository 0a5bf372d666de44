"""LLM grounding: system prompt, map tools, chat sessions, HTTP service."""

from .prompt import SYSTEM_PROMPT_TEMPLATE, render_system_prompt
from .providers import (
    HttpChatProvider,
    LlmProviderConfig,
    ProviderError,
    ProviderReply,
    ScriptedMockProvider,
    ToolCallRequest,
)
from .server import create_app
from .session import CAPPED_ROUNDS_NOTICE, ChatSession, chat_turn, chat_turn_events
from .tools import TOOL_SCHEMAS, ToolExecutor

__all__ = [
    "SYSTEM_PROMPT_TEMPLATE",
    "render_system_prompt",
    "HttpChatProvider",
    "LlmProviderConfig",
    "ProviderError",
    "ProviderReply",
    "ScriptedMockProvider",
    "ToolCallRequest",
    "create_app",
    "CAPPED_ROUNDS_NOTICE",
    "ChatSession",
    "chat_turn",
    "chat_turn_events",
    "TOOL_SCHEMAS",
    "ToolExecutor",
]
