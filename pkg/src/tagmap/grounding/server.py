"""HTTP service exposing the grounded chat and map-query endpoints.

Sessions live in memory; turns on one session are serialized by a per-session
lock while the map is shared read-only across all of them.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, StreamingResponse
from pydantic import BaseModel

from ..localization import localize_tag
from ..params import LocalizationParams
from ..store import TagMap, normalize_tag
from .providers import LlmProviderConfig
from .session import ChatSession, chat_turn_events
from .tools import ToolExecutor


class MessageIn(BaseModel):
    text: str


def create_app(tag_map: TagMap, provider, config: LlmProviderConfig | None = None,
               loc_params: LocalizationParams | None = None,
               mesh_path: str | None = None,
               executor: ToolExecutor | None = None) -> FastAPI:
    config = config or LlmProviderConfig()
    loc_params = loc_params or LocalizationParams()
    executor = executor or ToolExecutor(tag_map, loc_params)
    app = FastAPI(title="tagmap grounding service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    sessions: dict[str, ChatSession] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> tuple[ChatSession, threading.Lock]:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session, locks[session_id]

    @app.get("/health")
    def health():
        return {"status": "ok", "tags": len(tag_map.unique_tags()), "viewpoints": len(tag_map)}

    @app.post("/sessions")
    def create_session():
        session = ChatSession.start(tag_map.unique_tags(), config)
        with registry_lock:
            sessions[session.id] = session
            locks[session.id] = threading.Lock()
        return {"id": session.id}

    @app.get("/sessions/{session_id}")
    def get_transcript(session_id: str):
        session, _ = get_session(session_id)
        return session.to_dict()

    @app.post("/sessions/{session_id}/message")
    def post_message(session_id: str, message: MessageIn):
        session, lock = get_session(session_id)

        def stream():
            with lock:  # one in-flight turn per session
                for event in chat_turn_events(session, message.text, provider, executor):
                    yield json.dumps(event) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/goal")
    def get_goal(session_id: str):
        session, _ = get_session(session_id)
        return {"goal": session.goal}

    @app.get("/map/tags")
    def map_tags():
        return {"tags": tag_map.unique_tags()}

    @app.get("/map/localize")
    def map_localize(tag: str):
        key = normalize_tag(tag)
        proposals = [p.to_dict(tag=key) for p in localize_tag(tag_map, key, loc_params)]
        out = {"tag": key, "proposals": proposals}
        if key not in tag_map:
            out["note"] = "tag not present in the map"
        return out

    @app.get("/scene/mesh")
    def scene_mesh():
        if not mesh_path or not Path(mesh_path).is_file():
            raise HTTPException(status_code=404, detail="no scene mesh configured")
        name = Path(mesh_path).name
        return FileResponse(mesh_path, media_type="application/octet-stream", filename=name)

    return app
