// Single reducer: all UI state updates flow through here, serialized, so the
// on-screen event order always equals the server stream order.

import type { Action, ChatItem, StreamEvent, ViewState } from "./types";

export function initialState(serverUrl: string): ViewState {
  return {
    serverUrl,
    sessionId: null,
    connectionError: null,
    tags: [],
    transcript: [],
    streaming: false,
    partialTurn: false,
    lastUserText: null,
    goal: null,
    overlays: [],
    systemPrompt: null,
    showSystemPrompt: false,
    selectedProposal: null,
  };
}

function applyEvent(state: ViewState, event: StreamEvent): ViewState {
  const transcript: ChatItem[] = [...state.transcript];
  switch (event.type) {
    case "user":
      transcript.push({ kind: "user", text: event.text });
      return { ...state, transcript };
    case "tool_call":
      transcript.push({
        kind: "tool_call",
        id: event.id,
        name: event.name,
        arguments: event.arguments,
        result: null,
      });
      return { ...state, transcript };
    case "tool_result": {
      const idx = transcript.findIndex(
        (item) => item.kind === "tool_call" && item.id === event.id && item.result === null,
      );
      if (idx >= 0) {
        const card = transcript[idx];
        if (card && card.kind === "tool_call") {
          transcript[idx] = { ...card, result: event.result };
        }
      }
      return { ...state, transcript };
    }
    case "goal":
      return { ...state, transcript, goal: event.goal };
    case "assistant":
      transcript.push({ kind: "assistant", text: event.text });
      return { ...state, transcript };
    case "error":
      transcript.push({ kind: "error", text: event.error });
      return { ...state, transcript };
  }
}

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "session_started":
      return {
        ...state,
        sessionId: action.id,
        connectionError: null,
        transcript: [],
        goal: null,
        partialTurn: false,
      };
    case "connection_failed":
      return { ...state, connectionError: action.error };
    case "tags_loaded":
      return { ...state, tags: action.tags };
    case "turn_started":
      return { ...state, streaming: true, partialTurn: false, lastUserText: action.text };
    case "stream_event":
      return applyEvent(state, action.event);
    case "turn_finished":
      return { ...state, streaming: false };
    case "stream_dropped":
      return {
        ...state,
        streaming: false,
        partialTurn: true,
        transcript: [
          ...state.transcript,
          { kind: "error", text: `stream interrupted: ${action.error}` },
        ],
      };
    case "goal_fetched":
      // reconciliation with GET /goal: the server payload wins
      return { ...state, goal: action.goal };
    case "overlay_loaded": {
      const overlays = state.overlays.filter((o) => o.tag !== action.overlay.tag);
      overlays.push(action.overlay);
      return { ...state, overlays };
    }
    case "overlay_cleared":
      return {
        ...state,
        overlays: state.overlays.filter((o) => o.tag !== action.tag),
        selectedProposal:
          state.selectedProposal?.tag === action.tag ? null : state.selectedProposal,
      };
    case "proposal_selected":
      return { ...state, selectedProposal: { tag: action.tag, index: action.index } };
    case "proposal_deselected":
      return { ...state, selectedProposal: null };
    case "system_prompt_loaded":
      return { ...state, systemPrompt: action.prompt };
    case "toggle_system_prompt":
      return { ...state, showSystemPrompt: !state.showSystemPrompt };
  }
}

export function canSend(state: ViewState, text: string): boolean {
  return state.sessionId !== null && !state.streaming && text.trim().length > 0;
}

export type Dispatch = (action: Action) => void;

export interface Store {
  getState: () => ViewState;
  dispatch: Dispatch;
  subscribe: (listener: (state: ViewState) => void) => () => void;
}

export function createStore(serverUrl: string): Store {
  let state = initialState(serverUrl);
  const listeners = new Set<(s: ViewState) => void>();
  return {
    getState: () => state,
    dispatch(action) {
      state = reduce(state, action);
      for (const fn of listeners) fn(state);
    },
    subscribe(fn) {
      listeners.add(fn);
      return () => listeners.delete(fn);
    },
  };
}
