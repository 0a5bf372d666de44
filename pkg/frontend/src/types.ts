// Payload shapes echoed from the grounding service. The UI never computes
// geometry; every number it shows comes out of one of these payloads.

export interface Proposal {
  tag?: string;
  aabb_min: [number, number, number];
  aabb_max: [number, number, number];
  confidence_level: number;
  level_fraction: number;
  voxel_count: number;
}

export interface Goal extends Proposal {
  tag: string;
  proposal_index: number;
}

export type StreamEvent =
  | { type: "user"; text: string }
  | { type: "tool_call"; id: string; name: string; arguments: Record<string, unknown> }
  | { type: "tool_result"; id: string; name: string; result: Record<string, unknown> }
  | { type: "goal"; goal: Goal }
  | { type: "assistant"; text: string }
  | { type: "error"; error: string; retriable?: boolean };

export interface LocalizeResponse {
  tag: string;
  proposals: Proposal[];
  note?: string;
}

// Transcript view model: one entry per rendered element, in stream order.
export type ChatItem =
  | { kind: "user"; text: string }
  | {
      kind: "tool_call";
      id: string;
      name: string;
      arguments: Record<string, unknown>;
      result: Record<string, unknown> | null;
    }
  | { kind: "assistant"; text: string }
  | { kind: "error"; text: string };

export interface Overlay {
  tag: string;
  proposals: Proposal[];
  note?: string;
}

export interface ViewState {
  serverUrl: string;
  sessionId: string | null;
  connectionError: string | null;
  tags: string[];
  transcript: ChatItem[];
  streaming: boolean;
  partialTurn: boolean; // the event stream dropped mid-turn
  lastUserText: string | null; // for retry after a dropped stream
  goal: Goal | null;
  overlays: Overlay[];
  systemPrompt: string | null;
  showSystemPrompt: boolean;
  selectedProposal: { tag: string; index: number } | null;
}

export type Action =
  | { type: "session_started"; id: string }
  | { type: "connection_failed"; error: string }
  | { type: "tags_loaded"; tags: string[] }
  | { type: "turn_started"; text: string }
  | { type: "stream_event"; event: StreamEvent }
  | { type: "turn_finished" }
  | { type: "stream_dropped"; error: string }
  | { type: "goal_fetched"; goal: Goal | null }
  | { type: "overlay_loaded"; overlay: Overlay }
  | { type: "overlay_cleared"; tag: string }
  | { type: "proposal_selected"; tag: string; index: number }
  | { type: "proposal_deselected" }
  | { type: "system_prompt_loaded"; prompt: string }
  | { type: "toggle_system_prompt" };
