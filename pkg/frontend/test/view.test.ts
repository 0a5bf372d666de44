// @vitest-environment happy-dom
import { beforeEach, describe, expect, it, vi } from "vitest";

import { initialState, reduce } from "../src/state";
import type { Action, Proposal, ViewState } from "../src/types";
import { askAboutText, renderBanner, renderTagBrowser, renderTranscript, type ViewHandlers } from "../src/view";

const PROPOSAL: Proposal = {
  aabb_min: [0, 1, 2],
  aabb_max: [1, 2, 3],
  confidence_level: 4,
  level_fraction: 0.5,
  voxel_count: 9,
};

function handlers(): ViewHandlers {
  return {
    onRetryConnect: vi.fn(),
    onRetryTurn: vi.fn(),
    onBrowseTag: vi.fn(),
    onClearTag: vi.fn(),
    onSelectProposal: vi.fn(),
    onAskAbout: vi.fn(),
    onToggleSystemPrompt: vi.fn(),
  };
}

function play(actions: Action[]): ViewState {
  return actions.reduce(reduce, initialState("http://x"));
}

let container: HTMLDivElement;
beforeEach(() => {
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.append(container);
});

describe("transcript rendering", () => {
  it("renders bubbles and tool cards in stream order", () => {
    const state = play([
      { type: "stream_event", event: { type: "user", text: "find my mug" } },
      { type: "stream_event", event: { type: "tool_call", id: "c1", name: "localize_tag", arguments: { tag: "mug" } } },
      { type: "stream_event", event: { type: "tool_result", id: "c1", name: "localize_tag", result: { proposals: [] } } },
      { type: "stream_event", event: { type: "assistant", text: "the mug is over there" } },
    ]);
    renderTranscript(container, state, handlers());
    expect(container.querySelectorAll(".bubble.user")).toHaveLength(1);
    expect(container.querySelector(".bubble.user")?.textContent).toBe("find my mug");
    const cards = container.querySelectorAll(".tool-card");
    expect(cards.length).toBeGreaterThanOrEqual(1);
    expect(cards[0]?.querySelector(".tool-name")?.textContent).toBe("localize_tag");
    expect(cards[0]?.querySelector(".tool-result")?.textContent).toContain("proposals");
    expect(container.querySelector(".bubble.assistant")?.textContent).toBe("the mug is over there");
    // DOM order equals stream order
    const kinds = [...container.children]
      .map((c) => c.className)
      .filter((c) => c.includes("bubble") || c.includes("tool-card"));
    expect(kinds[0]).toContain("user");
    expect(kinds[1]).toContain("tool-card");
    expect(kinds[2]).toContain("assistant");
  });

  it("shows pending tool calls before their result arrives", () => {
    const state = play([
      { type: "stream_event", event: { type: "tool_call", id: "c1", name: "set_goal", arguments: {} } },
    ]);
    renderTranscript(container, state, handlers());
    expect(container.querySelector(".tool-pending")).not.toBeNull();
  });

  it("hides the system prompt by default and toggles it", () => {
    let state = play([{ type: "system_prompt_loaded", prompt: "You are a helpful robot assistant." }]);
    renderTranscript(container, state, handlers());
    expect(container.querySelector(".system-prompt")).toBeNull();
    state = reduce(state, { type: "toggle_system_prompt" });
    renderTranscript(container, state, handlers());
    expect(container.querySelector(".system-prompt")?.textContent).toContain("helpful robot");
  });

  it("wires the toggle button", () => {
    const h = handlers();
    renderTranscript(container, play([]), h);
    (container.querySelector(".toggle-system-prompt") as HTMLButtonElement).click();
    expect(h.onToggleSystemPrompt).toHaveBeenCalledOnce();
  });
});

describe("banner", () => {
  it("offers a retry when the service is down", () => {
    const h = handlers();
    const state = play([{ type: "connection_failed", error: "ECONNREFUSED" }]);
    renderBanner(container, state, h);
    expect(container.querySelector(".banner.error")?.textContent).toContain("ECONNREFUSED");
    (container.querySelector(".retry-connect") as HTMLButtonElement).click();
    expect(h.onRetryConnect).toHaveBeenCalledOnce();
  });

  it("flags a partial transcript and offers a message retry", () => {
    const h = handlers();
    const state = play([
      { type: "turn_started", text: "hi" },
      { type: "stream_dropped", error: "reset" },
    ]);
    renderBanner(container, state, h);
    expect(container.querySelector(".banner.warning")?.textContent).toContain("partial");
    (container.querySelector(".retry-turn") as HTMLButtonElement).click();
    expect(h.onRetryTurn).toHaveBeenCalledOnce();
  });
});

describe("tag browser", () => {
  it("renders coexisting overlays with distinct accents and confidence badges", () => {
    const state = play([
      { type: "overlay_loaded", overlay: { tag: "sofa", proposals: [PROPOSAL] } },
      { type: "overlay_loaded", overlay: { tag: "table", proposals: [{ ...PROPOSAL, confidence_level: 2 }] } },
    ]);
    renderTagBrowser(container, state, handlers());
    const chips = container.querySelectorAll(".overlay-chip");
    expect(chips).toHaveLength(2);
    const accents = [...chips].map((c) => (c as HTMLElement).style.borderColor);
    expect(accents[0]).not.toBe(accents[1]);
    const badges = [...container.querySelectorAll(".confidence-badge")].map((b) => b.textContent);
    expect(badges).toEqual(["4", "2"]);
  });

  it("shows a no-proposals notice for unknown tags", () => {
    const state = play([
      { type: "overlay_loaded", overlay: { tag: "unicorn", proposals: [], note: "tag not present in the map" } },
    ]);
    renderTagBrowser(container, state, handlers());
    expect(container.querySelector(".no-proposals")?.textContent).toContain("unicorn");
  });

  it("selecting a proposal shows its JSON and offers ask-about", () => {
    const h = handlers();
    let state = play([
      { type: "overlay_loaded", overlay: { tag: "sofa", proposals: [PROPOSAL] } },
    ]);
    renderTagBrowser(container, state, h);
    (container.querySelector(".proposal-row") as HTMLElement).click();
    expect(h.onSelectProposal).toHaveBeenCalledWith("sofa", 0);

    state = reduce(state, { type: "proposal_selected", tag: "sofa", index: 0 });
    renderTagBrowser(container, state, h);
    const json = container.querySelector(".proposal-json")?.textContent ?? "";
    expect(JSON.parse(json)).toEqual(PROPOSAL);
    (container.querySelector(".ask-about") as HTMLButtonElement).click();
    expect(h.onAskAbout).toHaveBeenCalledWith("sofa", PROPOSAL);
    expect(askAboutText("sofa", PROPOSAL)).toContain("[0, 1, 2]");
  });
});
