// DOM rendering of the chat pane and tag browser. Pure functions of the
// state; event handlers are injected so tests can observe them.

import { confidenceColor, tagAccent } from "./colors";
import { canSend } from "./state";
import type { Overlay, Proposal, ViewState } from "./types";

export interface ViewHandlers {
  onRetryConnect: () => void;
  onRetryTurn: () => void;
  onBrowseTag: (tag: string) => void;
  onClearTag: (tag: string) => void;
  onSelectProposal: (tag: string, index: number) => void;
  onAskAbout: (tag: string, proposal: Proposal) => void;
  onToggleSystemPrompt: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderBanner(container: HTMLElement, state: ViewState, h: ViewHandlers): void {
  container.replaceChildren();
  if (state.connectionError) {
    const banner = el(container.ownerDocument, "div", "banner error");
    banner.append(
      el(container.ownerDocument, "span", "banner-text",
         `service unreachable: ${state.connectionError}`),
    );
    const retry = el(container.ownerDocument, "button", "retry-connect", "retry");
    retry.addEventListener("click", h.onRetryConnect);
    banner.append(retry);
    container.append(banner);
  }
  if (state.partialTurn) {
    const banner = el(container.ownerDocument, "div", "banner warning");
    banner.append(el(container.ownerDocument, "span", "banner-text",
                     "the reply stream was interrupted; the transcript may be partial"));
    const retry = el(container.ownerDocument, "button", "retry-turn", "retry message");
    retry.addEventListener("click", h.onRetryTurn);
    banner.append(retry);
    container.append(banner);
  }
}

export function renderTranscript(container: HTMLElement, state: ViewState, h: ViewHandlers): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const promptRow = el(doc, "div", "system-prompt-row");
  const toggle = el(doc, "button", "toggle-system-prompt",
                    state.showSystemPrompt ? "hide system prompt" : "show system prompt");
  toggle.addEventListener("click", h.onToggleSystemPrompt);
  promptRow.append(toggle);
  container.append(promptRow);
  if (state.showSystemPrompt && state.systemPrompt !== null) {
    container.append(el(doc, "pre", "system-prompt", state.systemPrompt));
  }

  for (const item of state.transcript) {
    if (item.kind === "user") {
      container.append(el(doc, "div", "bubble user", item.text));
    } else if (item.kind === "assistant") {
      container.append(el(doc, "div", "bubble assistant", item.text));
    } else if (item.kind === "error") {
      container.append(el(doc, "div", "bubble error", item.text));
    } else {
      const card = el(doc, "div", "tool-card");
      card.dataset["callId"] = item.id;
      card.append(el(doc, "div", "tool-name", item.name));
      card.append(el(doc, "pre", "tool-args", JSON.stringify(item.arguments)));
      if (item.result === null) {
        card.append(el(doc, "div", "tool-pending", "running..."));
      } else {
        card.append(el(doc, "pre", "tool-result", JSON.stringify(item.result, null, 1)));
      }
      container.append(card);
    }
  }
  // keep the newest message in view
  container.scrollTop = container.scrollHeight;
}

export function renderComposer(input: HTMLInputElement, button: HTMLButtonElement,
                               state: ViewState): void {
  button.disabled = !canSend(state, input.value);
}

function overlayChip(doc: Document, overlay: Overlay, h: ViewHandlers): HTMLElement {
  const chip = el(doc, "span", "overlay-chip");
  chip.style.borderColor = tagAccent(overlay.tag);
  chip.append(el(doc, "span", "overlay-tag", overlay.tag));
  chip.append(el(doc, "span", "overlay-count", String(overlay.proposals.length)));
  const close = el(doc, "button", "overlay-clear", "x");
  close.addEventListener("click", () => h.onClearTag(overlay.tag));
  chip.append(close);
  return chip;
}

export function renderTagBrowser(container: HTMLElement, state: ViewState,
                                 h: ViewHandlers): void {
  const doc = container.ownerDocument;
  container.replaceChildren();

  const chips = el(doc, "div", "overlay-chips");
  for (const overlay of state.overlays) chips.append(overlayChip(doc, overlay, h));
  container.append(chips);

  for (const overlay of state.overlays) {
    if (overlay.proposals.length === 0) {
      container.append(el(doc, "div", "no-proposals",
                          `no proposals for "${overlay.tag}"` +
                          (overlay.note ? ` (${overlay.note})` : "")));
      continue;
    }
    const list = el(doc, "div", "proposal-list");
    list.dataset["tag"] = overlay.tag;
    overlay.proposals.forEach((p, index) => {
      const row = el(doc, "div", "proposal-row");
      const badge = el(doc, "span", "confidence-badge", String(p.confidence_level));
      badge.style.background = confidenceColor(p.confidence_level);
      row.append(badge);
      row.append(el(doc, "span", "proposal-title", `${overlay.tag} #${index}`));
      row.addEventListener("click", () => h.onSelectProposal(overlay.tag, index));
      list.append(row);
    });
    container.append(list);
  }

  if (state.selectedProposal) {
    const overlay = state.overlays.find((o) => o.tag === state.selectedProposal?.tag);
    const proposal = overlay?.proposals[state.selectedProposal.index];
    if (overlay && proposal) {
      const details = el(doc, "div", "proposal-details");
      details.append(el(doc, "pre", "proposal-json", JSON.stringify(proposal, null, 1)));
      const ask = el(doc, "button", "ask-about", "ask about this");
      ask.addEventListener("click", () => h.onAskAbout(overlay.tag, proposal));
      details.append(ask);
      container.append(details);
    }
  }
}

export function askAboutText(tag: string, proposal: Proposal): string {
  return (
    `Tell me about the ${tag} localized between [${proposal.aabb_min.join(", ")}] ` +
    `and [${proposal.aabb_max.join(", ")}].`
  );
}
