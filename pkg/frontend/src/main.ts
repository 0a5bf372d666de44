// App bootstrap: store + API client + DOM wiring + WebGL view.

import * as THREE from "three";

import { ApiClient, resolveServerUrl } from "./api";
import { createSceneModel, goalFocus, pickProposal, setGoal, setMesh, setOverlays } from "./scene3d";
import { createStore } from "./state";
import { parsePly } from "./ply";
import type { Proposal, StreamEvent } from "./types";
import {
  askAboutText,
  renderBanner,
  renderComposer,
  renderTagBrowser,
  renderTranscript,
  type ViewHandlers,
} from "./view";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const serverUrl = resolveServerUrl(window.location);
const api = new ApiClient(serverUrl);
const store = createStore(serverUrl);

const banner = byId<HTMLDivElement>("banner");
const transcript = byId<HTMLDivElement>("transcript");
const input = byId<HTMLInputElement>("message-input");
const sendButton = byId<HTMLButtonElement>("send-button");
const tagInput = byId<HTMLInputElement>("tag-input");
const tagButton = byId<HTMLButtonElement>("tag-button");
const tagList = byId<HTMLDataListElement>("tag-options");
const browser = byId<HTMLDivElement>("tag-browser");
const viewport = byId<HTMLDivElement>("viewport");

// ------------------------------------------------------------------ 3D view

const model = createSceneModel();
const renderer = new THREE.WebGLRenderer({ antialias: true });
viewport.append(renderer.domElement);
const camera = new THREE.PerspectiveCamera(55, 1, 0.05, 500);
camera.up.set(0, 0, 1); // scene z is up
let focusTarget = new THREE.Vector3(0, 0, 0);
let sphericalTheta = Math.PI / 4;
let sphericalPhi = Math.PI / 3.2;
let radius = 12;

function applyCamera(): void {
  camera.position.set(
    focusTarget.x + radius * Math.sin(sphericalPhi) * Math.cos(sphericalTheta),
    focusTarget.y + radius * Math.sin(sphericalPhi) * Math.sin(sphericalTheta),
    focusTarget.z + radius * Math.cos(sphericalPhi),
  );
  camera.lookAt(focusTarget);
}

function resize(): void {
  const w = viewport.clientWidth || 640;
  const h = viewport.clientHeight || 480;
  renderer.setSize(w, h);
  camera.aspect = w / h;
  camera.updateProjectionMatrix();
}
window.addEventListener("resize", resize);

let dragging = false;
let lastX = 0;
let lastY = 0;
let downX = 0;
let downY = 0;
renderer.domElement.addEventListener("pointerdown", (e) => {
  dragging = true;
  lastX = downX = e.clientX;
  lastY = downY = e.clientY;
});
window.addEventListener("pointerup", (e) => {
  if (dragging && Math.hypot(e.clientX - downX, e.clientY - downY) < 4) {
    // a click, not an orbit drag: try to pick a proposal box
    const rect = renderer.domElement.getBoundingClientRect();
    const hit = pickProposal(
      model,
      camera,
      ((e.clientX - rect.left) / rect.width) * 2 - 1,
      -((e.clientY - rect.top) / rect.height) * 2 + 1,
    );
    if (hit) store.dispatch({ type: "proposal_selected", tag: hit.tag, index: hit.index });
  }
  dragging = false;
});
window.addEventListener("pointermove", (e) => {
  if (!dragging) return;
  sphericalTheta -= (e.clientX - lastX) * 0.008;
  sphericalPhi = Math.min(Math.PI - 0.05, Math.max(0.05, sphericalPhi - (e.clientY - lastY) * 0.008));
  lastX = e.clientX;
  lastY = e.clientY;
  applyCamera();
});
renderer.domElement.addEventListener("wheel", (e) => {
  e.preventDefault();
  radius = Math.min(80, Math.max(0.5, radius * (e.deltaY > 0 ? 1.12 : 0.89)));
  applyCamera();
});

function animate(): void {
  requestAnimationFrame(animate);
  renderer.render(model.scene, camera);
}

// ------------------------------------------------------------------- wiring

const handlers: ViewHandlers = {
  onRetryConnect: () => void startSession(),
  onRetryTurn: () => {
    const text = store.getState().lastUserText;
    if (text) void sendMessage(text);
  },
  onBrowseTag: (tag) => void browseTag(tag),
  onClearTag: (tag) => store.dispatch({ type: "overlay_cleared", tag }),
  onSelectProposal: (tag, index) => store.dispatch({ type: "proposal_selected", tag, index }),
  onAskAbout: (tag, proposal: Proposal) => {
    input.value = askAboutText(tag, proposal);
    store.dispatch({ type: "proposal_deselected" });
    input.focus();
  },
  onToggleSystemPrompt: () => {
    const state = store.getState();
    if (state.systemPrompt === null && state.sessionId) {
      void api
        .getSystemPrompt(state.sessionId)
        .then((prompt) => store.dispatch({ type: "system_prompt_loaded", prompt }));
    }
    store.dispatch({ type: "toggle_system_prompt" });
  },
};

store.subscribe((state) => {
  renderBanner(banner, state, handlers);
  renderTranscript(transcript, state, handlers);
  renderComposer(input, sendButton, state);
  renderTagBrowser(browser, state, handlers);
  tagList.replaceChildren(
    ...state.tags.map((t) => {
      const option = document.createElement("option");
      option.value = t;
      return option;
    }),
  );
  setOverlays(model, state.overlays);
  setGoal(model, state.goal);
});

async function startSession(): Promise<void> {
  try {
    const id = await api.createSession();
    store.dispatch({ type: "session_started", id });
    store.dispatch({ type: "tags_loaded", tags: await api.getTags() });
  } catch (err) {
    store.dispatch({ type: "connection_failed", error: String(err) });
  }
}

async function sendMessage(text: string): Promise<void> {
  const sessionId = store.getState().sessionId;
  if (!sessionId) return;
  store.dispatch({ type: "turn_started", text });
  try {
    await api.streamMessage(sessionId, text, (event: StreamEvent) => {
      store.dispatch({ type: "stream_event", event });
      if (event.type === "goal") {
        focusTarget = goalFocus(event.goal);
        applyCamera();
      }
    });
    store.dispatch({ type: "turn_finished" });
    // reconcile the marker with the server's /goal payload
    store.dispatch({ type: "goal_fetched", goal: await api.getGoal(sessionId) });
  } catch (err) {
    store.dispatch({ type: "stream_dropped", error: String(err) });
  }
}

async function browseTag(tag: string): Promise<void> {
  const trimmed = tag.trim();
  if (!trimmed) return;
  try {
    const body = await api.localize(trimmed);
    store.dispatch({
      type: "overlay_loaded",
      overlay: { tag: body.tag, proposals: body.proposals, ...(body.note ? { note: body.note } : {}) },
    });
  } catch (err) {
    store.dispatch({ type: "connection_failed", error: String(err) });
  }
}

sendButton.addEventListener("click", () => {
  const text = input.value.trim();
  if (!text) return;
  input.value = "";
  void sendMessage(text);
});
input.addEventListener("keydown", (e) => {
  if (e.key === "Enter" && !sendButton.disabled) sendButton.click();
});
input.addEventListener("input", () => renderComposer(input, sendButton, store.getState()));
tagButton.addEventListener("click", () => void browseTag(tagInput.value));
tagInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter") void browseTag(tagInput.value);
});

async function boot(): Promise<void> {
  resize();
  applyCamera();
  animate();
  await startSession();
  try {
    const raw = await api.fetchMesh();
    setMesh(model, raw ? parsePly(raw) : null);
    if (!raw) {
      // top-down fallback view
      sphericalPhi = 0.08;
      applyCamera();
    }
  } catch (err) {
    console.warn("mesh load failed; using fallback view", err);
    setMesh(model, null);
  }
}

void boot();
