// Scene-graph model: mesh, proposal overlays, goal marker. All box corners
// come verbatim from server payloads; nothing here re-derives geometry.

import * as THREE from "three";

import { confidenceColor, GOAL_COLOR, tagAccent } from "./colors";
import type { ParsedMesh } from "./ply";
import type { Goal, Overlay } from "./types";

export type LabelFactory = (text: string, accent: string) => THREE.Object3D;

export interface SceneModel {
  scene: THREE.Scene;
  meshGroup: THREE.Group;
  overlayGroup: THREE.Group;
  goalGroup: THREE.Group;
  hasMesh: boolean;
  makeLabel: LabelFactory;
}

/** Canvas-backed sprite label; swapped out for a stub in node tests. */
export function canvasLabel(text: string, accent: string): THREE.Object3D {
  const canvas = document.createElement("canvas");
  canvas.width = 128;
  canvas.height = 64;
  const ctx = canvas.getContext("2d");
  if (ctx) {
    ctx.fillStyle = accent;
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#111";
    ctx.font = "bold 40px sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(text, canvas.width / 2, canvas.height / 2);
  }
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false }),
  );
  sprite.scale.set(0.5, 0.25, 1);
  return sprite;
}

export function createSceneModel(makeLabel: LabelFactory = canvasLabel): SceneModel {
  const scene = new THREE.Scene();
  scene.background = new THREE.Color("#181c20");
  scene.add(new THREE.AmbientLight(0xffffff, 0.9));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(4, 6, 10);
  scene.add(sun);

  const meshGroup = new THREE.Group();
  const overlayGroup = new THREE.Group();
  const goalGroup = new THREE.Group();
  scene.add(meshGroup, overlayGroup, goalGroup);
  return { scene, meshGroup, overlayGroup, goalGroup, hasMesh: false, makeLabel };
}

export function setMesh(model: SceneModel, mesh: ParsedMesh | null): void {
  model.meshGroup.clear();
  model.hasMesh = mesh !== null;
  if (!mesh) {
    // top-down fallback: just a ground grid under the proposal boxes
    const grid = new THREE.GridHelper(40, 40, 0x3a4148, 0x262c31);
    grid.rotation.x = Math.PI / 2; // scene z is up
    model.meshGroup.add(grid);
    return;
  }
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(mesh.positions, 3));
  geometry.setIndex(new THREE.BufferAttribute(mesh.indices, 1));
  geometry.computeVertexNormals();
  const solid = new THREE.Mesh(
    geometry,
    new THREE.MeshLambertMaterial({
      color: 0x8fa1b0,
      transparent: true,
      opacity: 0.35,
      side: THREE.DoubleSide,
    }),
  );
  const wire = new THREE.LineSegments(
    new THREE.WireframeGeometry(geometry),
    new THREE.LineBasicMaterial({ color: 0x3f4d59, transparent: true, opacity: 0.4 }),
  );
  model.meshGroup.add(solid, wire);
}

function payloadBox(aabbMin: number[], aabbMax: number[]): THREE.Box3 {
  return new THREE.Box3(
    new THREE.Vector3(...(aabbMin as [number, number, number])),
    new THREE.Vector3(...(aabbMax as [number, number, number])),
  );
}

export function setOverlays(model: SceneModel, overlays: Overlay[]): void {
  model.overlayGroup.clear();
  for (const overlay of overlays) {
    const group = new THREE.Group();
    group.userData = { tag: overlay.tag, accent: tagAccent(overlay.tag) };
    overlay.proposals.forEach((p, index) => {
      const box = payloadBox(p.aabb_min, p.aabb_max);
      const helper = new THREE.Box3Helper(box, new THREE.Color(confidenceColor(p.confidence_level)));
      helper.userData = { tag: overlay.tag, index, proposal: p };
      group.add(helper);
      // invisible solid used only for click picking
      const size = box.getSize(new THREE.Vector3());
      const pick = new THREE.Mesh(
        new THREE.BoxGeometry(size.x, size.y, size.z),
        new THREE.MeshBasicMaterial({ visible: false }),
      );
      box.getCenter(pick.position);
      pick.userData = { pick: true, tag: overlay.tag, index, proposal: p };
      group.add(pick);
      const label = model.makeLabel(String(p.confidence_level), tagAccent(overlay.tag));
      label.position.set(p.aabb_min[0], p.aabb_min[1], p.aabb_max[2]);
      label.userData = { ...label.userData, text: String(p.confidence_level), tag: overlay.tag };
      group.add(label);
    });
    model.overlayGroup.add(group);
  }
}

/** The proposal hit by a screen-space click, if any. */
export function pickProposal(
  model: SceneModel,
  camera: THREE.Camera,
  ndcX: number,
  ndcY: number,
): { tag: string; index: number } | null {
  const raycaster = new THREE.Raycaster();
  raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), camera);
  for (const hit of raycaster.intersectObjects(model.overlayGroup.children, true)) {
    const data = hit.object.userData;
    if (data["pick"]) return { tag: data["tag"] as string, index: data["index"] as number };
  }
  return null;
}

export function setGoal(model: SceneModel, goal: Goal | null): void {
  model.goalGroup.clear(); // at most one goal marker
  if (!goal) return;
  const box = payloadBox(goal.aabb_min, goal.aabb_max);
  const marker = new THREE.Box3Helper(box, new THREE.Color(GOAL_COLOR));
  marker.userData = { goal };
  model.goalGroup.add(marker);
  const label = model.makeLabel(`goal: ${goal.tag}`, GOAL_COLOR);
  label.position.set(goal.aabb_min[0], goal.aabb_min[1], goal.aabb_max[2]);
  label.userData = { ...label.userData, text: `goal: ${goal.tag}`, tag: goal.tag };
  model.goalGroup.add(label);
}

/** Camera focus target when a goal arrives (display-only convenience). */
export function goalFocus(goal: Goal): THREE.Vector3 {
  const box = payloadBox(goal.aabb_min, goal.aabb_max);
  return box.getCenter(new THREE.Vector3());
}
