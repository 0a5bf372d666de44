// Fixed discrete color ramp for confidence levels, so screenshots from
// different runs stay comparable; tags get a stable accent for chips/labels.

const CONFIDENCE_RAMP = [
  "#9e9e9e", // level 1
  "#42a5f5", // 2
  "#26a69a", // 3
  "#9ccc65", // 4
  "#ffee58", // 5
  "#ffa726", // 6
  "#ef5350", // 7
  "#ab47bc", // 8 and above
];

export function confidenceColor(level: number): string {
  const idx = Math.max(1, Math.min(level, CONFIDENCE_RAMP.length)) - 1;
  return CONFIDENCE_RAMP[idx] as string;
}

const TAG_ACCENTS = ["#e57373", "#64b5f6", "#81c784", "#ffd54f", "#ba68c8", "#4dd0e1", "#ff8a65"];

export function tagAccent(tag: string): string {
  let hash = 0;
  for (const ch of tag) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0;
  return TAG_ACCENTS[hash % TAG_ACCENTS.length] as string;
}

export const GOAL_COLOR = "#ff1744";
