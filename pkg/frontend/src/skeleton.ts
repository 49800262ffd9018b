// Pure scene construction for the hand view: bones, joints, direction
// arrows for extended fingers, shared-color group highlights, and the last
// trajectory arrow. The canvas layer just strokes what this returns, which
// keeps everything here unit-testable.

import { STALE_AFTER_MS } from "./state.js";
import type { ConsoleState, KeyframeSummary, SkeletonSnapshot } from "./types.js";

export const HAND_BONES: Array<[number, number]> = [
  [0, 1], [1, 2], [2, 3], [3, 4],          // thumb
  [0, 5], [5, 6], [6, 7], [7, 8],          // index
  [0, 9], [9, 10], [10, 11], [11, 12],     // middle
  [0, 13], [13, 14], [14, 15], [15, 16],   // ring
  [0, 17], [17, 18], [18, 19], [19, 20],   // pinky
  [5, 9], [9, 13], [13, 17],               // palm
];

export const FINGER_TIP_INDEX: Record<string, number> = {
  Thumb: 4, Index: 8, Middle: 12, Ring: 16, Pinky: 20,
};

// Screen-direction words to canvas vectors (canvas y grows downward).
const S = Math.SQRT1_2;
export const DIRECTION_VECTORS: Record<string, [number, number]> = {
  E: [1, 0], NE: [S, -S], N: [0, -1], NW: [-S, -S],
  W: [-1, 0], SW: [-S, S], S: [0, 1], SE: [S, S],
};

export const GROUP_COLORS = ["#3fa7d6", "#ee6352", "#59cd90", "#fac05e", "#9b5de5"];

const ARROW_LENGTH = 0.09;
const TRAJECTORY_SCALE: Record<string, number> = {
  Still: 0, Small: 0.06, Medium: 0.12, Large: 0.2,
};

export interface Arrow {
  from: [number, number];
  to: [number, number];
  label: string;
}

export interface GroupHighlight {
  color: string;
  tips: Array<[number, number]>;
  fingers: string[];
}

export interface Scene {
  bones: Array<[number, number, number, number]>;
  joints: Array<[number, number]>;
  arrows: Arrow[];
  groups: GroupHighlight[];
  trajectory: Arrow | null;
  dimmed: boolean;
  handLabel: string;
}

export interface SceneOptions {
  mirror?: boolean; // selfie view: flip horizontally
  nowMs: number;
}

function place(pt: number[], mirror: boolean): [number, number] {
  return [mirror ? 1 - pt[0] : pt[0], pt[1]];
}

function directionVector(word: string, mirror: boolean): [number, number] {
  const [dx, dy] = DIRECTION_VECTORS[word] ?? [0, 0];
  return [mirror ? -dx : dx, dy];
}

export function buildScene(
  skeleton: SkeletonSnapshot | null,
  features: KeyframeSummary | null,
  opts: SceneOptions,
): Scene | null {
  if (skeleton === null) return null;
  const mirror = opts.mirror ?? true;
  const pts = skeleton.pts.map((p) => place(p, mirror));

  const scene: Scene = {
    bones: HAND_BONES.map(([a, b]) => [pts[a][0], pts[a][1], pts[b][0], pts[b][1]]),
    joints: pts,
    arrows: [],
    groups: [],
    trajectory: null,
    dimmed: opts.nowMs - skeleton.receivedAtMs > STALE_AFTER_MS,
    handLabel: skeleton.hand,
  };
  if (features === null) return scene;

  for (const finger of features.fingers) {
    if (!finger.extended || !finger.direction) continue;
    const tip = pts[FINGER_TIP_INDEX[finger.finger]];
    const [dx, dy] = directionVector(finger.direction, mirror);
    scene.arrows.push({
      from: tip,
      to: [tip[0] + dx * ARROW_LENGTH, tip[1] + dy * ARROW_LENGTH],
      label: finger.direction,
    });
  }

  let colorIndex = 0;
  for (const group of features.groups) {
    if (group.length < 2) continue;
    scene.groups.push({
      color: GROUP_COLORS[colorIndex % GROUP_COLORS.length],
      tips: group.map((name) => pts[FINGER_TIP_INDEX[name]]),
      fingers: group,
    });
    colorIndex += 1;
  }

  const segment = features.segment;
  if (segment && segment.direction && segment.magnitude !== "Still") {
    const center = place(features.center as unknown as number[], mirror);
    const [dx, dy] = directionVector(segment.direction, mirror);
    const len = TRAJECTORY_SCALE[segment.magnitude] ?? 0.1;
    scene.trajectory = {
      from: center,
      to: [center[0] + dx * len, center[1] + dy * len],
      label: `${segment.direction} ${segment.magnitude}`,
    };
  }
  return scene;
}

export function sceneForState(state: ConsoleState, opts: SceneOptions): Scene | null {
  return buildScene(state.skeleton, state.features, opts);
}
