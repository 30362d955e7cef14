/**
 * Landmark picker geometry.
 *
 * The annotation payload places the face in a [-1, 1] square with y
 * pointing up (chin at the bottom, brows near the top). Canvas pixels grow
 * downward, so placement flips y. Hit testing is nearest-within-radius.
 */

import type { LandmarkPoint } from "./api.js";

export interface PlacedLandmark {
  id: number;
  region: string;
  px: number;
  py: number;
}

export function placeLandmarks(landmarks: LandmarkPoint[], width: number,
                               height: number, margin = 14): PlacedLandmark[] {
  const innerW = width - 2 * margin;
  const innerH = height - 2 * margin;
  return landmarks.map((lm) => ({
    id: lm.id,
    region: lm.region,
    px: margin + ((lm.x + 1) / 2) * innerW,
    py: margin + (1 - (lm.y + 1) / 2) * innerH,
  }));
}

export function hitTest(placed: PlacedLandmark[], px: number, py: number,
                        radius = 10): PlacedLandmark | null {
  let best: PlacedLandmark | null = null;
  let bestDist = radius * radius;
  for (const lm of placed) {
    const dx = lm.px - px;
    const dy = lm.py - py;
    const d2 = dx * dx + dy * dy;
    if (d2 <= bestDist) {
      best = lm;
      bestDist = d2;
    }
  }
  return best;
}
