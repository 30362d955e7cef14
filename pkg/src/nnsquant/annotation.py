"""The 68-point facial landmark annotation used throughout the package.

Landmark ids follow the common 68-point convention: 0-16 jaw line, 17-21 and
22-26 brows, 27-35 nose, 36-41 and 42-47 eyes, 48-59 outer lip, 60-67 inner
lip.  :func:`landmark_schematic` produces stylized 2D positions (unit square,
y up) for rendering pickers and legends; they are *not* model coordinates.
"""

from __future__ import annotations

import numpy as np

NUM_LANDMARKS = 68

#: Jaw tip (chin) — the landmark whose displacement tracks sucking best.
DEFAULT_LANDMARK_ID = 8

REGIONS = {
    "jaw": range(0, 17),
    "right_brow": range(17, 22),
    "left_brow": range(22, 27),
    "nose": range(27, 36),
    "right_eye": range(36, 42),
    "left_eye": range(42, 48),
    "outer_lip": range(48, 60),
    "inner_lip": range(60, 68),
}


def region_of(landmark_id: int) -> str:
    for name, ids in REGIONS.items():
        if landmark_id in ids:
            return name
    raise ValueError(f"landmark_id must be in [0, {NUM_LANDMARKS}), got {landmark_id}")


def landmark_schematic() -> list[dict]:
    """Stylized 2D layout of the 68 landmarks on a front-facing face.

    Returns one dict per landmark: ``{"id", "x", "y", "region"}`` with x, y
    in [-1, 1] (x right, y up).  Deterministic; intended for UI pickers.
    """
    pos = np.zeros((NUM_LANDMARKS, 2))

    # Jaw line: lower face contour, ear to ear through the chin (id 8).
    for i in range(17):
        a = np.pi * i / 16.0
        pos[i] = (-np.cos(a), -0.95 * np.sin(a) - 0.05)

    # Brows: flat arcs above the eyes, left brow mirrors the right one.
    for i in range(5):
        pos[17 + i] = (-0.78 + 0.14 * i, 0.52 + 0.07 * np.sin(np.pi * i / 4.0))
    for i in range(5):
        pos[22 + i] = (-pos[21 - i, 0], pos[21 - i, 1])

    # Nose: bridge (27-30) then nostril base row (31-35).
    for i in range(4):
        pos[27 + i] = (0.0, 0.42 - 0.14 * i)
    for i in range(5):
        pos[31 + i] = (-0.16 + 0.08 * i, -0.06 - 0.04 * np.sin(np.pi * i / 4.0))

    # Eyes: six points around each eye center.
    for k, cx in ((36, -0.42), (42, 0.42)):
        for i in range(6):
            a = np.pi / 6.0 + np.pi * i / 3.0
            pos[k + i] = (cx + 0.15 * np.cos(a), 0.30 + 0.08 * np.sin(a))

    # Mouth: outer ellipse of 12, inner ellipse of 8.
    for i in range(12):
        a = np.pi * i / 6.0
        pos[48 + i] = (0.30 * np.cos(a), -0.45 + 0.15 * np.sin(a))
    for i in range(8):
        a = np.pi * i / 4.0
        pos[60 + i] = (0.17 * np.cos(a), -0.45 + 0.07 * np.sin(a))

    return [{"id": i, "x": round(float(pos[i, 0]), 6), "y": round(float(pos[i, 1]), 6),
             "region": region_of(i)} for i in range(NUM_LANDMARKS)]
