"""Outer boundary tracing of a single-component silhouette."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMask

# Clockwise on screen (y grows downward), starting from west.
_DIRS = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}


@dataclass(frozen=True)
class ContourChain:
    """Ordered boundary pixels as an (n, 2) array of integer (x, y)."""

    points: np.ndarray
    closed: bool = True

    def __len__(self):
        return len(self.points)

    def to_json(self):
        return json.dumps(self.points.tolist())


def trace_boundary(mask):
    """Moore-neighbour trace of the outer boundary, clockwise.

    Starts at the first foreground pixel in raster order and stops with
    Jacob's criterion (back at the start pixel, entered from the same
    side).
    """
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise EmptyMask("mask has no foreground")
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask

    start = (int(cols[0]), int(rows[0]))
    # the west neighbour of the raster-first pixel is always background
    start_back = 0
    x, y = start
    back = start_back
    chain = [start]
    limit = 4 * int(mask.sum()) + 8

    while True:
        for k in range(1, 9):
            d = (back + k) % 8
            dx, dy = _DIRS[d]
            if padded[y + dy + 1, x + dx + 1]:
                break
        else:
            break  # isolated pixel
        nxt = (x + dx, y + dy)
        # Jacob's criterion, plus the repeated-first-move guard that covers
        # starts re-entered from an unexpected side
        if (x, y) == start and len(chain) > 1 and nxt == chain[1]:
            break
        px, py = _DIRS[(back + k - 1) % 8]
        # the last background cell examined becomes the backtrack of the new pixel
        back = _DIR_INDEX[(x + px - nxt[0], y + py - nxt[1])]
        x, y = nxt
        if (x, y) == start and back == start_back:
            break
        chain.append((x, y))
        if len(chain) > limit:
            raise RuntimeError("boundary trace did not terminate")

    if len(chain) > 1 and chain[-1] == start:
        chain.pop()
    return ContourChain(np.array(chain, dtype=np.int64), closed=True)


def boundary_pixels(mask):
    """Foreground pixels 4-adjacent to background or to the image border."""
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return mask & ~interior
