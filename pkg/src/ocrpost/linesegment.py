"""Text-line segmentation: projection profile bands separated by A* seams.

The edge image drives band detection (horizontal projection profile with a
quarter-range threshold); the binarized ink mask drives the seam search, where
ink cells are expensive obstacles rather than walls so touching lines still
get cut somewhere.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .imagecore import BACKGROUND, INK, EdgeImage, GrayImage, binarize, sobel

__all__ = [
    "HppProfile",
    "LineBand",
    "SeamPath",
    "SeamCosts",
    "SegmentationOutput",
    "hpp",
    "detect_bands",
    "seam_between",
    "corridor_cell_costs",
    "segment_document",
    "seam_rows_within",
    "is_monotone",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class HppProfile:
    sums: tuple[float, ...]

    def __post_init__(self):
        if not self.sums:
            raise ValueError("profile must have at least one row")
        if min(self.sums) < 0:
            raise ValueError("projection sums must be non-negative")

    @property
    def max(self) -> float:
        return max(self.sums)

    @property
    def min(self) -> float:
        return min(self.sums)

    def __len__(self):
        return len(self.sums)


class LineBand(NamedTuple):
    top_row: int
    bottom_row: int

    @property
    def height(self) -> int:
        return self.bottom_row - self.top_row + 1


@dataclass(frozen=True)
class SeamPath:
    """Monotone left-to-right path of (row, col) cells plus its A* cost."""

    points: tuple[tuple[int, int], ...]
    cost: float = 0.0
    ink_cells: int = 0

    def rows_at(self, col: int) -> list[int]:
        return [r for r, c in self.points if c == col]

    def to_list(self) -> list[list[int]]:
        return [[r, c] for r, c in self.points]


@dataclass(frozen=True)
class SeamCosts:
    ink_penalty: float = 900.0
    deviation_weight: float = 0.05


def hpp(edges: EdgeImage, window: int = 1) -> HppProfile:
    """Row sums of edge magnitude, optionally smoothed by a centred moving average.

    ``window`` must be odd; 1 disables smoothing. The average uses edge
    replication so the profile length stays equal to the image height.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"smoothing window must be a positive odd integer, got {window}")
    sums = edges.magnitudes.sum(axis=1)
    if window > 1:
        half = window // 2
        padded = np.pad(sums, half, mode="edge")
        sums = np.convolve(padded, np.ones(window) / window, mode="valid")
    return HppProfile(tuple(float(s) for s in sums))


def detect_bands(profile: HppProfile) -> list[LineBand]:
    """Maximal runs of rows whose sum reaches ``min + (max - min) / 4``."""
    lo, hi = profile.min, profile.max
    if hi == lo:
        return []
    threshold = lo + (hi - lo) / 4
    bands: list[LineBand] = []
    start = None
    for r, s in enumerate(profile.sums):
        if s >= threshold:
            if start is None:
                start = r
        elif start is not None:
            bands.append(LineBand(start, r - 1))
            start = None
    if start is not None:
        bands.append(LineBand(start, len(profile) - 1))
    return bands


def corridor_cell_costs(
    ink: GrayImage, top: int, bottom: int, costs: SeamCosts = SeamCosts()
) -> np.ndarray:
    """Cost paid on entering each cell of rows ``top..bottom``: ink penalty + deviation."""
    rows = np.arange(top, bottom + 1, dtype=np.float64)
    mid = (top + bottom) / 2
    deviation = costs.deviation_weight * np.abs(rows - mid)
    is_ink = ink.pixels[top : bottom + 1] == INK
    return is_ink * costs.ink_penalty + deviation[:, None]


# Moves keep the column fixed or advance it by one; never step left.
_MOVES = ((-1, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (-1, 1, SQRT2), (1, 1, SQRT2))


def seam_between(
    ink: GrayImage,
    upper: LineBand,
    lower: LineBand,
    costs: SeamCosts = SeamCosts(),
) -> SeamPath:
    """Cheapest monotone 8-connected path across the corridor spanning both bands.

    Any cell in column 0 may start the path and any cell in the last column
    ends it. Each entered cell (the start included) costs its ink penalty and
    deviation from the corridor midline; each move adds 1 or sqrt(2). The
    remaining-columns heuristic is consistent, so the first goal popped is
    optimal.
    """
    top, bottom = upper.top_row, lower.bottom_row
    if bottom < top or top < 0 or bottom >= ink.height:
        raise ValueError(f"empty or out-of-range seam corridor rows [{top}, {bottom}]")
    cell = corridor_cell_costs(ink, top, bottom, costs).tolist()
    h, w = bottom - top + 1, ink.width
    last = w - 1

    inf = math.inf
    g = [[inf] * w for _ in range(h)]
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    heap: list[tuple[float, float, int, int]] = []
    for r in range(h):
        g[r][0] = cell[r][0]
        heapq.heappush(heap, (cell[r][0] + last, cell[r][0], r, 0))

    goal = None
    closed = [[False] * w for _ in range(h)]
    while heap:
        f, gc, r, c = heapq.heappop(heap)
        if closed[r][c]:
            continue
        closed[r][c] = True
        if c == last:
            goal = (r, c)
            break
        for dr, dc, step in _MOVES:
            nr, nc = r + dr, c + dc
            if not 0 <= nr < h or closed[nr][nc]:
                continue
            ng = gc + step + cell[nr][nc]
            if ng < g[nr][nc]:
                g[nr][nc] = ng
                parent[(nr, nc)] = (r, c)
                heapq.heappush(heap, (ng + (last - nc), ng, nr, nc))

    assert goal is not None  # every corridor row is connected to the last column
    path = [goal]
    while path[-1] in parent:
        path.append(parent[path[-1]])
    path.reverse()
    ink_rows = ink.pixels[top : bottom + 1]
    n_ink = sum(1 for r, c in path if ink_rows[r, c] == INK)
    return SeamPath(
        points=tuple((r + top, c) for r, c in path),
        cost=g[goal[0]][goal[1]],
        ink_cells=n_ink,
    )


@dataclass
class SegmentationOutput:
    crops: list[GrayImage] = field(default_factory=list)
    seams: list[SeamPath] = field(default_factory=list)
    bands: list[LineBand] = field(default_factory=list)

    def __iter__(self):
        # allows ``crops, seams = segment_document(img)``
        yield self.crops
        yield self.seams


def _line_crop(img: GrayImage, upper_seam: SeamPath | None, lower_seam: SeamPath | None) -> GrayImage:
    h, w = img.height, img.width
    start = np.zeros(w, dtype=np.int64)
    stop = np.full(w, h - 1, dtype=np.int64)
    if upper_seam is not None:
        for r, c in upper_seam.points:
            start[c] = max(start[c], r + 1)
    if lower_seam is not None:
        first = np.full(w, h, dtype=np.int64)
        for r, c in lower_seam.points:
            first[c] = min(first[c], r)
        stop = np.minimum(stop, first - 1)
    rows = np.arange(h)[:, None]
    mask = (rows >= start[None, :]) & (rows <= stop[None, :])
    out = np.where(mask, img.pixels, BACKGROUND).astype(np.uint8)
    covered = np.flatnonzero(mask.any(axis=1))
    if covered.size == 0:
        return GrayImage(np.full((1, w), BACKGROUND, dtype=np.uint8))
    return GrayImage(out[covered[0] : covered[-1] + 1])


def segment_document(
    img: GrayImage,
    *,
    threshold: int | None = None,
    smoothing: int = 1,
    costs: SeamCosts = SeamCosts(),
) -> SegmentationOutput:
    """Split a non-skewed page into per-line crops, top to bottom.

    Sobel edges feed the projection profile; the Otsu (or given ``threshold``)
    ink mask feeds the seams. Line ``i`` covers the rows strictly between seam
    ``i-1`` and seam ``i`` in every column (page edges for the first and last
    line); pixels outside that region are painted background and the crop is
    trimmed to the covered rows.
    """
    bands = detect_bands(hpp(sobel(img), window=smoothing))
    if not bands:
        return SegmentationOutput()
    ink = binarize(img, threshold)
    seams = [seam_between(ink, a, b, costs) for a, b in zip(bands, bands[1:])]
    bounds: list[SeamPath | None] = [None, *seams, None]
    crops = [_line_crop(img, bounds[i], bounds[i + 1]) for i in range(len(bands))]
    return SegmentationOutput(crops=crops, seams=seams, bands=bands)


def seam_rows_within(seam: SeamPath, top: int, bottom: int) -> bool:
    return all(top <= r <= bottom for r, _ in seam.points)


def is_monotone(points: Sequence[tuple[int, int]], width: int) -> bool:
    if not points or points[0][1] != 0 or points[-1][1] != width - 1:
        return False
    for (r0, c0), (r1, c1) in zip(points, points[1:]):
        if c1 - c0 not in (0, 1) or abs(r1 - r0) > 1 or (r0, c0) == (r1, c1):
            return False
    return True
