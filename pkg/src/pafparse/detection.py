"""Peak detection: non-maximum suppression over confidence maps.

A candidate is an 8-neighborhood local maximum strictly above the score
threshold. On plateaus exactly one pixel survives (smallest y, then x).
Positions are refined to sub-pixel accuracy by fitting a parabola per axis;
the reported score is the map value at the integer peak.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .core import ScalarGrid


@dataclass(frozen=True)
class PartCandidate:
    """One detected keypoint: part index, per-part id, position, and score."""

    part: int
    id: int
    x: float
    y: float
    score: float


@dataclass
class CandidateSet:
    """Detected candidates grouped by part, ids dense per part."""

    by_part: list[list[PartCandidate]]

    @property
    def num_parts(self) -> int:
        return len(self.by_part)

    @property
    def total(self) -> int:
        return sum(len(group) for group in self.by_part)

    def all(self) -> list[PartCandidate]:
        return [cand for group in self.by_part for cand in group]


def _refine_axis(f_minus: float, f_center: float, f_plus: float) -> float:
    """Sub-pixel offset of the parabola through three samples, in [-0.5, 0.5].

    A non-concave fit (flat plateau or tie) keeps the integer position.
    """
    denom = f_minus - 2.0 * f_center + f_plus
    if denom >= 0.0:
        return 0.0
    offset = 0.5 * (f_minus - f_plus) / denom
    return min(max(offset, -0.5), 0.5)


def nms_peaks(grid: ScalarGrid, part: int, threshold: float = 0.1,
              refine: bool = True) -> list[PartCandidate]:
    """Detect peak candidates in one confidence map.

    Returns candidates ordered by descending score (ties by y, then x), with
    ids numbered in that order.
    """
    values = grid.values
    ys, xs = kernels.local_maxima(values, threshold)
    order = sorted(range(len(ys)), key=lambda i: (-values[ys[i], xs[i]], ys[i], xs[i]))
    out = []
    height, width = values.shape
    for rank, i in enumerate(order):
        iy = int(ys[i])
        ix = int(xs[i])
        score = float(values[iy, ix])
        x = float(ix)
        y = float(iy)
        if refine:
            if 1 <= ix <= width - 2:
                x += _refine_axis(values[iy, ix - 1], score, values[iy, ix + 1])
            if 1 <= iy <= height - 2:
                y += _refine_axis(values[iy - 1, ix], score, values[iy + 1, ix])
        out.append(PartCandidate(part, rank, x, y, score))
    return out


def detect_all(maps: list[ScalarGrid], threshold: float = 0.1,
               refine: bool = True) -> CandidateSet:
    """Run peak detection over every part map."""
    return CandidateSet([nms_peaks(grid, j, threshold, refine) for j, grid in enumerate(maps)])
