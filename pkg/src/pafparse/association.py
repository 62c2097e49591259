"""Connection scoring between part candidates.

The primary score is the line integral of a limb's affinity field along the
candidate segment: the mean, over uniformly spaced samples including both
endpoints, of the field dotted with the segment's unit direction. Aligned
true limbs score near 1, reversed ones near -1, and segments over empty
field score 0. Interior-point baselines score a segment by reading one or
two auxiliary confidence maps at fixed fractions along it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import ScalarGrid, Topology, VectorGrid
from .detection import CandidateSet
from .errors import ConfigError, DegenerateSegmentError, DimensionMismatchError

COINCIDENT = float("-inf")

TWO_POINT_FRACTIONS = (1.0 / 3.0, 2.0 / 3.0)


@dataclass(frozen=True)
class IntegralParams:
    """Sampling controls for the line integral."""

    num_samples: int = 10
    bilinear: bool = True

    def __post_init__(self) -> None:
        if self.num_samples < 2:
            raise ConfigError(f"num_samples must be at least 2, got {self.num_samples}")


@dataclass(frozen=True)
class ConnectionScore:
    """Score of pairing candidate ``m`` of the limb's first part with
    candidate ``n`` of its second part."""

    limb: int
    m: int
    n: int
    score: float


def line_integral(field: VectorGrid, a, b, params: IntegralParams = IntegralParams()) -> float:
    """Integrate one field along the directed segment from ``a`` to ``b``."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if ax == bx and ay == by:
        raise DegenerateSegmentError(f"cannot integrate along a point at ({ax}, {ay})")
    out = kernels.sample_line_integrals(
        field.x, field.y, [ax], [ay], [bx], [by], params.num_samples, params.bilinear
    )
    return float(out[0])


def _pair_arrays(group_a, group_b):
    """Flattened endpoint arrays for the full pair grid of two candidate lists."""
    ax = np.repeat([c.x for c in group_a], len(group_b))
    ay = np.repeat([c.y for c in group_a], len(group_b))
    bx = np.tile([c.x for c in group_b], len(group_a))
    by = np.tile([c.y for c in group_b], len(group_a))
    return ax, ay, bx, by


def score_connections(fields: list[VectorGrid], candidates: CandidateSet,
                      topology: Topology,
                      params: IntegralParams = IntegralParams()) -> list[list[ConnectionScore]]:
    """Score every candidate pair of every limb by field line integral.

    Coincident candidate pairs cannot form a limb and score ``-inf``, which
    every matcher treats as unusable.
    """
    if len(fields) != topology.num_limbs:
        raise DimensionMismatchError(
            f"{len(fields)} fields for {topology.num_limbs} limbs"
        )
    if candidates.num_parts != topology.num_parts:
        raise DimensionMismatchError(
            f"candidates cover {candidates.num_parts} parts, topology has {topology.num_parts}"
        )
    scored = []
    for c, (j1, j2) in enumerate(topology.limbs):
        group_a = candidates.by_part[j1]
        group_b = candidates.by_part[j2]
        rows: list[ConnectionScore] = []
        if group_a and group_b:
            ax, ay, bx, by = _pair_arrays(group_a, group_b)
            coincident = (ax == bx) & (ay == by)
            safe_bx = np.where(coincident, bx + 1.0, bx)
            raw = kernels.sample_line_integrals(
                fields[c].x, fields[c].y, ax, ay, safe_bx, by,
                params.num_samples, params.bilinear,
            )
            raw = np.where(coincident, COINCIDENT, raw)
            i = 0
            for ca in group_a:
                for cb in group_b:
                    rows.append(ConnectionScore(c, ca.id, cb.id, float(raw[i])))
                    i += 1
        scored.append(rows)
    return scored


def _interior_points(a, b, fractions):
    return [((1.0 - u) * a[0] + u * b[0], (1.0 - u) * a[1] + u * b[1]) for u in fractions]


def midpoint_score(mid_map: ScalarGrid, a, b, bilinear: bool = True) -> float:
    """Baseline score: the midpoint confidence read halfway along a segment."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if ax == bx and ay == by:
        raise DegenerateSegmentError(f"cannot score a zero-length segment at ({ax}, {ay})")
    (px, py), = _interior_points((ax, ay), (bx, by), (0.5,))
    return float(kernels.sample_plane(mid_map.values, px, py, bilinear))


def two_midpoint_score(maps: list[ScalarGrid], a, b, bilinear: bool = True) -> float:
    """Baseline score: mean confidence at one-third and two-thirds points."""
    if len(maps) != 2:
        raise ConfigError(f"two_midpoint_score needs 2 maps, got {len(maps)}")
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if ax == bx and ay == by:
        raise DegenerateSegmentError(f"cannot score a zero-length segment at ({ax}, {ay})")
    points = _interior_points((ax, ay), (bx, by), TWO_POINT_FRACTIONS)
    total = 0.0
    for grid, (px, py) in zip(maps, points):
        total += float(kernels.sample_plane(grid.values, px, py, bilinear))
    return total / 2.0


def score_connections_interior(mid_maps: list[list[ScalarGrid]], candidates: CandidateSet,
                               topology: Topology, fractions: tuple[float, ...] = (0.5,),
                               bilinear: bool = True) -> list[list[ConnectionScore]]:
    """Score every candidate pair from interior-point maps.

    ``mid_maps[c]`` holds one map per fraction for limb ``c``, rendered at the
    same fractions passed here. The score is the mean map value over the
    fractions; coincident pairs score ``-inf`` as in ``score_connections``.
    """
    if len(mid_maps) != topology.num_limbs:
        raise DimensionMismatchError(
            f"{len(mid_maps)} map groups for {topology.num_limbs} limbs"
        )
    scored = []
    for c, (j1, j2) in enumerate(topology.limbs):
        group_a = candidates.by_part[j1]
        group_b = candidates.by_part[j2]
        if len(mid_maps[c]) != len(fractions):
            raise DimensionMismatchError(
                f"limb {c} has {len(mid_maps[c])} maps for {len(fractions)} fractions"
            )
        rows: list[ConnectionScore] = []
        if group_a and group_b:
            ax, ay, bx, by = _pair_arrays(group_a, group_b)
            coincident = (ax == bx) & (ay == by)
            acc = np.zeros(len(ax))
            for grid, u in zip(mid_maps[c], fractions):
                px = (1.0 - u) * ax + u * bx
                py = (1.0 - u) * ay + u * by
                acc += kernels.sample_plane(grid.values, px, py, bilinear)
            acc /= len(fractions)
            acc = np.where(coincident, COINCIDENT, acc)
            i = 0
            for ca in group_a:
                for cb in group_b:
                    rows.append(ConnectionScore(c, ca.id, cb.id, float(acc[i])))
                    i += 1
        scored.append(rows)
    return scored
