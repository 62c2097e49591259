"""Ground-truth rendering: confidence maps, part affinity fields, masks, loss.

Confidence maps hold, per part, the pixelwise maximum over persons of a
truncated Gaussian centered on each labeled keypoint. Affinity fields hold,
per limb, the average unit limb vector over the persons whose limb band
covers the pixel; pixels covered by no one are zero.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import MaskGrid, ScalarGrid, Scene, Topology, VectorGrid
from .errors import ConfigError, DimensionMismatchError, MaskRegionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RenderParams:
    """Rendering knobs: peak width, band half-width, Gaussian truncation.

    ``truncation_radius`` is in units of sigma; contributions farther than
    ``truncation_radius * sigma`` from a keypoint are exactly zero.
    """

    sigma: float = 7.0
    sigma_l: float = 5.0
    truncation_radius: float = 4.0

    def __post_init__(self) -> None:
        if not (self.sigma > 0):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not (self.sigma_l > 0):
            raise ConfigError(f"sigma_l must be positive, got {self.sigma_l}")
        if not (self.truncation_radius >= 3):
            raise ConfigError(
                f"truncation_radius must be at least 3, got {self.truncation_radius}"
            )


def render_confidence(scene: Scene, part: int, params: RenderParams) -> ScalarGrid:
    """Render one part's confidence map over all persons in the scene."""
    grid = ScalarGrid(scene.width, scene.height)
    xs = []
    ys = []
    for k in range(scene.num_persons):
        point = scene.keypoint(k, part)
        if point is not None:
            xs.append(point[0])
            ys.append(point[1])
    if xs:
        kernels.gaussian_peaks(
            grid.values, xs, ys, params.sigma, params.truncation_radius * params.sigma
        )
    return grid


def _limb_endpoints(scene: Scene, j1: int, j2: int, what: str):
    """Collect (a, b) endpoint pairs of one limb across persons, skipping
    persons with a missing endpoint and logging coincident endpoints."""
    pairs = []
    for k in range(scene.num_persons):
        a = scene.keypoint(k, j1)
        b = scene.keypoint(k, j2)
        if a is None or b is None:
            continue
        if a[0] == b[0] and a[1] == b[1]:
            logger.warning(
                "person %d has coincident endpoints for %s; skipping its contribution",
                k, what,
            )
            continue
        pairs.append((a, b))
    return pairs


def render_paf(scene: Scene, topology: Topology, limb: int, params: RenderParams) -> VectorGrid:
    """Render one limb's part affinity field, averaged over contributors."""
    j1, j2 = topology.limbs[limb]
    grid = VectorGrid(scene.width, scene.height)
    pairs = _limb_endpoints(scene, j1, j2, f"limb {limb}")
    if not pairs:
        return grid
    ax = [a[0] for a, _ in pairs]
    ay = [a[1] for a, _ in pairs]
    bx = [b[0] for _, b in pairs]
    by = [b[1] for _, b in pairs]
    count = kernels.new_band_count(scene.width, scene.height)
    kernels.limb_band_field(grid.x, grid.y, count, ax, ay, bx, by, params.sigma_l)
    covered = count > 0
    grid.x[covered] /= count[covered]
    grid.y[covered] /= count[covered]
    return grid


def render_midpoints(scene: Scene, topology: Topology, limb: int, params: RenderParams,
                     fractions: tuple[float, ...] = (0.5,)) -> list[ScalarGrid]:
    """Render interior-point confidence maps for one limb, one per fraction.

    The point at fraction u lies at (1-u)*a + u*b. These are the baseline
    representation the affinity fields are compared against.
    """
    j1, j2 = topology.limbs[limb]
    pairs = _limb_endpoints(scene, j1, j2, f"midpoints of limb {limb}")
    out = []
    for u in fractions:
        if not (0.0 < u < 1.0):
            raise ConfigError(f"midpoint fraction must be inside (0, 1), got {u}")
        grid = ScalarGrid(scene.width, scene.height)
        if pairs:
            xs = [(1.0 - u) * a[0] + u * b[0] for a, b in pairs]
            ys = [(1.0 - u) * a[1] + u * b[1] for a, b in pairs]
            kernels.gaussian_peaks(
                grid.values, xs, ys, params.sigma, params.truncation_radius * params.sigma
            )
        out.append(grid)
    return out


def render_all(scene: Scene, topology: Topology, params: RenderParams,
               threads: int = 1) -> tuple[list[ScalarGrid], list[VectorGrid]]:
    """Render every part map and every limb field for a scene.

    Channels are independent, so with ``threads > 1`` they render in a thread
    pool; the result does not depend on scheduling.
    """
    if scene.persons and scene.num_parts != topology.num_parts:
        raise DimensionMismatchError(
            f"scene has {scene.num_parts} parts, topology {topology.num_parts}"
        )
    if threads < 1:
        raise ConfigError(f"threads must be at least 1, got {threads}")
    part_jobs = [(render_confidence, (scene, j, params)) for j in range(topology.num_parts)]
    limb_jobs = [(render_paf, (scene, topology, c, params)) for c in range(topology.num_limbs)]
    if threads == 1:
        results = [fn(*args) for fn, args in part_jobs + limb_jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(fn, *args) for fn, args in part_jobs + limb_jobs]
            results = [f.result() for f in futures]
    maps = results[: topology.num_parts]
    fields = results[topology.num_parts :]
    return maps, fields


def build_mask(scene: Scene, unlabeled_regions) -> MaskGrid:
    """Build a loss mask that zeroes the given (x0, y0, x1, y1) rectangles.

    Rectangles are half-open in both axes and must lie inside the canvas.
    """
    mask = MaskGrid(scene.width, scene.height)
    for region in unlabeled_regions:
        x0, y0, x1, y1 = (int(v) for v in region)
        if not (0 <= x0 <= x1 <= scene.width and 0 <= y0 <= y1 <= scene.height):
            raise MaskRegionError(
                f"region {region} outside canvas {scene.width}x{scene.height}"
            )
        mask.values[y0:y1, x0:x1] = 0
    return mask


@dataclass(frozen=True)
class LossReport:
    """Masked squared-error totals for one prediction against ground truth."""

    confidence_loss: float
    field_loss: float

    @property
    def total(self) -> float:
        return self.confidence_loss + self.field_loss


def stage_loss(pred_maps: list[ScalarGrid], pred_fields: list[VectorGrid],
               gt_maps: list[ScalarGrid], gt_fields: list[VectorGrid],
               mask: MaskGrid) -> LossReport:
    """Sum masked squared errors over all map and field channels."""
    if len(pred_maps) != len(gt_maps):
        raise DimensionMismatchError(
            f"{len(pred_maps)} predicted maps vs {len(gt_maps)} ground-truth maps"
        )
    if len(pred_fields) != len(gt_fields):
        raise DimensionMismatchError(
            f"{len(pred_fields)} predicted fields vs {len(gt_fields)} ground-truth fields"
        )
    weights = mask.values.astype(np.float64)

    def check(grid, name):
        if (grid.width, grid.height) != (mask.width, mask.height):
            raise DimensionMismatchError(
                f"{name} is {grid.width}x{grid.height}, mask is {mask.width}x{mask.height}"
            )

    confidence = 0.0
    for i, (pred, gt) in enumerate(zip(pred_maps, gt_maps)):
        check(pred, f"predicted map {i}")
        check(gt, f"ground-truth map {i}")
        diff = pred.values - gt.values
        confidence += float((weights * diff * diff).sum())
    field = 0.0
    for i, (pred, gt) in enumerate(zip(pred_fields, gt_fields)):
        check(pred, f"predicted field {i}")
        check(gt, f"ground-truth field {i}")
        dx = pred.x - gt.x
        dy = pred.y - gt.y
        field += float((weights * (dx * dx + dy * dy)).sum())
    return LossReport(confidence, field)
