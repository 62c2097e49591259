"""Synthetic scenes and measurement noise, fully determined by seeds.

Persons are placed by rejection sampling: an articulated template is scaled,
rotated, jittered, and dropped onto the canvas until it clears the borders
and keeps ``min_separation`` from everyone already placed. Noise perturbs
rendered maps and fields the way an imperfect predictor would: pixel noise
everywhere plus spurious confidence peaks that produce false candidates.
"""

from __future__ import annotations

import importlib.resources
import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import PRESET_NAMES, TREE, ScalarGrid, Scene, Topology, VectorGrid
from .errors import ConfigError, SceneGenerationError

logger = logging.getLogger(__name__)

PLACEMENT_RETRIES = 1000


@dataclass(frozen=True)
class SceneConfig:
    """Scene layout controls.

    ``num_persons`` is either an exact count or an inclusive (low, high)
    range sampled per scene. ``scale_range`` is the torso length in pixels;
    ``rotation_range`` the half-width of the uniform rotation in radians;
    ``jitter`` the per-keypoint Gaussian noise as a fraction of scale;
    ``min_separation`` the minimum distance between keypoints of different
    persons; ``margin`` how far inside the canvas keypoints must stay.
    """

    width: int = 512
    height: int = 512
    num_persons: int | tuple[int, int] = 1
    scale_range: tuple[float, float] = (28.0, 40.0)
    rotation_range: float = 0.25
    jitter: float = 0.02
    min_separation: float = 0.0
    occlusion_prob: float = 0.0
    margin: float = 2.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.width < 4 or self.height < 4:
            raise ConfigError(f"canvas {self.width}x{self.height} is too small")
        lo, hi = self._person_range()
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad num_persons {self.num_persons!r}")
        slo, shi = self.scale_range
        if not (0 < slo <= shi):
            raise ConfigError(f"bad scale_range {self.scale_range!r}")
        if self.rotation_range < 0:
            raise ConfigError("rotation_range must be non-negative")
        if self.jitter < 0:
            raise ConfigError("jitter must be non-negative")
        if self.min_separation < 0:
            raise ConfigError("min_separation must be non-negative")
        if not (0.0 <= self.occlusion_prob <= 1.0):
            raise ConfigError("occlusion_prob must be in [0, 1]")
        if self.margin < 0:
            raise ConfigError("margin must be non-negative")

    def _person_range(self) -> tuple[int, int]:
        if isinstance(self.num_persons, tuple):
            return self.num_persons
        return (self.num_persons, self.num_persons)


@dataclass(frozen=True)
class NoiseConfig:
    """Measurement-noise controls for ``perturb``.

    ``false_peak_rate`` is the expected (Poisson) number of spurious peaks
    injected per confidence map; their amplitude is uniform in [0.3, 0.7].
    """

    map_noise_std: float = 0.0
    field_noise_std: float = 0.0
    false_peak_rate: float = 0.0
    false_peak_sigma: float = 7.0
    false_peak_truncation: float = 4.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.map_noise_std < 0 or self.field_noise_std < 0:
            raise ConfigError("noise std must be non-negative")
        if self.false_peak_rate < 0:
            raise ConfigError("false_peak_rate must be non-negative")
        if self.false_peak_sigma <= 0:
            raise ConfigError("false_peak_sigma must be positive")
        if self.false_peak_truncation < 3:
            raise ConfigError("false_peak_truncation must be at least 3")


def _template_from_file(topology: Topology) -> np.ndarray | None:
    for preset in PRESET_NAMES:
        data = importlib.resources.files("pafparse").joinpath("data", f"{preset}.template")
        rows = {}
        for raw in data.read_text(encoding="ascii").splitlines():
            line = raw.split("#", 1)[0].strip()
            if line:
                name, dx, dy = line.split()
                rows[name] = (float(dx), float(dy))
        if set(rows) == set(topology.part_names):
            return np.array([rows[name] for name in topology.part_names])
    return None


def _template_from_tree(topology: Topology) -> np.ndarray:
    """Deterministic stick-figure layout for topologies without a stored
    template: walk the tree from part 0, placing each child one unit from
    its parent at a golden-angle heading."""
    adj: list[list[int]] = [[] for _ in topology.part_names]
    for j1, j2 in topology.limbs:
        adj[j1].append(j2)
        adj[j2].append(j1)
    pos = np.full((topology.num_parts, 2), np.nan)
    pos[0] = (0.0, 0.0)
    order = [0]
    seen = {0}
    step = 0
    while order:
        parent = order.pop(0)
        for child in sorted(adj[parent]):
            if child in seen:
                continue
            seen.add(child)
            angle = 2.399963229728653 * step + 0.5
            step += 1
            pos[child] = pos[parent] + (math.cos(angle), math.sin(angle))
            order.append(child)
    center = pos.mean(axis=0)
    return pos - center


def template_for(topology: Topology) -> np.ndarray:
    """(J, 2) template offsets in torso units for a topology."""
    stored = _template_from_file(topology)
    if stored is not None:
        return stored
    if topology.kind != TREE:
        raise ConfigError("no stored template; can only derive one for a tree topology")
    return _template_from_tree(topology)


def generate_scene(config: SceneConfig, topology: Topology) -> Scene:
    """Generate a deterministic scene for a config and topology.

    Raises SceneGenerationError when a person cannot be placed within the
    retry budget, naming the constraint that kept failing.
    """
    rng = np.random.default_rng(config.seed)
    template = template_for(topology)
    lo, hi = config._person_range()
    count = int(lo if lo == hi else rng.integers(lo, hi + 1))
    placed: list[np.ndarray] = []
    for k in range(count):
        placed.append(_place_person(config, template, rng, placed, k))
    persons = placed
    if config.occlusion_prob > 0:
        persons = []
        for arr in placed:
            drop = rng.random(arr.shape[0]) < config.occlusion_prob
            arr = arr.copy()
            arr[drop] = np.nan
            persons.append(arr)
    return Scene(config.width, config.height, persons)


def _place_person(config: SceneConfig, template: np.ndarray, rng, placed, k) -> np.ndarray:
    last_failure = "bounds"
    margin = config.margin
    for _ in range(PLACEMENT_RETRIES):
        scale = rng.uniform(*config.scale_range)
        angle = rng.uniform(-config.rotation_range, config.rotation_range)
        cx = rng.uniform(margin, config.width - margin)
        cy = rng.uniform(margin, config.height - margin)
        cos_a = math.cos(angle)
        sin_a = math.sin(angle)
        rot = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
        points = (template * scale) @ rot.T + (cx, cy)
        if config.jitter > 0:
            points = points + rng.normal(0.0, config.jitter * scale, points.shape)
        if (points[:, 0] < margin).any() or (points[:, 0] >= config.width - margin).any() \
                or (points[:, 1] < margin).any() or (points[:, 1] >= config.height - margin).any():
            last_failure = "bounds"
            continue
        if placed and config.min_separation > 0:
            others = np.concatenate(placed)
            gaps = np.sqrt(
                ((points[:, None, :] - others[None, :, :]) ** 2).sum(axis=2)
            )
            if gaps.min() < config.min_separation:
                last_failure = "min_separation"
                continue
        return points
    raise SceneGenerationError(
        f"could not place person {k} within {PLACEMENT_RETRIES} retries "
        f"(kept violating {last_failure})"
    )


@dataclass(frozen=True)
class InjectedPeak:
    """A spurious confidence peak added by ``perturb``."""

    channel: int
    x: float
    y: float
    amplitude: float


@dataclass
class PerturbResult:
    """Perturbed copies of maps and fields plus the injected-peak inventory."""

    maps: list[ScalarGrid]
    fields: list[VectorGrid]
    injected: tuple[InjectedPeak, ...]


def perturb(maps: list[ScalarGrid], fields: list[VectorGrid],
            noise: NoiseConfig) -> PerturbResult:
    """Apply pixel noise and spurious peaks; inputs are left untouched.

    Map values are clamped back to [0, 1] after perturbation; fields are
    noisy but unclamped. Everything is driven by ``noise.seed``.
    """
    rng = np.random.default_rng(noise.seed)
    out_maps = []
    injected: list[InjectedPeak] = []
    for channel, grid in enumerate(maps):
        values = grid.values.copy()
        if noise.map_noise_std > 0:
            values += rng.normal(0.0, noise.map_noise_std, values.shape)
        if noise.false_peak_rate > 0:
            for _ in range(int(rng.poisson(noise.false_peak_rate))):
                x = rng.uniform(0.0, grid.width)
                y = rng.uniform(0.0, grid.height)
                amplitude = rng.uniform(0.3, 0.7)
                _add_bump(values, x, y, amplitude,
                          noise.false_peak_sigma, noise.false_peak_truncation)
                injected.append(InjectedPeak(channel, x, y, amplitude))
        np.clip(values, 0.0, 1.0, out=values)
        out_maps.append(ScalarGrid(grid.width, grid.height, values))
    if injected:
        logger.info("injected %d spurious peaks", len(injected))
    out_fields = []
    for grid in fields:
        x = grid.x.copy()
        y = grid.y.copy()
        if noise.field_noise_std > 0:
            x += rng.normal(0.0, noise.field_noise_std, x.shape)
            y += rng.normal(0.0, noise.field_noise_std, y.shape)
        out_fields.append(VectorGrid(grid.width, grid.height, x, y))
    return PerturbResult(out_maps, out_fields, tuple(injected))


def _add_bump(values: np.ndarray, x: float, y: float, amplitude: float,
              sigma: float, truncation: float) -> None:
    height, width = values.shape
    cutoff = truncation * sigma
    x0 = max(int(math.ceil(x - cutoff)), 0)
    x1 = min(int(math.floor(x + cutoff)), width - 1)
    y0 = max(int(math.ceil(y - cutoff)), 0)
    y1 = min(int(math.floor(y + cutoff)), height - 1)
    if x0 > x1 or y0 > y1:
        return
    gx = np.arange(x0, x1 + 1, dtype=np.float64) - x
    gy = np.arange(y0, y1 + 1, dtype=np.float64) - y
    d2 = gx[None, :] ** 2 + gy[:, None] ** 2
    bump = np.where(d2 <= cutoff * cutoff, amplitude * np.exp(-d2 / (sigma * sigma)), 0.0)
    values[y0 : y1 + 1, x0 : x1 + 1] += bump


CROSSING_TOPOLOGY = Topology(("upper", "lower"), ((0, 1),), TREE, (0, 1))


def generate_crossing_scene(seed: int, width: int = 128, height: int = 128) -> Scene:
    """Two single-limb persons whose limbs start close together and cross.

    The upper endpoints sit a few pixels apart while the limbs descend in
    opposite slants, so the wrong pairing (one person's upper with the
    other's lower) stays geometrically plausible. This is the stress case
    that separates direction-aware limb scoring from interior-point checks.
    """
    rng = np.random.default_rng(seed)
    gap = rng.uniform(4.0, 10.0)
    cx = width / 2.0 + rng.uniform(-6.0, 6.0)
    cy = rng.uniform(16.0, 26.0)
    upper_a = np.array([cx - gap / 2.0, cy])
    upper_b = np.array([cx + gap / 2.0, cy])
    length_a = rng.uniform(55.0, 80.0)
    length_b = rng.uniform(55.0, 80.0)
    slant_a = rng.uniform(0.35, 0.75)
    slant_b = rng.uniform(0.35, 0.75)
    lower_a = upper_a + length_a * np.array([math.sin(slant_a), math.cos(slant_a)])
    lower_b = upper_b + length_b * np.array([-math.sin(slant_b), math.cos(slant_b)])
    for point in (lower_a, lower_b):
        point[0] = min(max(point[0], 1.0), width - 2.0)
        point[1] = min(max(point[1], 1.0), height - 2.0)
    return Scene(width, height, [
        np.array([upper_a, lower_a]),
        np.array([upper_b, lower_b]),
    ])
