"""Core data types: topologies, dense grids, limb segments, and scenes.

Coordinates are continuous image coordinates with x to the right and y down.
Pixel (ix, iy) of a grid covers the unit square centered at (ix, iy); grid
arrays are indexed ``values[y, x]`` and stored row-major.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegmentError, TopologyError

TREE = "tree"
FULL_GRAPH = "full_graph"

PRESET_NAMES = ("mpii14", "coco18")


@dataclass(frozen=True)
class Topology:
    """A set of named parts plus the limb edges connecting them.

    ``kind`` is ``"tree"`` (spanning tree, exactly J-1 edges) or
    ``"full_graph"`` (every unordered part pair). ``reference_limb`` names the
    part pair whose ground-truth distance scales evaluation thresholds.
    """

    part_names: tuple[str, ...]
    limbs: tuple[tuple[int, int], ...]
    kind: str = TREE
    reference_limb: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        names = self.part_names
        if len(names) < 2:
            raise TopologyError("need at least two parts")
        if len(set(names)) != len(names):
            raise TopologyError("part names must be unique")
        for name in names:
            if not name or any(ch.isspace() for ch in name):
                raise TopologyError(f"part name {name!r} is empty or has whitespace")
        j = len(names)
        seen = set()
        for j1, j2 in self.limbs:
            if not (0 <= j1 < j and 0 <= j2 < j):
                raise TopologyError(f"limb ({j1}, {j2}) indexes outside 0..{j - 1}")
            if j1 == j2:
                raise TopologyError(f"limb ({j1}, {j2}) is a self-loop")
            key = (min(j1, j2), max(j1, j2))
            if key in seen:
                raise TopologyError(f"duplicate limb for parts {j1} and {j2}")
            seen.add(key)
        if self.kind == TREE:
            if len(self.limbs) != j - 1:
                raise TopologyError(
                    f"tree over {j} parts needs {j - 1} limbs, got {len(self.limbs)}"
                )
            if not self._connected():
                raise TopologyError("tree limbs do not connect all parts")
        elif self.kind == FULL_GRAPH:
            want = j * (j - 1) // 2
            if len(seen) != want:
                raise TopologyError(
                    f"full graph over {j} parts needs {want} limbs, got {len(self.limbs)}"
                )
        else:
            raise TopologyError(f"unknown topology kind {self.kind!r}")
        if self.reference_limb is not None:
            r1, r2 = self.reference_limb
            if not (0 <= r1 < j and 0 <= r2 < j) or r1 == r2:
                raise TopologyError(f"reference limb ({r1}, {r2}) is invalid")

    def _connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in self.part_names]
        for j1, j2 in self.limbs:
            adj[j1].append(j2)
            adj[j2].append(j1)
        seen = {0}
        stack = [0]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == len(self.part_names)

    @property
    def num_parts(self) -> int:
        return len(self.part_names)

    @property
    def num_limbs(self) -> int:
        return len(self.limbs)

    def part_index(self, name: str) -> int:
        try:
            return self.part_names.index(name)
        except ValueError:
            raise TopologyError(f"no part named {name!r}") from None


def full_graph_of(topology: Topology) -> Topology:
    """Return the full graph over the same parts as a tree topology."""
    if topology.kind != TREE:
        raise TopologyError("full_graph_of expects a tree topology")
    j = topology.num_parts
    limbs = tuple((a, b) for a in range(j) for b in range(a + 1, j))
    return Topology(topology.part_names, limbs, FULL_GRAPH, topology.reference_limb)


def parse_topology(text: str) -> Topology:
    """Parse the plain-text topology format.

    Lines: ``parts N`` followed by N part names, ``limbs M`` followed by M
    ``j1 j2`` index pairs, optionally ``reference j1 j2``. ``#`` starts a
    comment; blank lines are ignored. Kind is inferred from the edge set.
    """
    tokens: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    pos = 0

    def take() -> list[str]:
        nonlocal pos
        if pos >= len(tokens):
            raise TopologyError("unexpected end of topology text")
        row = tokens[pos]
        pos += 1
        return row

    head = take()
    if len(head) != 2 or head[0] != "parts":
        raise TopologyError(f"expected 'parts N', got {' '.join(head)!r}")
    try:
        num_parts = int(head[1])
    except ValueError:
        raise TopologyError(f"bad part count {head[1]!r}") from None
    names = []
    for _ in range(num_parts):
        row = take()
        if len(row) != 1:
            raise TopologyError(f"expected one part name per line, got {' '.join(row)!r}")
        names.append(row[0])
    head = take()
    if len(head) != 2 or head[0] != "limbs":
        raise TopologyError(f"expected 'limbs M', got {' '.join(head)!r}")
    try:
        num_limbs = int(head[1])
    except ValueError:
        raise TopologyError(f"bad limb count {head[1]!r}") from None
    limbs = []
    for _ in range(num_limbs):
        row = take()
        if len(row) != 2:
            raise TopologyError(f"expected 'j1 j2', got {' '.join(row)!r}")
        try:
            limbs.append((int(row[0]), int(row[1])))
        except ValueError:
            raise TopologyError(f"bad limb indices {' '.join(row)!r}") from None
    reference = None
    if pos < len(tokens):
        row = take()
        if len(row) != 3 or row[0] != "reference":
            raise TopologyError(f"unexpected trailing line {' '.join(row)!r}")
        try:
            reference = (int(row[1]), int(row[2]))
        except ValueError:
            raise TopologyError(f"bad reference indices {' '.join(row[1:])!r}") from None
    if pos < len(tokens):
        raise TopologyError(f"unexpected trailing line {' '.join(tokens[pos])!r}")
    kind = FULL_GRAPH if num_limbs == num_parts * (num_parts - 1) // 2 and num_parts > 2 else TREE
    return Topology(tuple(names), tuple(limbs), kind, reference)


def load_topology(path) -> Topology:
    with open(path, "r", encoding="ascii") as fh:
        return parse_topology(fh.read())


def topology_preset(name: str) -> Topology:
    """Load a packaged topology by name (``mpii14`` or ``coco18``)."""
    if name not in PRESET_NAMES:
        raise TopologyError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    data = importlib.resources.files("pafparse").joinpath("data", f"{name}.topo")
    return parse_topology(data.read_text(encoding="ascii"))


def _as_plane(values, width: int, height: int, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.shape != (height, width):
        raise ValueError(f"{name} expected shape ({height}, {width}), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def _check_dims(width: int, height: int) -> None:
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be positive, got {width}x{height}")


@dataclass
class ScalarGrid:
    """A dense real-valued image plane, float64, shape (height, width)."""

    width: int
    height: int
    values: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _check_dims(self.width, self.height)
        if self.values is None:
            self.values = np.zeros((self.height, self.width))
        else:
            self.values = _as_plane(self.values, self.width, self.height, "ScalarGrid")

    def at(self, x: int, y: int) -> float:
        return float(self.values[y, x])

    def put(self, x: int, y: int, value: float) -> None:
        self.values[y, x] = value


@dataclass
class VectorGrid:
    """A dense 2D-vector plane stored as separate x and y components."""

    width: int
    height: int
    x: np.ndarray = None  # type: ignore[assignment]
    y: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _check_dims(self.width, self.height)
        if self.x is None:
            self.x = np.zeros((self.height, self.width))
        else:
            self.x = _as_plane(self.x, self.width, self.height, "VectorGrid.x")
        if self.y is None:
            self.y = np.zeros((self.height, self.width))
        else:
            self.y = _as_plane(self.y, self.width, self.height, "VectorGrid.y")

    def at(self, x: int, y: int) -> tuple[float, float]:
        return float(self.x[y, x]), float(self.y[y, x])

    def put(self, x: int, y: int, vx: float, vy: float) -> None:
        self.x[y, x] = vx
        self.y[y, x] = vy


@dataclass
class MaskGrid:
    """A binary weight plane: 1 = pixel counts, 0 = pixel is ignored."""

    width: int
    height: int
    values: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _check_dims(self.width, self.height)
        if self.values is None:
            self.values = np.ones((self.height, self.width), dtype=np.uint8)
        else:
            raw = np.asarray(self.values)
            if raw.shape != (self.height, self.width):
                raise ValueError(
                    f"MaskGrid expected shape ({self.height}, {self.width}), got {raw.shape}"
                )
            if not np.isin(raw, (0, 1)).all():
                raise ValueError("MaskGrid values must be 0 or 1")
            self.values = np.ascontiguousarray(raw, dtype=np.uint8)

    def at(self, x: int, y: int) -> int:
        return int(self.values[y, x])

    def put(self, x: int, y: int, value: int) -> None:
        if value not in (0, 1):
            raise ValueError("MaskGrid values must be 0 or 1")
        self.values[y, x] = value


@dataclass(frozen=True)
class LimbSegment:
    """A directed segment with its unit direction, left normal, and length.

    ``normal`` is ``direction`` rotated +90 degrees: (x, y) -> (-y, x).
    """

    start: tuple[float, float]
    end: tuple[float, float]
    direction: tuple[float, float]
    normal: tuple[float, float]
    length: float


def limb_segment(a, b) -> LimbSegment:
    """Build the directed segment from point ``a`` to point ``b``."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dx = bx - ax
    dy = by - ay
    length = float(np.sqrt(dx * dx + dy * dy))
    if length == 0.0:
        raise DegenerateSegmentError(f"segment endpoints coincide at ({ax}, {ay})")
    vx = dx / length
    vy = dy / length
    return LimbSegment((ax, ay), (bx, by), (vx, vy), (-vy, vx), length)


@dataclass
class Scene:
    """Ground-truth keypoints for zero or more persons on one canvas.

    Each person is a (J, 2) float array of (x, y) rows; an unlabeled part is
    a row of NaNs. Labeled keypoints lie inside [0, width) x [0, height).
    """

    width: int
    height: int
    persons: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        _check_dims(self.width, self.height)
        converted = []
        num_parts = None
        for k, person in enumerate(self.persons):
            arr = np.ascontiguousarray(person, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValueError(f"person {k} must be a (J, 2) array, got {arr.shape}")
            if num_parts is None:
                num_parts = arr.shape[0]
            elif arr.shape[0] != num_parts:
                raise ValueError(f"person {k} has {arr.shape[0]} parts, expected {num_parts}")
            absent = np.isnan(arr)
            half = absent[:, 0] != absent[:, 1]
            if half.any():
                raise ValueError(f"person {k} has a half-labeled keypoint (one NaN coordinate)")
            ok = ~absent.any(axis=1)
            if ok.any():
                pts = arr[ok]
                if not np.isfinite(pts).all():
                    raise ValueError(f"person {k} has a non-finite coordinate")
                if (pts[:, 0] < 0).any() or (pts[:, 0] >= self.width).any():
                    raise ValueError(f"person {k} has x outside [0, {self.width})")
                if (pts[:, 1] < 0).any() or (pts[:, 1] >= self.height).any():
                    raise ValueError(f"person {k} has y outside [0, {self.height})")
            converted.append(arr)
        self.persons = converted

    @property
    def num_persons(self) -> int:
        return len(self.persons)

    @property
    def num_parts(self) -> int:
        return self.persons[0].shape[0] if self.persons else 0

    def labeled(self, person: int, part: int) -> bool:
        return bool(np.isfinite(self.persons[person][part]).all())

    def keypoint(self, person: int, part: int) -> np.ndarray | None:
        row = self.persons[person][part]
        return row.copy() if np.isfinite(row).all() else None
