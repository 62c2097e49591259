"""Serialization: the PAFT binary container plus scene and parse-result text.

PAFT layout (all integers little-endian unsigned 32-bit):

    bytes 0..3    magic "PAFT"
    bytes 4..7    version (1)
    bytes 8..11   width
    bytes 12..15  height
    bytes 16..19  num_maps
    bytes 20..23  num_fields
    then num_maps planes, then num_fields x/y plane pairs; each plane is
    width*height float32 values, little-endian, row-major.

Values are stored as float32; in-memory grids are float64, so a write/read
trip is bit-exact only for values representable in float32 (everything this
package renders is fine within 2^-24 relative error, and tests that demand
bit-exactness use float32-representable payloads).

The reader is safe on arbitrary bytes: any malformed, truncated, oversized,
or non-finite input raises FieldFileError and nothing else, and no
allocation happens before the header's element count passes the size cap.
"""

from __future__ import annotations

import struct

import numpy as np

from .assembly import ParseResult, PersonPose
from .core import ScalarGrid, Scene, Topology, VectorGrid
from .detection import PartCandidate
from .errors import DimensionMismatchError, FieldFileError, SceneFormatError

MAGIC = b"PAFT"
VERSION = 1
HEADER = struct.Struct("<4sIIIII")
MAX_ELEMENTS = 2 ** 28

_COORD_FORMAT = "{:.3f}"


def _element_count(width: int, height: int, num_maps: int, num_fields: int) -> int:
    return (num_maps + 2 * num_fields) * width * height


def write_fields(path, maps: list[ScalarGrid], fields: list[VectorGrid]) -> None:
    """Write maps and fields to one PAFT file."""
    dims = {(g.width, g.height) for g in maps} | {(g.width, g.height) for g in fields}
    if len(dims) > 1:
        raise DimensionMismatchError(f"mixed grid dimensions {sorted(dims)}")
    if not dims:
        raise DimensionMismatchError("nothing to write: no maps and no fields")
    (width, height), = dims
    if _element_count(width, height, len(maps), len(fields)) > MAX_ELEMENTS:
        raise FieldFileError(
            f"{len(maps)} maps and {len(fields)} fields at {width}x{height} "
            f"exceed the {MAX_ELEMENTS}-element cap"
        )
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, width, height, len(maps), len(fields)))
        for grid in maps:
            fh.write(np.ascontiguousarray(grid.values, dtype="<f4").tobytes())
        for grid in fields:
            fh.write(np.ascontiguousarray(grid.x, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(grid.y, dtype="<f4").tobytes())


def _read_exact(fh, count: int, offset: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FieldFileError(
            f"truncated file: expected {count} bytes for {what} at offset {offset}, "
            f"got {len(data)}"
        )
    return data


def read_fields(path) -> tuple[list[ScalarGrid], list[VectorGrid]]:
    """Read a PAFT file back into float64 grids."""
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise FieldFileError(f"cannot open {path}: {exc}") from exc
    with fh:
        header = _read_exact(fh, HEADER.size, 0, "header")
        magic, version, width, height, num_maps, num_fields = HEADER.unpack(header)
        if magic != MAGIC:
            raise FieldFileError(f"bad magic {magic!r}")
        if version != VERSION:
            raise FieldFileError(f"unsupported version {version}")
        if width < 1 or height < 1:
            raise FieldFileError(f"invalid dimensions {width}x{height}")
        if _element_count(width, height, num_maps, num_fields) > MAX_ELEMENTS:
            raise FieldFileError(
                f"{num_maps} maps and {num_fields} fields at {width}x{height} "
                f"exceed the {MAX_ELEMENTS}-element cap"
            )
        plane_bytes = width * height * 4
        offset = HEADER.size

        def read_plane(what: str) -> np.ndarray:
            nonlocal offset
            data = _read_exact(fh, plane_bytes, offset, what)
            offset += plane_bytes
            plane = np.frombuffer(data, dtype="<f4").reshape(height, width)
            # signalling NaN payloads would warn during the upcast; the grid
            # constructor rejects non-finite values right after
            with np.errstate(invalid="ignore"):
                return plane.astype(np.float64)

        try:
            maps = [
                ScalarGrid(width, height, read_plane(f"map {i}"))
                for i in range(num_maps)
            ]
            fields = []
            for i in range(num_fields):
                x = read_plane(f"field {i} x plane")
                y = read_plane(f"field {i} y plane")
                fields.append(VectorGrid(width, height, x, y))
        except ValueError as exc:
            raise FieldFileError(f"invalid plane data: {exc}") from exc
        if fh.read(1):
            raise FieldFileError(f"trailing data after offset {offset}")
    return maps, fields


def _format_coord(value: float, limit: float) -> str:
    """Format to 3 decimals without rounding up past the open upper bound."""
    text = _COORD_FORMAT.format(value)
    if float(text) >= limit:
        text = _COORD_FORMAT.format(limit - 0.001)
    return text


def write_scene(path, scene: Scene, topology: Topology) -> None:
    """Write a scene as text: header, then per person one line per part."""
    if scene.persons and scene.num_parts != topology.num_parts:
        raise DimensionMismatchError(
            f"scene has {scene.num_parts} parts, topology {topology.num_parts}"
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"scene {scene.width} {scene.height} {scene.num_persons}\n")
        for k in range(scene.num_persons):
            fh.write(f"person {k}\n")
            for j, name in enumerate(topology.part_names):
                point = scene.keypoint(k, j)
                if point is None:
                    fh.write(f"{name} -\n")
                else:
                    x = _format_coord(point[0], scene.width)
                    y = _format_coord(point[1], scene.height)
                    fh.write(f"{name} {x} {y}\n")


class _Lines:
    def __init__(self, text: str) -> None:
        self.rows = text.splitlines()
        self.next = 0

    def take(self, what: str) -> tuple[int, list[str]]:
        while self.next < len(self.rows):
            number = self.next + 1
            line = self.rows[self.next].strip()
            self.next += 1
            if line:
                return number, line.split()
        raise SceneFormatError(f"unexpected end of file while reading {what}")

    def done(self) -> bool:
        return all(not row.strip() for row in self.rows[self.next :])


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise SceneFormatError(f"line {line}: bad {what} {token!r}") from None
    if not np.isfinite(value):
        raise SceneFormatError(f"line {line}: non-finite {what} {token!r}")
    return value


def read_scene(path, topology: Topology) -> Scene:
    """Read a scene text file; line numbers appear in error messages."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = _Lines(fh.read())
    except (OSError, UnicodeDecodeError) as exc:
        raise SceneFormatError(f"cannot read {path}: {exc}") from exc
    number, row = lines.take("scene header")
    if len(row) != 4 or row[0] != "scene":
        raise SceneFormatError(f"line {number}: expected 'scene W H K'")
    try:
        width, height, count = int(row[1]), int(row[2]), int(row[3])
    except ValueError:
        raise SceneFormatError(f"line {number}: bad scene header numbers") from None
    if width < 1 or height < 1 or count < 0:
        raise SceneFormatError(f"line {number}: invalid scene header values")
    persons = []
    for k in range(count):
        number, row = lines.take(f"person {k}")
        if len(row) != 2 or row[0] != "person" or row[1] != str(k):
            raise SceneFormatError(f"line {number}: expected 'person {k}'")
        points = np.full((topology.num_parts, 2), np.nan)
        for j, name in enumerate(topology.part_names):
            number, row = lines.take(f"part {name} of person {k}")
            if row[0] != name:
                raise SceneFormatError(f"line {number}: expected part {name!r}, got {row[0]!r}")
            if len(row) == 2 and row[1] == "-":
                continue
            if len(row) != 3:
                raise SceneFormatError(f"line {number}: expected '{name} x y' or '{name} -'")
            points[j, 0] = _parse_float(row[1], number, "x")
            points[j, 1] = _parse_float(row[2], number, "y")
        persons.append(points)
    if not lines.done():
        raise SceneFormatError(f"line {lines.next + 1}: trailing content")
    try:
        return Scene(width, height, persons)
    except ValueError as exc:
        raise SceneFormatError(f"invalid scene: {exc}") from exc


def write_parse(path, result: ParseResult, topology: Topology) -> None:
    """Write a parse result as text: per person a header line and one line
    per part. Carries per-person data only; total_score is not stored."""
    with open(path, "w", encoding="ascii") as fh:
        for person in result.persons:
            score = _COORD_FORMAT.format(person.score)
            fh.write(f"person {score} {person.num_parts}\n")
            for j, name in enumerate(topology.part_names):
                cand = person.parts[j]
                if cand is None:
                    fh.write(f"{name} - - -\n")
                else:
                    fh.write(
                        f"{name} {_COORD_FORMAT.format(cand.x)} "
                        f"{_COORD_FORMAT.format(cand.y)} {_COORD_FORMAT.format(cand.score)}\n"
                    )


def read_parse(path, topology: Topology) -> ParseResult:
    """Read a parse-result text file written by ``write_parse``.

    Candidate ids are reassigned densely per part in file order; total_score
    is not stored in the format and reads back as 0.0.
    """
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = _Lines(fh.read())
    except (OSError, UnicodeDecodeError) as exc:
        raise SceneFormatError(f"cannot read {path}: {exc}") from exc
    persons = []
    next_id = [0] * topology.num_parts
    while not lines.done():
        number, row = lines.take("person header")
        if len(row) != 3 or row[0] != "person":
            raise SceneFormatError(f"line {number}: expected 'person score num_parts'")
        score = _parse_float(row[1], number, "score")
        try:
            declared = int(row[2])
        except ValueError:
            raise SceneFormatError(f"line {number}: bad part count {row[2]!r}") from None
        parts: list[PartCandidate | None] = [None] * topology.num_parts
        for j, name in enumerate(topology.part_names):
            number, row = lines.take(f"part {name}")
            if row[0] != name:
                raise SceneFormatError(f"line {number}: expected part {name!r}, got {row[0]!r}")
            if len(row) == 4 and row[1] == row[2] == row[3] == "-":
                continue
            if len(row) != 4:
                raise SceneFormatError(f"line {number}: expected '{name} x y conf'")
            x = _parse_float(row[1], number, "x")
            y = _parse_float(row[2], number, "y")
            conf = _parse_float(row[3], number, "confidence")
            parts[j] = PartCandidate(j, next_id[j], x, y, conf)
            next_id[j] += 1
        person = PersonPose(tuple(parts), score)
        if person.num_parts != declared:
            raise SceneFormatError(
                f"person declared {declared} parts but lists {person.num_parts}"
            )
        persons.append(person)
    return ParseResult(persons, 0.0)
