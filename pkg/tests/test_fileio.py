"""Serialization round-trips and reader robustness."""

import struct

import numpy as np
import pytest

from pafparse.assembly import ParseResult, PersonPose
from pafparse.core import ScalarGrid, Scene, VectorGrid
from pafparse.detection import PartCandidate
from pafparse.errors import (
    DimensionMismatchError,
    FieldFileError,
    SceneFormatError,
)
from pafparse.fileio import (
    MAGIC,
    read_fields,
    read_parse,
    read_scene,
    write_fields,
    write_parse,
    write_scene,
)


def f32_grids(rng, w, h, num_maps, num_fields):
    maps = [
        ScalarGrid(w, h, rng.random((h, w)).astype(np.float32).astype(np.float64))
        for _ in range(num_maps)
    ]
    fields = [
        VectorGrid(
            w,
            h,
            rng.standard_normal((h, w)).astype(np.float32).astype(np.float64),
            rng.standard_normal((h, w)).astype(np.float32).astype(np.float64),
        )
        for _ in range(num_fields)
    ]
    return maps, fields


def test_fields_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(31)
    for trial in range(100):
        w = int(rng.integers(1, 24))
        h = int(rng.integers(1, 24))
        num_maps = int(rng.integers(1, 5))
        num_fields = int(rng.integers(0, 4))
        maps, fields = f32_grids(rng, w, h, num_maps, num_fields)
        path = tmp_path / f"t{trial}.paft"
        write_fields(path, maps, fields)
        maps2, fields2 = read_fields(path)
        assert len(maps2) == num_maps and len(fields2) == num_fields
        for a, b in zip(maps, maps2):
            np.testing.assert_array_equal(a.values, b.values)
        for a, b in zip(fields, fields2):
            np.testing.assert_array_equal(a.x, b.x)
            np.testing.assert_array_equal(a.y, b.y)


def test_fields_header_layout(tmp_path):
    maps = [ScalarGrid(3, 2, np.arange(6, dtype=float).reshape(2, 3))]
    path = tmp_path / "h.paft"
    write_fields(path, maps, [])
    blob = path.read_bytes()
    assert blob[:4] == MAGIC
    version, w, h, num_maps, num_fields = struct.unpack("<IIIII", blob[4:24])
    assert (version, w, h, num_maps, num_fields) == (1, 3, 2, 1, 0)
    # row-major float32 plane follows immediately
    plane = np.frombuffer(blob[24:], dtype="<f4")
    np.testing.assert_array_equal(plane, np.arange(6, dtype=np.float32))
    assert len(blob) == 24 + 6 * 4


def test_fields_empty_rejected(tmp_path):
    with pytest.raises(DimensionMismatchError):
        write_fields(tmp_path / "e.paft", [], [])


def test_fields_mixed_dims_rejected(tmp_path):
    with pytest.raises(DimensionMismatchError):
        write_fields(tmp_path / "m.paft", [ScalarGrid(4, 4)], [VectorGrid(5, 4)])


def test_reader_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.paft"
    path.write_bytes(b"JUNK" + b"\x00" * 40)
    with pytest.raises(FieldFileError):
        read_fields(path)


def test_reader_rejects_bad_version(tmp_path):
    path = tmp_path / "v.paft"
    path.write_bytes(MAGIC + struct.pack("<IIIII", 2, 1, 1, 1, 0) + b"\x00" * 4)
    with pytest.raises(FieldFileError):
        read_fields(path)


def test_reader_rejects_truncation(tmp_path):
    maps = [ScalarGrid(8, 8, np.ones((8, 8)))]
    path = tmp_path / "t.paft"
    write_fields(path, maps, [])
    blob = path.read_bytes()
    for cut in (3, 10, 24, len(blob) - 1):
        short = tmp_path / f"cut{cut}.paft"
        short.write_bytes(blob[:cut])
        with pytest.raises(FieldFileError):
            read_fields(short)


def test_reader_rejects_trailing_bytes(tmp_path):
    maps = [ScalarGrid(4, 4)]
    path = tmp_path / "x.paft"
    write_fields(path, maps, [])
    extra = tmp_path / "extra.paft"
    extra.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FieldFileError):
        read_fields(extra)


def test_reader_rejects_huge_claim(tmp_path):
    path = tmp_path / "huge.paft"
    path.write_bytes(MAGIC + struct.pack("<IIIII", 1, 2 ** 16, 2 ** 16, 64, 0))
    with pytest.raises(FieldFileError):
        read_fields(path)


def test_reader_rejects_nonfinite(tmp_path):
    path = tmp_path / "nan.paft"
    payload = struct.pack("<f", float("nan")) * 4
    path.write_bytes(MAGIC + struct.pack("<IIIII", 1, 2, 2, 1, 0) + payload)
    with pytest.raises(FieldFileError):
        read_fields(path)


def test_reader_fuzz_never_crashes(tmp_path):
    """Random bytes and random corruptions of a valid file: errors only."""
    rng = np.random.default_rng(37)
    base_maps = [ScalarGrid(6, 5, rng.random((5, 6)))]
    base_fields = [VectorGrid(6, 5, rng.random((5, 6)), rng.random((5, 6)))]
    valid_path = tmp_path / "valid.paft"
    write_fields(valid_path, base_maps, base_fields)
    valid = bytearray(valid_path.read_bytes())
    path = tmp_path / "fuzz.paft"
    outcomes = {"ok": 0, "error": 0}
    for case in range(10_000):
        if case % 2 == 0:
            size = int(rng.integers(0, 200))
            blob = rng.integers(0, 256, size, dtype=np.uint8).tobytes()
        else:
            blob = bytearray(valid)
            for _ in range(int(rng.integers(1, 8))):
                pos = int(rng.integers(0, len(blob)))
                blob[pos] = int(rng.integers(0, 256))
            if rng.random() < 0.3:
                blob = blob[: int(rng.integers(0, len(blob) + 1))]
            blob = bytes(blob)
        path.write_bytes(blob)
        try:
            read_fields(path)
            outcomes["ok"] += 1
        except FieldFileError:
            outcomes["error"] += 1
    # corrupted payload bytes may still parse; structural damage must not crash
    assert outcomes["ok"] + outcomes["error"] == 10_000


def test_scene_roundtrip(tmp_path, chain3, two_person_scene):
    path = tmp_path / "s.scene"
    write_scene(path, two_person_scene, chain3)
    back = read_scene(path, chain3)
    assert back.num_persons == 2
    for a, b in zip(two_person_scene.persons, back.persons):
        np.testing.assert_allclose(a, b, atol=5e-4)


def test_scene_roundtrip_with_missing(tmp_path, chain3):
    pts = np.array([[np.nan, np.nan], [5.25, 6.75], [7.125, 8.5]])
    scene = Scene(16, 16, [pts])
    path = tmp_path / "m.scene"
    write_scene(path, scene, chain3)
    back = read_scene(path, chain3)
    assert not back.labeled(0, 0)
    np.testing.assert_allclose(back.persons[0][1:], pts[1:], atol=5e-4)


def test_scene_upper_boundary_survives_roundtrip(tmp_path, chain3):
    # a coordinate just below the open bound must not round up past it
    pts = np.array([[15.9996, 15.9999], [1.0, 1.0], [2.0, 2.0]])
    scene = Scene(16, 16, [pts])
    path = tmp_path / "b.scene"
    write_scene(path, scene, chain3)
    back = read_scene(path, chain3)
    assert back.persons[0][0, 0] < 16.0
    assert back.persons[0][0, 1] < 16.0


def test_scene_text_format(tmp_path, chain3):
    path = tmp_path / "fmt.scene"
    scene = Scene(16, 12, [np.array([[1.0, 2.0], [3.0, 4.0], [np.nan, np.nan]])])
    write_scene(path, scene, chain3)
    lines = path.read_text().splitlines()
    assert lines[0] == "scene 16 12 1"
    assert lines[1] == "person 0"
    assert lines[2] == "head 1.000 2.000"
    assert lines[4] == "tail -"


def test_scene_reader_errors(tmp_path, chain3):
    cases = {
        "empty": "",
        "header": "picture 16 12 1\n",
        "person": "scene 16 12 1\nperson 1\nhead 1 2\nmid 3 4\ntail -\n",
        "part": "scene 16 12 1\nperson 0\nnose 1 2\nmid 3 4\ntail -\n",
        "coord": "scene 16 12 1\nperson 0\nhead 1 two\nmid 3 4\ntail -\n",
        "trailing": "scene 16 12 1\nperson 0\nhead 1 2\nmid 3 4\ntail -\nmore\n",
        "oob": "scene 16 12 1\nperson 0\nhead 99 2\nmid 3 4\ntail -\n",
        "short": "scene 16 12 1\nperson 0\nhead 1 2\n",
    }
    for name, text in cases.items():
        path = tmp_path / f"{name}.scene"
        path.write_text(text)
        with pytest.raises(SceneFormatError):
            read_scene(path, chain3)


def test_parse_roundtrip(tmp_path, chain3):
    persons = (
        PersonPose(
            (
                PartCandidate(0, 0, 1.5, 2.5, 0.9),
                PartCandidate(1, 0, 3.5, 4.5, 0.8),
                None,
            ),
            2.25,
        ),
        PersonPose(
            (
                None,
                PartCandidate(1, 1, 7.0, 8.0, 0.7),
                PartCandidate(2, 0, 9.0, 10.0, 0.6),
            ),
            1.5,
        ),
    )
    result = ParseResult(persons, 1.25)
    path = tmp_path / "p.pose"
    write_parse(path, result, chain3)
    back = read_parse(path, chain3)
    assert len(back.persons) == 2
    assert back.persons[0].score == pytest.approx(2.25, abs=5e-4)
    assert back.persons[0].parts[0].x == pytest.approx(1.5, abs=5e-4)
    assert back.persons[0].parts[2] is None
    assert back.persons[1].parts[0] is None
    # ids are reassigned densely per part in file order: person 0 took id 0
    assert back.persons[0].parts[1].id == 0
    assert back.persons[1].parts[1].id == 1
    # the per-scene stage total is not stored in the text format
    assert back.total_score == 0.0


def test_parse_file_part_count_checked(tmp_path, chain3):
    path = tmp_path / "bad.pose"
    path.write_text("person 1.000 3\nhead 1 2 0.5\nmid - - -\ntail - - -\n")
    with pytest.raises(SceneFormatError):
        read_parse(path, chain3)
