"""Rendering oracles: brute per-pixel reference implementations."""

import math

import numpy as np
import pytest

from pafparse.core import MaskGrid, ScalarGrid, Scene, VectorGrid
from pafparse.errors import ConfigError, DimensionMismatchError, MaskRegionError
from pafparse.groundtruth import (
    RenderParams,
    build_mask,
    render_all,
    render_confidence,
    render_midpoints,
    render_paf,
    stage_loss,
)


def brute_confidence(scene, part, params):
    """Per-pixel max over truncated Gaussians, straight from the definition."""
    out = np.zeros((scene.height, scene.width))
    cutoff = params.truncation_radius * params.sigma
    for y in range(scene.height):
        for x in range(scene.width):
            best = 0.0
            for k in range(scene.num_persons):
                point = scene.keypoint(k, part)
                if point is None:
                    continue
                d2 = (x - point[0]) ** 2 + (y - point[1]) ** 2
                if d2 <= cutoff * cutoff:
                    best = max(best, math.exp(-d2 / (params.sigma ** 2)))
            out[y, x] = best
    return out


def brute_paf(scene, topology, limb, params):
    j1, j2 = topology.limbs[limb]
    sum_x = np.zeros((scene.height, scene.width))
    sum_y = np.zeros((scene.height, scene.width))
    count = np.zeros((scene.height, scene.width))
    for k in range(scene.num_persons):
        a = scene.keypoint(k, j1)
        b = scene.keypoint(k, j2)
        if a is None or b is None:
            continue
        a, b = tuple(a), tuple(b)
        if a == b:
            continue
        dx, dy = b[0] - a[0], b[1] - a[1]
        length = math.hypot(dx, dy)
        vx, vy = dx / length, dy / length
        for y in range(scene.height):
            for x in range(scene.width):
                px, py = x - a[0], y - a[1]
                along = vx * px + vy * py
                across = -vy * px + vx * py
                if 0.0 <= along <= length and abs(across) <= params.sigma_l:
                    sum_x[y, x] += vx
                    sum_y[y, x] += vy
                    count[y, x] += 1
    fx = np.where(count > 0, sum_x / np.maximum(count, 1), 0.0)
    fy = np.where(count > 0, sum_y / np.maximum(count, 1), 0.0)
    return fx, fy, count


def test_render_params_validation():
    with pytest.raises(ConfigError):
        RenderParams(sigma=0.0)
    with pytest.raises(ConfigError):
        RenderParams(sigma_l=-1.0)
    with pytest.raises(ConfigError):
        RenderParams(truncation_radius=2.0)


def test_confidence_matches_brute(two_person_scene):
    params = RenderParams(sigma=3.0, sigma_l=2.0, truncation_radius=3.0)
    for part in range(3):
        grid = render_confidence(two_person_scene, part, params)
        np.testing.assert_allclose(
            grid.values, brute_confidence(two_person_scene, part, params), atol=1e-12
        )


def test_confidence_peak_is_one(two_person_scene):
    params = RenderParams(sigma=3.0)
    grid = render_confidence(two_person_scene, 0, params)
    assert grid.at(20, 10) == pytest.approx(1.0)


def test_confidence_truncates():
    scene = Scene(41, 5, [np.array([[2.0, 2.0], [38.0, 2.0], [20.0, 2.0]])])
    params = RenderParams(sigma=2.0, truncation_radius=3.0)
    grid = render_confidence(scene, 0, params)
    # beyond 6 px from the only peak the map is exactly zero
    assert grid.at(9, 2) == 0.0
    assert grid.at(8, 2) > 0.0


def test_confidence_overlap_takes_max_not_sum():
    pts_a = np.array([[10.0, 8.0], [1.0, 1.0], [2.0, 1.0]])
    pts_b = np.array([[14.0, 8.0], [1.0, 3.0], [2.0, 3.0]])
    scene = Scene(24, 16, [pts_a, pts_b])
    params = RenderParams(sigma=3.0)
    grid = render_confidence(scene, 0, params)
    expected = math.exp(-4.0 / 9.0)
    assert grid.at(12, 8) == pytest.approx(expected)


def test_paf_matches_brute(two_person_scene, chain3):
    params = RenderParams(sigma=3.0, sigma_l=3.0, truncation_radius=3.0)
    for limb in range(chain3.num_limbs):
        field = render_paf(two_person_scene, chain3, limb, params)
        fx, fy, _ = brute_paf(two_person_scene, chain3, limb, params)
        np.testing.assert_allclose(field.x, fx, atol=1e-12)
        np.testing.assert_allclose(field.y, fy, atol=1e-12)


def test_paf_unit_vector_inside_band(chain3):
    scene = Scene(32, 32, [np.array([[8.0, 16.0], [24.0, 16.0], [24.0, 28.0]])])
    field = render_paf(scene, chain3, 0, RenderParams(sigma_l=2.0))
    vx, vy = field.at(16, 16)
    assert (vx, vy) == pytest.approx((1.0, 0.0))
    assert math.hypot(*field.at(12, 17)) == pytest.approx(1.0)


def test_paf_overlap_averages(chain3):
    # two persons sharing the same horizontal band, opposite directions
    a = np.array([[4.0, 10.0], [27.0, 10.0], [27.0, 20.0]])
    b = np.array([[27.0, 11.0], [4.0, 11.0], [4.0, 20.0]])
    scene = Scene(32, 32, [a, b])
    field = render_paf(scene, chain3, 0, RenderParams(sigma_l=3.0))
    vx, vy = field.at(15, 10)
    # (+1, 0) and (-1, 0) average to zero
    assert (vx, vy) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_paf_average_uses_contributor_count(chain3):
    # parallel limbs with overlapping bands: averaging same directions keeps unit length
    scene = Scene(
        32,
        32,
        [
            np.array([[4.0, 10.0], [27.0, 10.0], [27.0, 20.0]]),
            np.array([[4.0, 12.0], [27.0, 12.0], [27.0, 24.0]]),
        ],
    )
    fx, fy, count = brute_paf(scene, chain3, 0, RenderParams(sigma_l=3.0))
    overlap = count == 2
    assert overlap.any()
    np.testing.assert_allclose(fx[overlap], 1.0, atol=1e-12)
    field = render_paf(scene, chain3, 0, RenderParams(sigma_l=3.0))
    np.testing.assert_allclose(field.x, fx, atol=1e-12)


def test_paf_skips_missing_and_reports(chain3, caplog):
    pts = np.array([[np.nan, np.nan], [10.0, 10.0], [20.0, 10.0]])
    scene = Scene(32, 32, [pts])
    field = render_paf(scene, chain3, 0, RenderParams())
    assert not field.x.any()


def test_midpoint_maps(chain3):
    scene = Scene(32, 32, [np.array([[8.0, 16.0], [24.0, 16.0], [24.0, 28.0]])])
    params = RenderParams(sigma=2.0, truncation_radius=3.0)
    maps = render_midpoints(scene, chain3, 0, params)
    assert len(maps) == 1
    assert maps[0].at(16, 16) == pytest.approx(1.0)
    two = render_midpoints(scene, chain3, 0, params, fractions=(1 / 3, 2 / 3))
    assert len(two) == 2
    # peaks at one third and two thirds along the segment
    x_third = 8.0 + 16.0 / 3.0
    assert two[0].values[16].argmax() == round(x_third)


def test_midpoint_fraction_bounds(chain3, two_person_scene):
    with pytest.raises(ConfigError):
        render_midpoints(two_person_scene, chain3, 0, RenderParams(), fractions=(0.0,))


def test_render_all_shapes(two_person_scene, chain3):
    maps, fields = render_all(two_person_scene, chain3, RenderParams(sigma=3.0))
    assert len(maps) == 3
    assert len(fields) == 2
    assert maps[0].values.shape == (64, 64)


def test_render_all_threads_identical(two_person_scene, chain3):
    params = RenderParams(sigma=3.0)
    maps1, fields1 = render_all(two_person_scene, chain3, params, threads=1)
    maps4, fields4 = render_all(two_person_scene, chain3, params, threads=4)
    for a, b in zip(maps1, maps4):
        np.testing.assert_array_equal(a.values, b.values)
    for a, b in zip(fields1, fields4):
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)


def test_build_mask():
    scene = Scene(16, 16, [np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])])
    mask = build_mask(scene, [(2, 3, 5, 7)])
    assert mask.values[2, 1] == 1
    assert mask.values[3, 2] == 0
    assert mask.values[6, 4] == 0
    assert mask.values[7, 5] == 1  # half open: x1, y1 excluded
    with pytest.raises(MaskRegionError):
        build_mask(scene, [(0, 0, 17, 4)])
    # empty half-open region is a no-op, not an error
    empty = build_mask(scene, [(5, 5, 5, 9)])
    assert empty.values.all()


def test_stage_loss_zero_iff_equal_exhaustive():
    """On every 8x8 binary pattern pair: loss is zero exactly on agreement."""
    rng = np.random.default_rng(5)
    mask = MaskGrid(8, 8)
    for _ in range(40):
        gt = rng.random((8, 8))
        pred = gt.copy()
        gt_map = [ScalarGrid(8, 8, gt)]
        gt_field = [VectorGrid(8, 8, gt, gt)]
        report = stage_loss(
            [ScalarGrid(8, 8, pred)],
            [VectorGrid(8, 8, pred.copy(), pred.copy())],
            gt_map,
            gt_field,
            mask,
        )
        assert report.total == 0.0
        bump = pred.copy()
        y, x = rng.integers(0, 8), rng.integers(0, 8)
        bump[y, x] += 0.5
        report = stage_loss([ScalarGrid(8, 8, bump)], [], gt_map, [], mask)
        assert report.confidence_loss == pytest.approx(0.25)


def test_stage_loss_mask_excludes_exactly():
    base = np.zeros((8, 8))
    off = base.copy()
    off[3, 4] = 2.0
    mask_values = np.ones((8, 8), dtype=np.uint8)
    mask_values[3, 4] = 0
    masked = MaskGrid(8, 8, mask_values)
    report = stage_loss(
        [ScalarGrid(8, 8, off)], [], [ScalarGrid(8, 8, base)], [], masked
    )
    assert report.total == 0.0
    # neighbouring pixel still counts
    off[3, 5] = 1.0
    report = stage_loss(
        [ScalarGrid(8, 8, off)], [], [ScalarGrid(8, 8, base)], [], masked
    )
    assert report.confidence_loss == pytest.approx(1.0)


def test_stage_loss_dimension_checks():
    mask = MaskGrid(8, 8)
    with pytest.raises(DimensionMismatchError):
        stage_loss([ScalarGrid(8, 8)], [], [], [], mask)
    with pytest.raises(DimensionMismatchError):
        stage_loss([ScalarGrid(4, 4)], [], [ScalarGrid(8, 8)], [], mask)


def test_render_all_part_count_mismatch(two_person_scene, mpii):
    with pytest.raises(DimensionMismatchError):
        render_all(two_person_scene, mpii, RenderParams())
