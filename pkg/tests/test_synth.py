"""Synthetic scene generation and perturbation."""

import math

import numpy as np
import pytest

from pafparse.core import ScalarGrid, Scene, VectorGrid, topology_preset
from pafparse.errors import ConfigError, SceneGenerationError
from pafparse.synth import (
    CROSSING_TOPOLOGY,
    NoiseConfig,
    SceneConfig,
    generate_crossing_scene,
    generate_scene,
    perturb,
    template_for,
)


def test_scene_config_validation():
    with pytest.raises(ConfigError):
        SceneConfig(width=0)
    with pytest.raises(ConfigError):
        SceneConfig(num_persons=0)
    with pytest.raises(ConfigError):
        SceneConfig(num_persons=(3, 2))
    with pytest.raises(ConfigError):
        SceneConfig(scale_range=(-1.0, 5.0))
    with pytest.raises(ConfigError):
        SceneConfig(occlusion_prob=1.5)


def test_generation_is_deterministic(mpii):
    config = SceneConfig(width=128, height=128, num_persons=(1, 3), seed=42)
    a = generate_scene(config, mpii)
    b = generate_scene(config, mpii)
    assert a.num_persons == b.num_persons
    for pa, pb in zip(a.persons, b.persons):
        np.testing.assert_array_equal(pa, pb)


def test_seed_changes_layout(mpii):
    base = SceneConfig(width=128, height=128, num_persons=2, seed=0)
    other = SceneConfig(width=128, height=128, num_persons=2, seed=1)
    a = generate_scene(base, mpii)
    b = generate_scene(other, mpii)
    assert not np.array_equal(a.persons[0], b.persons[0])


def test_keypoints_respect_margin(mpii):
    config = SceneConfig(width=96, height=96, num_persons=2, margin=5.0, seed=3)
    scene = generate_scene(config, mpii)
    for pts in scene.persons:
        known = pts[~np.isnan(pts[:, 0])]
        assert (known[:, 0] >= 5.0).all() and (known[:, 0] <= 91.0).all()
        assert (known[:, 1] >= 5.0).all() and (known[:, 1] <= 91.0).all()


def test_min_separation_enforced(mpii):
    config = SceneConfig(
        width=256, height=256, num_persons=4, min_separation=30.0, seed=11
    )
    scene = generate_scene(config, mpii)
    for a in range(scene.num_persons):
        for b in range(a + 1, scene.num_persons):
            pa, pb = scene.persons[a], scene.persons[b]
            d = np.hypot(
                pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1]
            )
            assert np.nanmin(d) >= 30.0


def test_impossible_packing_raises(mpii):
    config = SceneConfig(width=64, height=64, num_persons=8, min_separation=60.0, seed=0)
    with pytest.raises(SceneGenerationError):
        generate_scene(config, mpii)


def test_occlusion_drops_keypoints(mpii):
    config = SceneConfig(width=256, height=256, num_persons=3, occlusion_prob=0.4, seed=5)
    scene = generate_scene(config, mpii)
    missing = sum(
        int(not scene.labeled(k, j))
        for k in range(scene.num_persons)
        for j in range(mpii.num_parts)
    )
    assert missing > 0


def test_person_count_range(mpii):
    counts = set()
    for seed in range(12):
        config = SceneConfig(width=160, height=160, num_persons=(1, 3), seed=seed)
        counts.add(generate_scene(config, mpii).num_persons)
    assert counts <= {1, 2, 3}
    assert len(counts) > 1


def test_template_matches_topology():
    for name in ("mpii14", "coco18"):
        topo = topology_preset(name)
        template = template_for(topo)
        assert template.shape == (topo.num_parts, 2)
        assert np.isfinite(template).all()


def test_template_fallback_for_custom_tree(chain3):
    template = template_for(chain3)
    assert template.shape == (3, 2)
    # distinct positions
    assert len({tuple(row) for row in template}) == 3


def test_scales_reflected_in_torso_length(mpii):
    config = SceneConfig(
        width=256, height=256, num_persons=1, scale_range=(30.0, 30.0),
        rotation_range=0.0, jitter=0.0, seed=2,
    )
    scene = generate_scene(config, mpii)
    neck = scene.keypoint(0, mpii.part_index("neck"))
    head = scene.keypoint(0, mpii.part_index("head_top"))
    # template places head_top 0.45 torso units above the neck
    d = math.hypot(head[0] - neck[0], head[1] - neck[1])
    assert d == pytest.approx(0.45 * 30.0, rel=0.01)


def test_perturb_deterministic():
    maps = [ScalarGrid(32, 32, np.random.default_rng(1).random((32, 32)))]
    fields = [VectorGrid(32, 32)]
    noise = NoiseConfig(map_noise_std=0.05, field_noise_std=0.05, seed=9)
    a = perturb(maps, fields, noise)
    b = perturb(maps, fields, noise)
    np.testing.assert_array_equal(a.maps[0].values, b.maps[0].values)
    np.testing.assert_array_equal(a.fields[0].x, b.fields[0].x)


def test_perturb_leaves_input_alone():
    values = np.zeros((16, 16))
    maps = [ScalarGrid(16, 16, values)]
    noise = NoiseConfig(map_noise_std=0.1, seed=1)
    perturb(maps, [], noise)
    assert not values.any()


def test_perturb_clips_maps_to_unit_range():
    maps = [ScalarGrid(16, 16, np.ones((16, 16)))]
    noise = NoiseConfig(map_noise_std=0.5, seed=2)
    out = perturb(maps, [], noise)
    assert out.maps[0].values.max() <= 1.0
    assert out.maps[0].values.min() >= 0.0


def test_perturb_injects_false_peaks():
    maps = [ScalarGrid(64, 64)]
    noise = NoiseConfig(false_peak_rate=6.0, false_peak_sigma=2.0, seed=3)
    out = perturb(maps, [], noise)
    assert len(out.injected) > 0
    assert out.maps[0].values.max() > 0.25
    for peak in out.injected:
        assert peak.channel == 0
        assert 0.3 <= peak.amplitude <= 0.7


def test_perturb_field_noise_unclamped():
    fields = [VectorGrid(16, 16, np.ones((16, 16)), np.zeros((16, 16)))]
    noise = NoiseConfig(field_noise_std=0.3, seed=4)
    out = perturb([], fields, noise)
    assert out.fields[0].x.max() > 1.0


def test_noise_config_validation():
    with pytest.raises(ConfigError):
        NoiseConfig(map_noise_std=-0.1)
    with pytest.raises(ConfigError):
        NoiseConfig(false_peak_rate=-1.0)
    with pytest.raises(ConfigError):
        NoiseConfig(false_peak_truncation=1.0)


def test_crossing_scene_geometry():
    for seed in range(25):
        scene = generate_crossing_scene(seed)
        assert scene.num_persons == 2
        assert scene.num_parts == 2
        a0, a1 = scene.keypoint(0, 0), scene.keypoint(0, 1)
        b0, b1 = scene.keypoint(1, 0), scene.keypoint(1, 1)
        # upper endpoints close together, lower endpoints far apart
        top_gap = math.hypot(a0[0] - b0[0], a0[1] - b0[1])
        bottom_gap = math.hypot(a1[0] - b1[0], a1[1] - b1[1])
        assert top_gap <= 10.5
        assert bottom_gap > top_gap
        # limbs slant to opposite sides
        slant_a = a1[0] - a0[0]
        slant_b = b1[0] - b0[0]
        assert slant_a * slant_b < 0


def test_crossing_topology_shape():
    assert CROSSING_TOPOLOGY.num_parts == 2
    assert CROSSING_TOPOLOGY.num_limbs == 1
