"""Timing harness for the parsing stages across person counts and backends.

Scenes are laid out at constant person density on a canvas that grows with
the person count, at the coarse resolution parsing realistically runs at.
Only the parsing stages are timed (detection, scoring, matching, assembly);
producing the input maps is the upstream predictor's job, which is why every
report row carries an explicit placeholder for that cost instead of a number.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from . import kernels
from .assembly import SOLVERS, ParseParams, assemble
from .association import IntegralParams, score_connections
from .core import Topology
from .detection import detect_all
from .errors import ConfigError
from .groundtruth import RenderParams, render_all
from .synth import SceneConfig, generate_scene

MIN_TRIALS = 5

# Upstream map-prediction cost is outside this package; the column keeps the
# omission visible instead of implying parse time is the whole story.
CNN_PLACEHOLDER = "n/a"


@dataclass(frozen=True)
class BenchRow:
    """Median stage timings (milliseconds) for one person count."""

    backend: str
    num_persons: int
    detect_ms: float
    score_ms: float
    match_ms: float
    assemble_ms: float
    total_ms: float
    cnn_ms: str = CNN_PLACEHOLDER


@dataclass
class BenchReport:
    """All rows plus the fitted log-log growth exponent per backend."""

    rows: list[BenchRow]
    exponents: dict[str, float]
    trials: int
    person_counts: list[int] = field(default_factory=list)


def bench_scene_config(num_persons: int, seed: int) -> SceneConfig:
    """Constant-density layout at coarse parse resolution."""
    side = int(40.0 * math.sqrt(max(num_persons, 1))) + 16
    return SceneConfig(
        width=side,
        height=side,
        num_persons=num_persons,
        scale_range=(10.0, 14.0),
        min_separation=10.0,
        margin=3.0,
        seed=seed,
    )


def bench_render_params() -> RenderParams:
    return RenderParams(sigma=2.5, sigma_l=2.0, truncation_radius=3.0)


def _fit_exponent(counts: list[int], totals: list[float]) -> float:
    xs = np.log(np.asarray(counts, dtype=np.float64))
    ys = np.log(np.maximum(np.asarray(totals, dtype=np.float64), 1e-9))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def run_bench(person_counts: list[int], trials: int, topology: Topology,
              params: ParseParams = ParseParams(), seed: int = 0,
              backends: list[str] | None = None) -> BenchReport:
    """Time each parsing stage at each person count on each backend.

    ``trials`` must be at least 5; the median is reported. One untimed
    warmup parse runs per (backend, count).
    """
    if trials < MIN_TRIALS:
        raise ConfigError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if not person_counts or min(person_counts) < 1:
        raise ConfigError(f"bad person counts {person_counts!r}")
    if backends is None:
        backends = [kernels.get_backend()]
    for name in backends:
        if name not in kernels.available_backends():
            raise ConfigError(f"backend {name!r} not available")
    render_params = bench_render_params()
    integral = IntegralParams(params.num_samples, params.bilinear)
    solver = SOLVERS[params.solver]
    inputs = []
    for n in person_counts:
        scene = generate_scene(bench_scene_config(n, seed + n), topology)
        maps, fields = render_all(scene, topology, render_params)
        inputs.append((n, maps, fields))
    rows = []
    exponents = {}
    for backend in backends:
        totals = []
        with kernels.use_backend(backend):
            for n, maps, fields in inputs:
                stage_times: list[list[float]] = [[], [], [], []]
                for trial in range(trials + 1):
                    t0 = time.perf_counter()
                    candidates = detect_all(maps, params.nms_threshold, params.refine)
                    t1 = time.perf_counter()
                    scores = score_connections(fields, candidates, topology, integral)
                    t2 = time.perf_counter()
                    matches = [solver(limb_scores) for limb_scores in scores]
                    t3 = time.perf_counter()
                    assemble(candidates, matches, topology, params.min_parts, params.min_score)
                    t4 = time.perf_counter()
                    if trial == 0:
                        continue
                    for bucket, dt in zip(stage_times, (t1 - t0, t2 - t1, t3 - t2, t4 - t3)):
                        bucket.append(dt * 1000.0)
                stage_ms = [median(bucket) for bucket in stage_times]
                total = sum(stage_ms)
                totals.append(total)
                rows.append(BenchRow(backend, n, *stage_ms, total))
        exponents[backend] = (
            _fit_exponent(person_counts, totals) if len(person_counts) >= 2 else float("nan")
        )
    return BenchReport(rows, exponents, trials, list(person_counts))
