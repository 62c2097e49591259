"""Evaluation: per-part average precision with distance thresholds scaled by
a per-person reference length.

A predicted keypoint counts as correct when it lies within
``pckh_fraction * reference_length`` of the matching ground-truth keypoint,
where the reference length is that person's distance between the topology's
reference parts. Predicted persons are assigned greedily, best score first,
each ground-truth person used at most once. The final number is the mean of
the per-part average precisions.

Two oracle modes isolate pipeline stages: ``eval_oracle_detection`` replaces
detected candidates with the true keypoints (measuring grouping alone), and
``eval_oracle_connection`` replaces grouping with nearest-true-person
assignment (measuring detection alone).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import SOLVERS, ParseParams, ParseResult, PersonPose, assemble
from .association import IntegralParams, score_connections
from .core import Scene, Topology, VectorGrid
from .detection import CandidateSet, PartCandidate
from .errors import ConfigError, DimensionMismatchError

DEFAULT_REFERENCE_FALLBACK_DIVISOR = 20.0


@dataclass(frozen=True)
class EvalConfig:
    """Threshold controls: reference part pair and fraction of its length."""

    pckh_fraction: float = 0.5
    reference_limb: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not (self.pckh_fraction > 0):
            raise ConfigError(f"pckh_fraction must be positive, got {self.pckh_fraction}")


@dataclass(frozen=True)
class EvalReport:
    """Per-part average precision and its mean."""

    per_part_ap: tuple[float, ...]
    mean_ap: float
    num_gt: tuple[int, ...]
    num_predictions: tuple[int, ...]


def _reference_pair(topology: Topology, config: EvalConfig) -> tuple[int, int]:
    if config.reference_limb is not None:
        return config.reference_limb
    if topology.reference_limb is not None:
        return topology.reference_limb
    return topology.limbs[0]


def _reference_lengths(scene: Scene, pair: tuple[int, int]) -> list[float]:
    """Per-person reference lengths, with fallbacks for unlabeled pairs:
    the scene median, then a canvas-derived default."""
    r1, r2 = pair
    lengths: list[float | None] = []
    for k in range(scene.num_persons):
        a = scene.keypoint(k, r1)
        b = scene.keypoint(k, r2)
        if a is None or b is None:
            lengths.append(None)
        else:
            lengths.append(float(np.hypot(*(a - b))))
    known = [v for v in lengths if v is not None and v > 0]
    default = (
        float(np.median(known))
        if known
        else (scene.width + scene.height) / DEFAULT_REFERENCE_FALLBACK_DIVISOR
    )
    return [v if v is not None and v > 0 else default for v in lengths]


def _assign_predictions(result: ParseResult, scene: Scene, thresholds: list[float],
                        topology: Topology) -> list[tuple[PersonPose, int | None]]:
    """Greedy person assignment: predictions in descending score order claim
    the unused ground-truth person with the most within-threshold parts."""
    order = sorted(result.persons, key=lambda p: -p.score)
    used: set[int] = set()
    assigned: list[tuple[PersonPose, int | None]] = []
    for person in order:
        best_gt = None
        best_hits = 0
        for k in range(scene.num_persons):
            if k in used:
                continue
            hits = 0
            for j in range(topology.num_parts):
                cand = person.parts[j]
                point = scene.keypoint(k, j)
                if cand is None or point is None:
                    continue
                if math.hypot(cand.x - point[0], cand.y - point[1]) <= thresholds[k]:
                    hits += 1
            if hits > best_hits:
                best_hits = hits
                best_gt = k
        if best_gt is not None:
            used.add(best_gt)
        assigned.append((person, best_gt))
    return assigned


def _average_precision(records: list[tuple[float, bool]], num_positive: int) -> float:
    """All-points interpolated AP from (score, is_true_positive) records."""
    if num_positive == 0:
        return 1.0 if not records else 0.0
    if not records:
        return 0.0
    records = sorted(records, key=lambda r: -r[0])
    tps = np.cumsum([1.0 if tp else 0.0 for _, tp in records])
    fps = np.cumsum([0.0 if tp else 1.0 for _, tp in records])
    recall = tps / num_positive
    precision = tps / (tps + fps)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    ap = 0.0
    prev_recall = 0.0
    for r, p in zip(recall, envelope):
        ap += (r - prev_recall) * p
        prev_recall = r
    return float(ap)


def evaluate(predictions: list[ParseResult], scenes: list[Scene], topology: Topology,
             config: EvalConfig = EvalConfig()) -> EvalReport:
    """Score predicted parses against ground-truth scenes."""
    if len(predictions) != len(scenes):
        raise DimensionMismatchError(
            f"{len(predictions)} predictions for {len(scenes)} scenes"
        )
    pair = _reference_pair(topology, config)
    num_parts = topology.num_parts
    records: list[list[tuple[float, bool]]] = [[] for _ in range(num_parts)]
    num_gt = [0] * num_parts
    for result, scene in zip(predictions, scenes):
        if scene.persons and scene.num_parts != num_parts:
            raise DimensionMismatchError(
                f"scene has {scene.num_parts} parts, topology {num_parts}"
            )
        lengths = _reference_lengths(scene, pair)
        thresholds = [config.pckh_fraction * v for v in lengths]
        for k in range(scene.num_persons):
            for j in range(num_parts):
                if scene.labeled(k, j):
                    num_gt[j] += 1
        for person, gt in _assign_predictions(result, scene, thresholds, topology):
            for j in range(num_parts):
                cand = person.parts[j]
                if cand is None:
                    continue
                correct = False
                if gt is not None:
                    point = scene.keypoint(gt, j)
                    if point is not None and math.hypot(
                        cand.x - point[0], cand.y - point[1]
                    ) <= thresholds[gt]:
                        correct = True
                records[j].append((cand.score, correct))
    per_part = tuple(_average_precision(records[j], num_gt[j]) for j in range(num_parts))
    return EvalReport(
        per_part, float(np.mean(per_part)), tuple(num_gt),
        tuple(len(r) for r in records),
    )


def candidates_from_scene(scene: Scene, topology: Topology) -> CandidateSet:
    """Perfect detections: one unit-score candidate per labeled keypoint."""
    by_part: list[list[PartCandidate]] = [[] for _ in range(topology.num_parts)]
    for j in range(topology.num_parts):
        for k in range(scene.num_persons):
            point = scene.keypoint(k, j)
            if point is not None:
                by_part[j].append(
                    PartCandidate(j, len(by_part[j]), float(point[0]), float(point[1]), 1.0)
                )
    return CandidateSet(by_part)


def eval_oracle_detection(scene: Scene, fields: list[VectorGrid], topology: Topology,
                          params: ParseParams = ParseParams()) -> ParseResult:
    """Parse with ground-truth keypoints as candidates; isolates grouping."""
    candidates = candidates_from_scene(scene, topology)
    scores = score_connections(
        fields, candidates, topology, IntegralParams(params.num_samples, params.bilinear)
    )
    solver = SOLVERS[params.solver]
    matches = [solver(limb_scores) for limb_scores in scores]
    return assemble(candidates, matches, topology, params.min_parts, params.min_score)


def eval_oracle_connection(candidates: CandidateSet, scene: Scene, topology: Topology,
                           config: EvalConfig = EvalConfig()) -> ParseResult:
    """Group detected candidates by their true person; isolates detection.

    Each candidate goes to the person of its nearest within-threshold
    ground-truth keypoint of the same part; clashes keep the
    highest-scoring candidate (ties to the closer one). Persons are not
    filtered and carry no connection scores, so total_score is zero.
    """
    pair = _reference_pair(topology, config)
    lengths = _reference_lengths(scene, pair)
    thresholds = [config.pckh_fraction * v for v in lengths]
    slots: dict[tuple[int, int], tuple[float, float, PartCandidate]] = {}
    for j in range(topology.num_parts):
        for cand in candidates.by_part[j]:
            best_k = None
            best_dist = math.inf
            for k in range(scene.num_persons):
                point = scene.keypoint(k, j)
                if point is None:
                    continue
                dist = math.hypot(cand.x - point[0], cand.y - point[1])
                if dist <= thresholds[k] and dist < best_dist:
                    best_dist = dist
                    best_k = k
            if best_k is None:
                continue
            key = (best_k, j)
            contender = (-cand.score, best_dist, cand)
            if key not in slots or contender[:2] < slots[key][:2]:
                slots[key] = contender
    persons = []
    for k in range(scene.num_persons):
        parts: list[PartCandidate | None] = [None] * topology.num_parts
        score = 0.0
        hits = 0
        for j in range(topology.num_parts):
            entry = slots.get((k, j))
            if entry is not None:
                parts[j] = entry[2]
                score += entry[2].score
                hits += 1
        if hits:
            persons.append(PersonPose(tuple(parts), score))
    persons.sort(key=lambda p: -p.score)
    return ParseResult(persons, 0.0)
