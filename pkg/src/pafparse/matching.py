"""Bipartite matching of candidate pairs per limb, plus exhaustive solvers.

Per limb, candidate pairs form a weighted bipartite graph. A valid matching
uses each candidate at most once; only pairs with strictly positive score are
worth keeping, so every solver drops non-positive pairs. ``match_hungarian``
is optimal per limb, ``match_greedy`` is the fast relaxation, and
``match_bruteforce`` enumerates everything as an oracle for small instances.
``solve_full_graph`` leaves the per-limb decomposition entirely and searches
over global part groupings; it is exponential and exists only as a quality
reference for tiny scenes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .association import ConnectionScore
from .core import FULL_GRAPH, Topology
from .detection import CandidateSet
from .errors import InstanceTooLargeError, TopologyError

BRUTEFORCE_MAX_PAIRS = 64
FULL_GRAPH_MAX_CANDIDATES = 12
FULL_GRAPH_MAX_PER_PART = 4


@dataclass(frozen=True)
class MatchResult:
    """Accepted pairs for one limb, sorted by (m, n), plus their scores.

    ``pair_scores`` parallels ``pairs``; ``total`` is their sum.
    """

    limb: int
    pairs: tuple[tuple[int, int], ...]
    pair_scores: tuple[float, ...]
    total: float


def _weight_table(scores: list[ConnectionScore]):
    """Validate one limb's scores and return (limb, weights, m_size, n_size)."""
    if not scores:
        return -1, {}, 0, 0
    limb = scores[0].limb
    weights: dict[tuple[int, int], float] = {}
    m_size = 0
    n_size = 0
    for s in scores:
        if s.limb != limb:
            raise ValueError(f"mixed limbs in one score list: {limb} and {s.limb}")
        if s.m < 0 or s.n < 0:
            raise ValueError(f"negative candidate id in pair ({s.m}, {s.n})")
        key = (s.m, s.n)
        if key in weights:
            raise ValueError(f"duplicate pair {key} for limb {limb}")
        weights[key] = s.score
        m_size = max(m_size, s.m + 1)
        n_size = max(n_size, s.n + 1)
    return limb, weights, m_size, n_size


def _finish(limb: int, weights, chosen) -> MatchResult:
    pairs = tuple(sorted(chosen))
    pair_scores = tuple(weights[pair] for pair in pairs)
    total = 0.0
    for w in pair_scores:
        total += w
    return MatchResult(limb, pairs, pair_scores, total)


def match_hungarian(scores: list[ConnectionScore]) -> MatchResult:
    """Maximum-total matching keeping only positive-score pairs.

    Solved as a rectangular assignment problem on scores clamped up to zero:
    clamping never changes the optimal total because any matching that uses a
    non-positive pair is no better than the same matching without it.
    """
    limb, weights, m_size, n_size = _weight_table(scores)
    if not weights:
        return MatchResult(limb, (), (), 0.0)
    matrix = np.full((m_size, n_size), 0.0)
    for (m, n), w in weights.items():
        if w > 0.0:
            matrix[m, n] = w
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    chosen = [
        (int(m), int(n))
        for m, n in zip(rows, cols)
        if weights.get((int(m), int(n)), 0.0) > 0.0
    ]
    return _finish(limb, weights, chosen)


def match_greedy(scores: list[ConnectionScore]) -> MatchResult:
    """Accept pairs best-first while both candidates are still free.

    Candidates for acceptance are ordered by descending score, then by m,
    then by n, so the result is deterministic under ties.
    """
    limb, weights, _, _ = _weight_table(scores)
    positive = [item for item in weights.items() if item[1] > 0.0]
    order = sorted(positive, key=lambda item: (-item[1], item[0]))
    used_m = set()
    used_n = set()
    chosen = []
    for (m, n), _ in order:
        if m in used_m or n in used_n:
            continue
        used_m.add(m)
        used_n.add(n)
        chosen.append((m, n))
    return _finish(limb, weights, chosen)


def match_bruteforce(scores: list[ConnectionScore]) -> MatchResult:
    """Enumerate all matchings; the oracle the other solvers are checked against.

    Ties on total break toward the lexicographically smallest pair tuple.
    Instances over 64 candidate pairs are refused.
    """
    limb, weights, m_size, n_size = _weight_table(scores)
    if m_size * n_size > BRUTEFORCE_MAX_PAIRS:
        raise InstanceTooLargeError(
            f"{m_size}x{n_size} exceeds {BRUTEFORCE_MAX_PAIRS} pairs"
        )
    by_m: list[list[tuple[int, float]]] = [[] for _ in range(m_size)]
    for (m, n), w in sorted(weights.items()):
        if w > 0.0:
            by_m[m].append((n, w))

    best_total = 0.0
    best_pairs: tuple[tuple[int, int], ...] = ()

    def descend(m: int, used_n: set, chosen: list, total: float) -> None:
        nonlocal best_total, best_pairs
        if m == m_size:
            pairs = tuple(chosen)
            if total > best_total or (total == best_total and pairs < best_pairs):
                best_total = total
                best_pairs = pairs
            return
        descend(m + 1, used_n, chosen, total)
        for n, w in by_m[m]:
            if n not in used_n:
                used_n.add(n)
                chosen.append((m, n))
                descend(m + 1, used_n, chosen, total + w)
                chosen.pop()
                used_n.remove(n)

    descend(0, set(), [], 0.0)
    # Recompute the sum in canonical order so equal pair sets sum identically
    # across solvers.
    return _finish(limb, weights, list(best_pairs))


@dataclass(frozen=True)
class Grouping:
    """A partition of candidates into person groups with its total score.

    Each group maps part index to candidate id; the total is the sum of
    pair scores over every within-group part pair.
    """

    groups: tuple[dict, ...]
    total: float


def solve_full_graph(candidates: CandidateSet, scores: list[list[ConnectionScore]],
                     topology: Topology) -> Grouping:
    """Exhaustively search all candidate partitions on a full graph.

    Maximizes the sum of within-group pair scores over all groupings with at
    most one candidate per part per group. Ties break toward more groups
    (zero-score evidence never merges people), then toward the smallest
    canonical encoding. Bounded to 12 candidates and 4 per part.
    """
    if topology.kind != FULL_GRAPH:
        raise TopologyError("solve_full_graph needs a full-graph topology")
    if len(scores) != topology.num_limbs:
        raise ValueError(f"{len(scores)} score lists for {topology.num_limbs} limbs")
    total_candidates = candidates.total
    if total_candidates > FULL_GRAPH_MAX_CANDIDATES:
        raise InstanceTooLargeError(
            f"{total_candidates} candidates exceed {FULL_GRAPH_MAX_CANDIDATES}"
        )
    for group in candidates.by_part:
        if len(group) > FULL_GRAPH_MAX_PER_PART:
            raise InstanceTooLargeError(
                f"part {group[0].part} has {len(group)} candidates, "
                f"limit {FULL_GRAPH_MAX_PER_PART}"
            )
    table: dict[tuple[int, int, int, int], float] = {}
    for c, (j1, j2) in enumerate(topology.limbs):
        for s in scores[c]:
            table[(j1, s.m, j2, s.n)] = s.score
            table[(j2, s.n, j1, s.m)] = s.score
    items = [
        (part, cand.id)
        for part in range(candidates.num_parts)
        for cand in candidates.by_part[part]
    ]

    best_total = float("-inf")
    best_key = None
    best_groups: tuple[dict, ...] = ()

    def encode(groups: list[dict]):
        return tuple(sorted(tuple(sorted(g.items())) for g in groups))

    def descend(i: int, groups: list[dict], total: float) -> None:
        nonlocal best_total, best_key, best_groups
        if i == len(items):
            key = (-len(groups), encode(groups))
            if total > best_total or (
                total == best_total and (best_key is None or key < best_key)
            ):
                best_total = total
                best_key = key
                best_groups = tuple(dict(g) for g in groups)
            return
        part, cand_id = items[i]
        for g in groups:
            if part in g:
                continue
            delta = 0.0
            feasible = True
            for other_part, other_id in g.items():
                w = table.get((other_part, other_id, part, cand_id))
                if w is None:
                    feasible = False
                    break
                delta += w
            if feasible:
                g[part] = cand_id
                descend(i + 1, groups, total + delta)
                del g[part]
        groups.append({part: cand_id})
        descend(i + 1, groups, total)
        groups.pop()

    descend(0, [], 0.0)
    return Grouping(best_groups, best_total)
