"""Assembly of per-limb matchings into whole persons, and the full parse.

Accepted connections link candidates across limbs; connected components of
that link graph are persons. On a tree topology with valid per-limb
matchings a component can never hold two candidates of the same part, so
encountering that is reported as an internal error rather than bad input.
"""

from __future__ import annotations

from dataclasses import dataclass

from .association import ConnectionScore, IntegralParams, score_connections
from .core import ScalarGrid, Topology, VectorGrid
from .detection import CandidateSet, PartCandidate, detect_all
from .errors import ConfigError, InternalConsistencyError
from .matching import Grouping, MatchResult, match_greedy, match_hungarian

SOLVERS = {
    "hungarian": match_hungarian,
    "greedy": match_greedy,
}


@dataclass(frozen=True)
class ParseParams:
    """End-to-end parsing knobs covering detection through assembly."""

    nms_threshold: float = 0.1
    refine: bool = True
    num_samples: int = 10
    bilinear: bool = True
    solver: str = "hungarian"
    min_parts: int = 3
    min_score: float = 0.2

    def __post_init__(self) -> None:
        if self.solver not in SOLVERS:
            raise ConfigError(
                f"unknown solver {self.solver!r}; choose from {sorted(SOLVERS)}"
            )
        if self.nms_threshold < 0:
            raise ConfigError(
                f"nms_threshold must be nonnegative, got {self.nms_threshold}"
            )
        if self.num_samples < 2:
            raise ConfigError(f"num_samples must be at least 2, got {self.num_samples}")
        if self.min_parts < 1:
            raise ConfigError(f"min_parts must be at least 1, got {self.min_parts}")


@dataclass
class PersonPose:
    """One assembled person: per-part candidates (None = missing) and score.

    The score sums the member candidates' confidences and the accepted
    connection scores between them.
    """

    parts: tuple[PartCandidate | None, ...]
    score: float

    @property
    def num_parts(self) -> int:
        return sum(1 for p in self.parts if p is not None)


@dataclass
class ParseResult:
    """All persons found in one scene; total_score sums every accepted
    connection score, including those of later-discarded persons."""

    persons: tuple[PersonPose, ...]
    total_score: float

    def __post_init__(self) -> None:
        self.persons = tuple(self.persons)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _filter_and_sort(persons: list[PersonPose], min_parts: int,
                     min_score: float) -> list[PersonPose]:
    kept = [
        p for p in persons
        if p.num_parts >= min_parts and p.score / p.num_parts >= min_score
    ]
    kept.sort(key=lambda p: -p.score)
    return kept


def assemble(candidates: CandidateSet, matches: list[MatchResult], topology: Topology,
             min_parts: int = 3, min_score: float = 0.2) -> ParseResult:
    """Merge per-limb matchings into persons and filter weak ones.

    A person must keep at least ``min_parts`` parts and a mean score per part
    of at least ``min_score``. ``total_score`` is accumulated before
    filtering.
    """
    if len(matches) != topology.num_limbs:
        raise ConfigError(f"{len(matches)} match results for {topology.num_limbs} limbs")
    offsets = []
    total_nodes = 0
    for group in candidates.by_part:
        offsets.append(total_nodes)
        total_nodes += len(group)

    def node(part: int, cand_id: int) -> int:
        return offsets[part] + cand_id

    uf = _UnionFind(total_nodes)
    total_score = 0.0
    for c, (j1, j2) in enumerate(topology.limbs):
        for m, n in matches[c].pairs:
            uf.union(node(j1, m), node(j2, n))
        total_score += matches[c].total

    by_root: dict[int, list[PartCandidate]] = {}
    for part, group in enumerate(candidates.by_part):
        for cand in group:
            by_root.setdefault(uf.find(node(part, cand.id)), []).append(cand)
    score_by_root: dict[int, float] = {}
    for c, (j1, j2) in enumerate(topology.limbs):
        for (m, _n), weight in zip(matches[c].pairs, matches[c].pair_scores):
            root = uf.find(node(j1, m))
            score_by_root[root] = score_by_root.get(root, 0.0) + weight

    persons = []
    for root in sorted(by_root):
        members = by_root[root]
        parts: list[PartCandidate | None] = [None] * topology.num_parts
        score = score_by_root.get(root, 0.0)
        for cand in members:
            if parts[cand.part] is not None:
                raise InternalConsistencyError(
                    f"two candidates of part {cand.part} in one person"
                )
            parts[cand.part] = cand
            score += cand.score
        persons.append(PersonPose(tuple(parts), score))
    return ParseResult(_filter_and_sort(persons, min_parts, min_score), total_score)


def parse(maps: list[ScalarGrid], fields: list[VectorGrid], topology: Topology,
          params: ParseParams = ParseParams()) -> ParseResult:
    """Run the whole pipeline: detect, score, match per limb, assemble."""
    candidates = detect_all(maps, params.nms_threshold, params.refine)
    scores = score_connections(
        fields, candidates, topology, IntegralParams(params.num_samples, params.bilinear)
    )
    solver = SOLVERS[params.solver]
    matches = [solver(limb_scores) for limb_scores in scores]
    return assemble(candidates, matches, topology, params.min_parts, params.min_score)


def result_from_grouping(grouping: Grouping, candidates: CandidateSet,
                         scores: list[list[ConnectionScore]], topology: Topology,
                         min_parts: int = 3, min_score: float = 0.2) -> ParseResult:
    """Convert a full-graph grouping into a ParseResult for evaluation.

    Person scores mirror ``assemble``: candidate confidences plus all
    within-group pair scores; total_score sums the within-group pair scores.
    """
    lookup: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
    for c, (j1, j2) in enumerate(topology.limbs):
        lookup[(j1, j2)] = {(s.m, s.n): s.score for s in scores[c]}
    by_id = {}
    for group in candidates.by_part:
        for cand in group:
            by_id[(cand.part, cand.id)] = cand
    persons = []
    total_score = 0.0
    for group in grouping.groups:
        parts: list[PartCandidate | None] = [None] * topology.num_parts
        score = 0.0
        members = sorted(group.items())
        for part, cand_id in members:
            cand = by_id[(part, cand_id)]
            parts[part] = cand
            score += cand.score
        for i, (p1, id1) in enumerate(members):
            for p2, id2 in members[i + 1 :]:
                key = (p1, p2) if (p1, p2) in lookup else (p2, p1)
                ids = (id1, id2) if key == (p1, p2) else (id2, id1)
                w = lookup[key].get(ids)
                if w is not None and w > float("-inf"):
                    score += w
                    total_score += w
        persons.append(PersonPose(tuple(parts), score))
    return ParseResult(_filter_and_sort(persons, min_parts, min_score), total_score)
