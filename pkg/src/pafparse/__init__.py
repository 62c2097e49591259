"""Multi-person pose parsing from confidence maps and part affinity fields.

The package renders ground-truth channels for synthetic scenes, detects part
candidates with non-maximum suppression, scores candidate pairs by line
integrals over vector fields, matches pairs per limb, and assembles whole
persons greedily along a kinematic tree.  Hot kernels run through a compiled
extension when it is available and a NumPy fallback otherwise.
"""

from .assembly import (
    ParseParams,
    ParseResult,
    PersonPose,
    assemble,
    parse,
    result_from_grouping,
)
from .association import (
    ConnectionScore,
    IntegralParams,
    line_integral,
    midpoint_score,
    score_connections,
    score_connections_interior,
    two_midpoint_score,
)
from .core import (
    FULL_GRAPH,
    TREE,
    LimbSegment,
    MaskGrid,
    ScalarGrid,
    Scene,
    Topology,
    VectorGrid,
    full_graph_of,
    limb_segment,
    load_topology,
    parse_topology,
    topology_preset,
)
from .detection import CandidateSet, PartCandidate, detect_all, nms_peaks
from .errors import (
    ConfigError,
    DegenerateSegmentError,
    DimensionMismatchError,
    FieldFileError,
    InstanceTooLargeError,
    InternalConsistencyError,
    MaskRegionError,
    PafparseError,
    SceneFormatError,
    SceneGenerationError,
    TopologyError,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    candidates_from_scene,
    eval_oracle_connection,
    eval_oracle_detection,
    evaluate,
)
from .fileio import read_fields, read_parse, read_scene, write_fields, write_parse, write_scene
from .groundtruth import (
    LossReport,
    RenderParams,
    build_mask,
    render_all,
    render_confidence,
    render_midpoints,
    render_paf,
    stage_loss,
)
from .matching import (
    Grouping,
    MatchResult,
    match_bruteforce,
    match_greedy,
    match_hungarian,
    solve_full_graph,
)
from .synth import (
    NoiseConfig,
    SceneConfig,
    generate_crossing_scene,
    generate_scene,
    perturb,
    template_for,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConnectionScore",
    "CandidateSet",
    "DegenerateSegmentError",
    "DimensionMismatchError",
    "EvalConfig",
    "EvalReport",
    "FieldFileError",
    "FULL_GRAPH",
    "Grouping",
    "InstanceTooLargeError",
    "InternalConsistencyError",
    "IntegralParams",
    "LimbSegment",
    "LossReport",
    "MaskGrid",
    "MaskRegionError",
    "MatchResult",
    "NoiseConfig",
    "PafparseError",
    "ParseParams",
    "ParseResult",
    "PartCandidate",
    "PersonPose",
    "RenderParams",
    "ScalarGrid",
    "Scene",
    "SceneConfig",
    "SceneFormatError",
    "SceneGenerationError",
    "Topology",
    "TopologyError",
    "TREE",
    "VectorGrid",
    "assemble",
    "build_mask",
    "candidates_from_scene",
    "detect_all",
    "eval_oracle_connection",
    "eval_oracle_detection",
    "evaluate",
    "full_graph_of",
    "generate_crossing_scene",
    "generate_scene",
    "limb_segment",
    "line_integral",
    "load_topology",
    "match_bruteforce",
    "match_greedy",
    "match_hungarian",
    "midpoint_score",
    "nms_peaks",
    "parse",
    "parse_topology",
    "perturb",
    "read_fields",
    "read_parse",
    "read_scene",
    "render_all",
    "render_confidence",
    "render_midpoints",
    "render_paf",
    "result_from_grouping",
    "score_connections",
    "score_connections_interior",
    "solve_full_graph",
    "stage_loss",
    "template_for",
    "topology_preset",
    "two_midpoint_score",
    "write_fields",
    "write_parse",
    "write_scene",
]
