"""linktomo: identify additive link metrics from monitor-to-monitor paths.

The pipeline extends a monitored network with virtual nodes, checks
3-vertex-connectivity, builds a nonseparating ear decomposition and three
independent spanning trees, and constructs exactly one linearly independent
measurement path per link.  Counting theorems about the construction are
verified mechanically on every instance.
"""

from .errors import (
    DecompositionFailed,
    DuplicateLink,
    GenerationExhausted,
    GraphError,
    IdentityViolation,
    InconsistentDerivation,
    InvariantViolation,
    LinktomoError,
    MissingMetric,
    NoEligibleParent,
    NoEmbeddingPath,
    NoNonCutvertexMonitor,
    NonPathResidue,
    NonSimpleUnion,
    NotIdentifiable,
    SelfLoop,
    SingularMatrix,
    UnknownEndpoint,
)
from .graph import (
    ExtendedGraph,
    Graph,
    build_extended_graph,
    build_graph,
    find_non_cutvertex_monitor,
    graph_from_dict,
    graph_to_dict,
    load_graph_json,
    save_graph_json,
    vertex_connectivity_at_least,
)
from .ears import EarDecomposition, StNumbering, ear_decompose, st_number, validate_ears, validate_st
from .trees import TreeSet, build_trees, root_path, verify_independence
from .paths import MeasurementPath, PathSet, Pipeline, build_pipeline, construct_all, non_tree_link_path, segment, tree_link_paths
from .solver import dense_solve, identify_all, non_tree_metrics, segment_metrics, simulate_measurements, structured_solve, tree_link_metrics
from .harness import CountingReport, build_cycles, counting_report, independent_filter, reduce_to_Y, run_harness, verify_lemma1
from .evaluation import EvaluationRecord, GeneratorSpec, generate, place_monitors, run_campaign

__version__ = "0.1.0"
