"""Shotgun assembly of sparse random graphs from rooted neighborhoods.

The package covers the full pipeline: sampling sparse random graphs,
extracting and canonizing bounded-depth rooted neighborhoods, estimating
the tree-pair isomorphism quantities that set the assembly threshold,
searching for blocking configurations that certify non-identifiability,
reconstructing a graph from its neighborhood profile, and the reduced
two-source BFS used to control neighborhood dependencies.
"""

from .admissibility import (
    AuxTree,
    LabeledTree,
    ReducedBfsTrace,
    StrongAdmissibilityReport,
    XiLambdaStats,
    build_aux_tree,
    check_admissibility,
    check_strong_admissibility,
    prune_grafts,
    reduced_bfs,
    strong_report_to_json,
    strongly_admissible,
    xi_lambda_stats,
    xi_survey,
)
from .blocking import (
    BlockingCertificate,
    CertificateReport,
    certificate_from_json,
    certificate_to_json,
    cut_attach,
    find_blocking,
    report_to_json,
    verify_certificate,
)
from .errors import (
    ComplexityExceeded,
    InconsistentAdjacency,
    InvalidGamma,
    MatchFailure,
    SearchBudgetExceeded,
    ShotgunError,
)
from .estimators import (
    ComponentFrequencies,
    DecayRow,
    DecayTable,
    MCEstimate,
    SeriesEstimate,
    assembly_threshold,
    component_class_frequencies,
    decay_diagnostics,
    decay_table_to_csv,
    decay_table_to_json,
    extinction_probability,
    iso_decay_rate,
    iso_mc,
    iso_series,
    small_iso_mc,
    spine_event_mc,
    spine_event_profile,
    surviving_iso_mc,
    surviving_iso_profile,
    tree_catalog,
    tree_class_probability,
    truncated_iso_mc,
)
from .graphs import (
    Graph,
    SubgraphPiece,
    bridges,
    bridging_trees_and_blocks,
    complexity,
    component,
    components,
    generate_er,
    graph_from_json,
    graph_profile,
    graph_to_json,
    has_two_arms,
    is_degenerate,
    neighborhood,
    read_edge_list,
    write_edge_list,
)
from .pgw import GWParams, GWSample, poisson_pmf, sample_tree
from .reconstruct import (
    BadComponentRecord,
    NeighborhoodProfile,
    ReconstructionResult,
    build_profile,
    classify_good,
    extract_bad_components,
    label_depth,
    preprocess_degenerate,
    profile_from_bytes,
    profile_to_bytes,
    reconstruct,
    result_to_json,
    verify_reconstruction,
)
from .rooted import (
    RootedGraph,
    RootedTree,
    canon_rooted_graph,
    canon_tree,
    canon_unrooted,
    height,
    iso_depth,
    isomorphic_to_depth,
    level_count,
    profile,
    profile_from_json,
    profile_to_json,
    restrict,
    rooted_graph_to_tree,
    spine_event,
    tree_to_rooted_graph,
)

__version__ = "0.1.0"
