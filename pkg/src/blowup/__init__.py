"""Constructive embedding of bounded-degree spanning graphs into super-regular blow-ups."""

from .batch import luby_mis, parallel_phase2, run_batched
from .embedder import Embedder, EmbeddingState, RunReport, run, verify_embedding
from .errors import (
    BlowupError,
    ContractViolation,
    EmbeddingFailure,
    FormatError,
    HallFailure,
    InvariantError,
    SelectionExhausted,
    SizeLimitError,
    SweepFailure,
    UndefinedDensity,
)
from .graph import BipartitePair, Graph, VertexSet, codegree, degree_into, density
from .instances import (
    Instance,
    PatternGraph,
    Restriction,
    assemble_instance,
    cluster_graph_named,
    gen_bounded_tree_pattern,
    gen_hamiltonian_path_pattern,
    gen_matching_pattern,
    gen_power_ham_cycle_pattern,
    gen_square_ham_cycle_pattern,
    random_restrictions,
)
from .matching import CandidacyGraph, hall_audit, max_matching, sdr
from .params import ParameterCascade
from .regularity import (
    ClusterGraph,
    HostGraph,
    build_complete_blowup,
    certify_regular,
    generate_super_regular_pair,
    is_regular_exact,
    is_super_regular,
)

__version__ = "0.1.0"
