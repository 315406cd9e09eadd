"""Fault-tolerant 2x2 block matrix multiplication.

Core pipeline: enumerate recovery relations between fast-multiplication
sub-computations, extend schemes with parity products, quantify
reconstruction-failure probability exactly and by simulation, and execute
fault-injected master/worker multiplications end to end.
"""

__version__ = "0.1.0"

from .bilinear import (
    BilinearTerm,
    ExpansionVector,
    assemble_C,
    combine_expansions,
    evaluate_term,
    expand,
    naive_block_multiply,
    partition_blocks,
    strassen_terms,
    winograd_terms,
)
from .relations import (
    Relation,
    RelationSet,
    is_rank_one,
    known_relation_catalog,
    search_lp,
    verify_relation,
)
from .schemes import (
    DEFAULT_COMPARISON,
    SCHEME_KINDS,
    FailurePattern,
    RecoveryPlan,
    Scheme,
    attach_relations,
    build_scheme,
    decodable_pattern_census,
    is_decodable,
    linear_decode,
    peel,
    peel_decode,
    replay_plan,
)
from .reliability import (
    ReliabilityProfile,
    curve,
    default_grid,
    fc_replication_closed_form,
    p_fail_monte_carlo,
    p_fail_theoretical,
    profile_for,
)
from .simulate import BatchResult, RunReport, Task, batch, encode_tasks, run

__all__ = [
    "__version__",
    "BilinearTerm", "ExpansionVector", "assemble_C", "combine_expansions",
    "evaluate_term", "expand", "naive_block_multiply", "partition_blocks",
    "strassen_terms", "winograd_terms",
    "Relation", "RelationSet", "is_rank_one", "known_relation_catalog",
    "search_lp", "verify_relation",
    "DEFAULT_COMPARISON", "SCHEME_KINDS", "FailurePattern", "RecoveryPlan",
    "Scheme", "attach_relations", "build_scheme", "decodable_pattern_census",
    "is_decodable", "linear_decode", "peel", "peel_decode", "replay_plan",
    "ReliabilityProfile", "curve", "default_grid",
    "fc_replication_closed_form", "p_fail_monte_carlo", "p_fail_theoretical",
    "profile_for",
    "BatchResult", "RunReport", "Task", "batch", "encode_tasks", "run",
]
