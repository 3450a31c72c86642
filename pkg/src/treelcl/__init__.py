"""Locality classification of LCL problems on regular trees.

Rooted and unrooted problems are classified by their depth, computed from
trimmed label sets and path-flexible components of an automaton; rooted
problems of infinite depth are split further by a coprime certificate
search. Lower-bound instances, adversarial schedules and an online-LOCAL
harness let algorithms be stress-tested empirically.
"""

from .automaton import (
    Automaton,
    FlexComponent,
    analyze_components,
    build_automaton_rooted,
    build_automaton_unrooted,
    component_period,
    flex_scc_rooted,
    flex_scc_unrooted,
    strongly_connected_components,
)
from .certificate import (
    BudgetExceeded,
    Certificate,
    CertificateNotFound,
    certificate_from_dict,
    search_certificate,
    verify_certificate,
)
from .depth import (
    INF,
    ClassReport,
    DepthResult,
    InconsistentClassification,
    classify,
    depth,
    extendible_chain,
    pruning_constant,
    trim_rooted,
    trim_rooted_chain,
    trim_unrooted,
)
from .harness import (
    Algorithm,
    FailureEstimate,
    FailureSetup,
    FixedCommitment,
    OfflineOracle,
    ParityVictim,
    RunTrace,
    UniformRandom,
    View,
    assert_view_isomorphism,
    estimate_failure,
    make_algorithm,
    reveal_run,
)
from .instances import (
    ChunkInstance,
    NodeSubsets,
    Schedule,
    build_chunk_instance,
    build_lb_rooted,
    build_lb_unrooted,
    chunk_node_count,
    choice_count,
    enumerate_choices,
    lb_rooted_size,
    lb_unrooted_size,
    node_subsets,
    sample_schedule_rooted,
    sample_schedule_unrooted,
)
from .problem import (
    ProblemError,
    ProblemSyntaxError,
    RootedProblem,
    UnrootedProblem,
    load_problem,
    parse_problem,
    problem_from_dict,
    problem_to_dict,
    restrict_rooted,
    restrict_unrooted,
    serialize_problem,
)
from .solve import Verdict, check_rooted, check_unrooted, feasible_root_labels, solve_offline
from .trees import RulingSet, Tree, complete_tree, path_ruling_set, peel_rounds, skeleton_tree

__version__ = "0.1.0"
