"""Aggregate real-valued terms over graphs.

Terms built from edge/equality indicators, certified connectives, and
Sum/Max/Min/Mean aggregations are evaluated exactly on concrete graphs,
and their leading-order behavior on dense G(n, p) and sparse G(n, n^-a)
random graphs is predicted symbolically.  A Monte-Carlo harness closes
the loop by testing predictions against sampled graphs.
"""

from importlib.metadata import PackageNotFoundError, version as _dist_version

try:
    __version__ = _dist_version("aggraph")
except PackageNotFoundError:  # uninstalled source tree
    __version__ = "0.1.0"

from .errors import (
    AggraphError,
    BudgetError,
    CapabilityError,
    CapacityError,
    ConnectiveClassError,
    EvaluationError,
    InputError,
    IrrationalityError,
    ParseError,
)
from .graphs import (
    ExtensionPair,
    Graph,
    ISO_VERTEX_CAP,
    RootedGraph,
    are_isomorphic_rooted,
    count_automorphisms,
    count_fixing_automorphisms,
    count_rooted_automorphisms,
    density,
    extension_counts,
    format_graph_literal,
    format_pair_literal,
    induced_subgraph,
    max_density,
    parse_graph_literal,
    parse_pair_literal,
)
from .asymval import (
    Asym,
    Pow,
    ZERO,
    asym_max,
    asym_min,
    asym_scale,
    asym_sum,
    asym_times_n,
    is_zero,
)
from .terms import (
    Agg,
    Apply,
    Const,
    Edge,
    Eq,
    LMean,
    MAX,
    MEAN,
    MIN,
    SUM,
    Term,
    all_vars,
    desugar_means,
    desugar_min,
    free_vars,
    metrics,
    print_term,
    validate,
)
from .connectives import (
    SPEC_POS,
    SPEC_ZERO,
    Connective,
    Registry,
    asym_apply,
    certified_copy,
    default_registry,
    domdiff,
    indz,
    make_user_connective,
    mono,
    poly,
    register_builtin_connectives,
    scale,
    sigmoid,
    vmax,
    vmin,
)
from .parser import parse
from .evaluate import Environment, eval_reference, eval_term
from .randgraphs import Dense, Regime, Sparse, edge_probability, sample
from .analysis import (
    Fixture,
    LipReport,
    PowerBoundReport,
    TransferReport,
    TrialSpec,
    check_concentration_transfer,
    check_power_bound,
    check_relative_lipschitz,
    fixtures,
    max_quotient,
    pair_battery,
    promote,
)
from .atypes import (
    AtomicType,
    EMPTY_TYPE,
    atomic_type,
    extension_percentages,
    in_extension,
    out_extensions,
)
from .closures import (
    ClosureType,
    ExtensionCaps,
    ExtensionTypeRecord,
    GuardReport,
    PairClass,
    RapidSequence,
    canonical_rooted,
    classify_pair,
    closure,
    closure_extension_records,
    closure_type,
    compare_density,
    count_extensions,
    ell,
    empty_closure_type,
    enumerate_closure_extension_types,
    eta,
    irrationality_guard,
    max_sparse_attach,
    mu_all,
    mu_asym,
    rapid_sequence,
    strictly_balanced,
    strictly_balanced_chain,
)
from .engine import (
    Analysis,
    PhiTable,
    analyze_dense,
    analyze_sparse,
    expected_max_extension_asym,
    expected_subgraph_asym,
    expected_subgraph_count,
)
from .harness import (
    ExperimentConfig,
    Report,
    emit_report,
    report_to_dict,
    run_concentration_experiment,
    verify_extension_concentration,
    verify_stabilization,
)

__all__ = [
    "AggraphError", "BudgetError", "CapabilityError", "CapacityError",
    "ConnectiveClassError", "EvaluationError", "InputError",
    "IrrationalityError", "ParseError",
    "ExtensionPair", "Graph", "ISO_VERTEX_CAP", "RootedGraph",
    "are_isomorphic_rooted", "count_automorphisms",
    "count_fixing_automorphisms", "count_rooted_automorphisms", "density",
    "extension_counts", "format_graph_literal", "format_pair_literal",
    "induced_subgraph", "max_density", "parse_graph_literal",
    "parse_pair_literal",
    "Asym", "Pow", "ZERO", "asym_max", "asym_min", "asym_scale",
    "asym_sum", "asym_times_n", "is_zero",
    "Agg", "Apply", "Const", "Edge", "Eq", "LMean", "MAX", "MEAN", "MIN",
    "SUM", "Term", "all_vars", "desugar_means", "desugar_min", "free_vars",
    "metrics", "print_term", "validate",
    "Connective", "Registry", "SPEC_POS", "SPEC_ZERO", "asym_apply",
    "certified_copy", "default_registry", "domdiff", "indz",
    "make_user_connective", "mono", "poly", "register_builtin_connectives",
    "scale", "sigmoid", "vmax", "vmin",
    "parse",
    "Environment", "eval_reference", "eval_term",
    "Dense", "Regime", "Sparse", "edge_probability", "sample",
    "Fixture", "LipReport", "PowerBoundReport", "TransferReport",
    "TrialSpec", "check_concentration_transfer", "check_power_bound",
    "check_relative_lipschitz", "fixtures", "max_quotient", "pair_battery",
    "promote",
    "AtomicType", "EMPTY_TYPE", "atomic_type", "extension_percentages",
    "in_extension", "out_extensions",
    "ClosureType", "ExtensionCaps", "ExtensionTypeRecord", "GuardReport",
    "PairClass", "RapidSequence", "canonical_rooted", "classify_pair",
    "closure", "closure_extension_records", "closure_type",
    "compare_density", "count_extensions", "ell", "empty_closure_type",
    "enumerate_closure_extension_types", "eta", "irrationality_guard",
    "max_sparse_attach", "mu_all", "mu_asym", "rapid_sequence",
    "strictly_balanced", "strictly_balanced_chain",
    "Analysis", "PhiTable", "analyze_dense", "analyze_sparse",
    "expected_max_extension_asym", "expected_subgraph_asym",
    "expected_subgraph_count",
    "ExperimentConfig", "Report", "emit_report", "report_to_dict",
    "run_concentration_experiment", "verify_extension_concentration",
    "verify_stabilization",
    "__version__",
]
