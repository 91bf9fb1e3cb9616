"""Probability trees with fuzzy branch weighting: interpretable probabilistic
inference over expert-ordered tabular features, plus ingestion, bootstrap
evaluation, a CLI, and an HTTP service."""

from .decision import (
    DEFAULT_THRESHOLD,
    AppliedSubstitution,
    CounterfactualResult,
    Decision,
    Substitution,
    apply_substitutions,
    classify,
    counterfactual,
)
from .errors import (
    ConfigError,
    ConstructionError,
    DomainError,
    FptError,
    QueryError,
    SchemaViolation,
    StratificationError,
    UndefinedConditionalError,
)
from .evaluation import (
    CohortSpec,
    ColumnSpec,
    ComparisonReport,
    ConfusionMatrix,
    EvaluationReport,
    MetricSummary,
    Metrics,
    bootstrap_compare,
    bootstrap_evaluate,
    compute_metrics,
    comparison_to_json,
    generate_cohort,
    report_to_json,
    report_to_table,
    score,
    stratified_split,
)
from .fuzzy import (
    Binding,
    ConditionalBinding,
    LinguisticVariable,
    MembershipFunction,
    binding_from_json,
    binding_to_json,
    crisp_project,
    evaluate,
    resolve_binding,
    term_degrees,
)
from .inference import (
    ALWAYS,
    And,
    BranchUse,
    Event,
    Not,
    Or,
    PatientQuery,
    Prediction,
    StatementEvent,
    conditional_probability,
    event_probability,
    find_existing_conditions,
    predict,
    predict_detailed,
    query_from_record,
    stmt,
)
from .ingest import (
    ExclusionRule,
    IngestReport,
    ModelSpec,
    complete_rows,
    load_dataset,
    load_spec,
    parse_spec,
)
from .tree import (
    ProbabilityTree,
    Realisation,
    Statement,
    TreeNode,
    TreeStats,
    VariableSpec,
    build_tree,
    enumerate_realisations,
    existing_children,
    tree_from_document,
    tree_from_json,
    tree_stats,
    tree_to_document,
    tree_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "ALWAYS",
    "And",
    "AppliedSubstitution",
    "Binding",
    "BranchUse",
    "CohortSpec",
    "ColumnSpec",
    "ComparisonReport",
    "ConditionalBinding",
    "ConfigError",
    "ConfusionMatrix",
    "ConstructionError",
    "CounterfactualResult",
    "DEFAULT_THRESHOLD",
    "Decision",
    "DomainError",
    "EvaluationReport",
    "Event",
    "ExclusionRule",
    "FptError",
    "IngestReport",
    "LinguisticVariable",
    "MembershipFunction",
    "MetricSummary",
    "Metrics",
    "ModelSpec",
    "Not",
    "Or",
    "PatientQuery",
    "Prediction",
    "ProbabilityTree",
    "QueryError",
    "Realisation",
    "SchemaViolation",
    "Statement",
    "StatementEvent",
    "StratificationError",
    "Substitution",
    "TreeNode",
    "TreeStats",
    "UndefinedConditionalError",
    "VariableSpec",
    "apply_substitutions",
    "binding_from_json",
    "binding_to_json",
    "bootstrap_compare",
    "bootstrap_evaluate",
    "build_tree",
    "classify",
    "comparison_to_json",
    "complete_rows",
    "compute_metrics",
    "conditional_probability",
    "counterfactual",
    "crisp_project",
    "enumerate_realisations",
    "evaluate",
    "event_probability",
    "existing_children",
    "find_existing_conditions",
    "generate_cohort",
    "load_dataset",
    "load_spec",
    "parse_spec",
    "predict",
    "predict_detailed",
    "query_from_record",
    "report_to_json",
    "report_to_table",
    "resolve_binding",
    "score",
    "stmt",
    "stratified_split",
    "term_degrees",
    "tree_from_document",
    "tree_from_json",
    "tree_stats",
    "tree_to_document",
    "tree_to_json",
]
