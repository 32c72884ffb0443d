"""Moderated-teaching simulations: exact target concepts, a filtering
teacher, simple per-round learners, and the experiment harness around them.
"""

from .concepts import (
    AcceptState,
    Adfsa,
    And,
    BranchState,
    Concept,
    ConceptDag,
    Correlation,
    Example,
    Gate,
    Literal,
    Not,
    Or,
    RejectState,
    ThresholdCircuit,
    Wire,
    adfsa_labels,
    arrival_offsets,
    build_parity,
    concept_from_dict,
    concept_to_dict,
    correlation_at,
    evaluate,
    evaluate_batch,
    is_relevant,
    load_concept,
    max_path_depth,
    node_values,
    push_negations_to_leaves,
    relevance_mask,
    run_adfsa,
    save_concept,
)
from .baselines import (
    BoostedStumpsClassifier,
    GreedyTreeClassifier,
    MajorityClassifier,
    fit_majority,
    fit_stumps,
    fit_tree,
)
from .errors import (
    ConfigError,
    EnumerationCapError,
    ImpactError,
    InputShapeError,
    InsufficientDataError,
    InvalidConceptError,
    InvalidParameterError,
    MalformedAutomatonError,
    UndefinedMetricError,
)
from .experiments import ResultRow, SweepConfig, load_config, run_sweep, write_outputs
from .learner import (
    DONT_KNOW,
    AdfsaNodeHypothesis,
    AttributeSpace,
    ErrorBudget,
    PairHypothesis,
    PerceptronHypothesis,
    ReliablePairSet,
    augment,
    corrupted_view,
    learn_adfsa_node,
    learn_pair_node,
    learn_threshold_node,
    pair_space_size,
    sample_budget,
)
from .plan import ModerationRule, Round, RoundPlan, default_rule, postfix_order
from .sampling import (
    Distribution,
    Sample,
    accuracy,
    derive_seed,
    dont_know_rate,
    draw_sample,
    rng_from,
    stable_entropy,
)
from .session import (
    AutomatonClassifier,
    CircuitClassifier,
    DagClassifier,
    RoundRecord,
    SessionReport,
    run_teaching_session,
)
from .teacher import PrivilegedView, export_privileged_view, moderate

__version__ = "0.1.0"

__all__ = [
    "AcceptState",
    "Adfsa",
    "AdfsaNodeHypothesis",
    "And",
    "AttributeSpace",
    "AutomatonClassifier",
    "BoostedStumpsClassifier",
    "BranchState",
    "CircuitClassifier",
    "Concept",
    "ConceptDag",
    "ConfigError",
    "Correlation",
    "DONT_KNOW",
    "DagClassifier",
    "Distribution",
    "EnumerationCapError",
    "ErrorBudget",
    "Example",
    "Gate",
    "GreedyTreeClassifier",
    "ImpactError",
    "InputShapeError",
    "InsufficientDataError",
    "InvalidConceptError",
    "InvalidParameterError",
    "Literal",
    "MajorityClassifier",
    "MalformedAutomatonError",
    "ModerationRule",
    "Not",
    "Or",
    "PairHypothesis",
    "PerceptronHypothesis",
    "PrivilegedView",
    "RejectState",
    "ReliablePairSet",
    "ResultRow",
    "Round",
    "RoundPlan",
    "RoundRecord",
    "Sample",
    "SessionReport",
    "SweepConfig",
    "ThresholdCircuit",
    "UndefinedMetricError",
    "Wire",
    "accuracy",
    "adfsa_labels",
    "arrival_offsets",
    "augment",
    "build_parity",
    "concept_from_dict",
    "concept_to_dict",
    "correlation_at",
    "corrupted_view",
    "default_rule",
    "derive_seed",
    "dont_know_rate",
    "draw_sample",
    "evaluate",
    "evaluate_batch",
    "export_privileged_view",
    "fit_majority",
    "fit_stumps",
    "fit_tree",
    "is_relevant",
    "learn_adfsa_node",
    "learn_pair_node",
    "learn_threshold_node",
    "load_concept",
    "load_config",
    "max_path_depth",
    "moderate",
    "node_values",
    "pair_space_size",
    "postfix_order",
    "push_negations_to_leaves",
    "relevance_mask",
    "rng_from",
    "run_adfsa",
    "run_sweep",
    "run_teaching_session",
    "sample_budget",
    "save_concept",
    "stable_entropy",
    "write_outputs",
]
