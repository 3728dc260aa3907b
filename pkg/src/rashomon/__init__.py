"""Exact Rashomon-set tooling for rule lists on binary-feature data.

Pipeline: load a binarized dataset, mine or load a term vocabulary, fit the
optimal reference rule list, enumerate every rule list within an error
tolerance of it in polynomial working space, then analyze the collection for
predictive multiplicity and fairness.  A Lawler-style top-K learner is
included as the baseline the enumeration is compared against.
"""

__version__ = "0.1.0"

from .dataset import BinaryDataset, SensitiveVector, load_csv, positive_count, split, write_csv
from .enumerator import (
    EnumConfig,
    EnumStats,
    Solution,
    available_backends,
    compute_threshold,
    default_backend,
    enumerate_rashomon,
    sweep_tolerances,
)
from .errors import DataError, RashomonError, UsageError
from .metrics import (
    DP,
    EO,
    FairnessAccumulator,
    Member,
    MultiplicityAccumulator,
    MultiplicityReport,
    RashomonSet,
    UnfairnessRange,
    ambiguity,
    build_set,
    demographic_parity,
    discrepancy,
    equal_opportunity,
    hamming_distance,
    multiplicity_report,
    unfairness_range,
)
from .optimizer import OptResult, fit_optimal
from .rulelist import (
    PredictionVector,
    Prefix,
    Rule,
    RuleList,
    empirical_risk,
    extend,
    is_canonical,
    lower_bound,
    misclassification_count,
    objective,
    predict,
    prediction_vector,
    serialize,
)
from .topk import TopKAnswer, TopKResult, topk
from .vocabulary import Term, Vocabulary, load_terms_file, mine_terms, save_terms_file, term_capture

__all__ = [name for name in dir() if not name.startswith("_")]
