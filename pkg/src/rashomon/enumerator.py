"""Exact enumeration of every good rule list within an error tolerance.

The walk is a depth-first traversal over prefixes: at each prefix both
default-rule closures are tested against the threshold and emitted to the
sink on success, then the prefix is extended by one (term, label) rule per
child, passing the shrunken term set downward so no term repeats.  Working
space is the live DFS path only, independent of how many solutions exist;
the sink decides whether to store, count, or aggregate.

Threshold arithmetic is exact.  In plain-risk mode the bound is an integer
misclassification count; in regularized mode a per-depth table of maximal
admissible error counts is precomputed from the rational objective bound, so
both backends only ever compare integers in the hot loop.

Two interchangeable backends exist: this module's pure-Python walk and a
compiled core (rashomon._enumcore, built from Cython when available).  The
compiled one is selected at import time unless RASHOMON_PURE is set; both
emit identical solutions in identical order.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .bitvec import popcount
from .dataset import BinaryDataset
from .errors import EmptyVocabularyError, InvalidFractionError, InvalidParameterError
from .rulelist import EMPTY_PREFIX, Rule, RuleList, extend, misclassification_count
from .vocabulary import Vocabulary

_THRESHOLD_GUARD = Fraction(1, 10**9)   # absorbs binary representation error of decimal inputs


def compute_threshold(reference_risk, epsilon, n: int) -> int:
    """Largest integer error count e with e/n <= reference_risk + epsilon.

    Inputs may be floats; they are converted to exact rationals first, and a
    one-part-per-billion guard keeps counts that are meant to sit exactly on
    the boundary inside the set.
    """
    if not 0 <= epsilon <= 1:
        raise InvalidFractionError(f"epsilon must be in [0, 1], got {epsilon}")
    limit = (Fraction(reference_risk) + Fraction(epsilon)) * n
    return math.floor(limit + _THRESHOLD_GUARD)


@dataclass(frozen=True)
class EnumConfig:
    """Search universe and pruning switches.

    Exactly one of threshold_errors (plain-risk mode, an integer
    misclassification bound) or threshold_objective (regularized mode,
    compared against risk + lam * length) must be given.  min_capture is the
    minimum number of previously uncaptured examples each non-default rule
    must newly capture to count as a member at all; the prune_* flags only
    control whether the corresponding search-space cut is applied early, so
    toggling prune_lower_bound or prune_min_support changes node counts but
    never the emitted set.
    """

    max_total_len: int
    threshold_errors: Optional[int] = None
    threshold_objective: object = None       # Fraction-like, regularized mode
    lam: object = 0
    min_capture: int = 1
    prune_lower_bound: bool = True
    prune_min_support: bool = True
    prune_symmetry: bool = True
    emit_order: str = "dfs"

    def __post_init__(self):
        if self.max_total_len < 1:
            raise InvalidParameterError("max_total_len must be >= 1")
        if (self.threshold_errors is None) == (self.threshold_objective is None):
            raise InvalidParameterError(
                "exactly one of threshold_errors / threshold_objective is required")
        if self.threshold_errors is not None and not isinstance(self.threshold_errors, int):
            raise InvalidParameterError("threshold_errors must be an integer count")
        if self.min_capture < 0:
            raise InvalidParameterError("min_capture must be >= 0")
        if self.emit_order not in ("dfs", "sorted"):
            raise InvalidParameterError("emit_order must be 'dfs' or 'sorted'")
        if Fraction(self.lam) < 0:
            raise InvalidParameterError("lambda must be nonnegative")


@dataclass
class EnumStats:
    candidates_visited: int = 0      # rule-list candidates tested (two per prefix)
    solutions: int = 0
    elapsed: float = 0.0
    peak_queue_depth: int = 0        # deepest live DFS path
    nodes_visited: int = 0           # prefix nodes expanded
    backend: str = "python"
    complete: bool = True


@dataclass(frozen=True)
class Solution:
    """One emitted rule list, paired with its exact misclassification count."""

    term_ids: tuple[int, ...]
    labels: tuple[int, ...]
    default_label: int
    n_errors: int
    n_examples: int

    @property
    def risk(self) -> float:
        return self.n_errors / self.n_examples

    @property
    def total_length(self) -> int:
        return len(self.term_ids) + 1

    def key(self) -> tuple:
        return (self.term_ids, self.labels, self.default_label)

    def sort_key(self) -> tuple:
        return (self.n_errors, self.total_length, self.term_ids, self.labels,
                self.default_label)

    def to_rule_list(self, dataset: BinaryDataset, vocabulary: Vocabulary) -> RuleList:
        prefix = EMPTY_PREFIX
        for t, y in zip(self.term_ids, self.labels):
            prefix = extend(prefix, Rule(term_id=t, label=y), vocabulary, dataset)
        return RuleList(prefix=prefix, default_label=self.default_label)

    def serialize(self, vocabulary: Vocabulary, lam=0) -> dict:
        from .rulelist import objective_exact
        return {
            "rules": [
                {"term": vocabulary.terms[t].name, "label": y}
                for t, y in zip(self.term_ids, self.labels)
            ],
            "default": self.default_label,
            "risk": self.n_errors / self.n_examples,
            "objective": float(objective_exact(self.n_errors, self.total_length,
                                               self.n_examples, lam)),
            "length": self.total_length,
        }


def depth_error_bounds(config: EnumConfig, n_examples: int) -> list[int]:
    """Per prefix-depth maximum admissible error count.

    Entry d bounds both the emission test for lists closed at depth d (total
    length d+1) and the lower-bound prune of a child prefix at depth d.
    """
    max_depth = config.max_total_len - 1
    if config.threshold_objective is None:
        return [config.threshold_errors] * (max_depth + 1)
    lam = Fraction(config.lam)
    tau = Fraction(config.threshold_objective)
    return [math.floor((tau - lam * (d + 1)) * n_examples) for d in range(max_depth + 1)]


def _load_compiled():
    if os.environ.get("RASHOMON_PURE"):
        return None
    try:
        from . import _enumcore
        return _enumcore
    except ImportError:
        return None


_COMPILED = _load_compiled()


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _COMPILED is not None else [])


def default_backend() -> str:
    return "compiled" if _COMPILED is not None else "python"


def enumerate_rashomon(dataset: BinaryDataset, vocabulary: Vocabulary,
                       config: EnumConfig, sink: Optional[Callable[[Solution], None]],
                       backend: str = "auto", timeout_s: Optional[float] = None) -> EnumStats:
    """Stream every member of the configured universe to the sink, exactly once.

    The sink may be None to count only.  Exceptions raised by the sink
    propagate and abort the walk.  Emission order is the deterministic DFS
    traversal order, or globally sorted when config.emit_order == "sorted"
    (which buffers all solutions and therefore forfeits the constant-space
    guarantee).
    """
    if len(vocabulary) == 0:
        raise EmptyVocabularyError("enumeration needs at least one candidate term")
    if backend == "auto":
        backend = default_backend()
    if backend == "compiled" and _COMPILED is None:
        raise InvalidParameterError("compiled backend requested but not built")
    if backend not in ("python", "compiled"):
        raise InvalidParameterError(f"unknown backend {backend!r}")

    bounds = depth_error_bounds(config, dataset.n_examples)
    deadline = None if timeout_s is None else time.monotonic() + timeout_s

    buffer: list[Solution] = []
    if config.emit_order == "sorted" and sink is not None:
        emit_sink = buffer.append
    else:
        emit_sink = sink

    start = time.monotonic()
    if backend == "compiled":
        raw = _run_compiled(dataset, vocabulary, config, bounds, emit_sink, deadline)
    else:
        raw = _run_python(dataset, vocabulary, config, bounds, emit_sink, deadline)
    candidates, solutions, peak_depth, nodes, complete = raw
    elapsed = time.monotonic() - start

    if config.emit_order == "sorted" and sink is not None:
        buffer.sort(key=Solution.sort_key)
        for sol in buffer:
            sink(sol)

    return EnumStats(candidates_visited=candidates, solutions=solutions,
                     elapsed=elapsed, peak_queue_depth=peak_depth,
                     nodes_visited=nodes, backend=backend, complete=complete)


def _run_python(dataset, vocabulary, config, bounds, sink, deadline):
    n = dataset.n_examples
    mask = dataset.mask
    labels = dataset.labels
    notlabels = mask & ~labels
    captures = [t.capture for t in vocabulary.terms]
    max_depth = config.max_total_len - 1
    min_capture = config.min_capture
    prune_lb = config.prune_lower_bound
    prune_ms = config.prune_min_support
    prune_sym = config.prune_symmetry

    stats = [0, 0, 0, 0]   # candidates, solutions, peak_depth, nodes
    timed_out = [False]

    def visit(captured, errors, remaining, path_terms, path_labels, depth, valid):
        if deadline is not None and time.monotonic() > deadline:
            timed_out[0] = True
            return
        stats[3] += 1
        if depth > stats[2]:
            stats[2] = depth
        bound = bounds[depth]
        uncaptured = mask & ~captured
        for y in (0, 1):
            stats[0] += 1
            wrong = (uncaptured & labels) if y == 0 else (uncaptured & notlabels)
            err = errors + popcount(wrong)
            if valid and err <= bound:
                stats[1] += 1
                if sink is not None:
                    sink(Solution(term_ids=tuple(path_terms), labels=tuple(path_labels),
                                  default_label=y, n_errors=err, n_examples=n))
        if depth >= max_depth:
            return
        child_bound = bounds[depth + 1]
        last_label = path_labels[-1] if path_labels else -1
        last_term = path_terms[-1] if path_terms else -1
        for i, t in enumerate(remaining):
            new_bits = captures[t] & ~captured
            n_new = popcount(new_bits)
            if prune_ms and n_new < min_capture:
                continue
            child_captured = captured | new_bits
            wrong0 = popcount(new_bits & labels)
            wrong1 = n_new - wrong0
            for y in (0, 1):
                if prune_sym and y == last_label and t < last_term:
                    continue
                child_errors = errors + (wrong0 if y == 0 else wrong1)
                if prune_lb and child_errors > child_bound:
                    continue
                path_terms.append(t)
                path_labels.append(y)
                visit(child_captured, child_errors, remaining[:i] + remaining[i + 1:],
                      path_terms, path_labels, depth + 1,
                      valid and n_new >= min_capture)
                path_terms.pop()
                path_labels.pop()
                if timed_out[0]:
                    return

    visit(0, 0, tuple(range(len(captures))), [], [], 0, True)
    return stats[0], stats[1], stats[2], stats[3], not timed_out[0]


def _run_compiled(dataset, vocabulary, config, bounds, sink, deadline):
    from array import array

    from .bitvec import pack_words

    n = dataset.n_examples
    n_words = (n + 63) // 64 if n else 1
    caps = array("Q")
    for t in vocabulary.terms:
        caps.extend(pack_words(t.capture, n))
    labels = array("Q", pack_words(dataset.labels, n))
    full = array("Q", pack_words(dataset.mask, n))
    bounds_arr = array("q", bounds)

    if sink is None:
        emit = None
    else:
        def emit(term_ids, rule_labels, default_label, err):
            sink(Solution(term_ids=term_ids, labels=rule_labels,
                          default_label=default_label, n_errors=err, n_examples=n))

    return _COMPILED.run(
        caps, labels, full, n_words, len(vocabulary), bounds_arr,
        config.max_total_len - 1, config.min_capture,
        config.prune_lower_bound, config.prune_min_support, config.prune_symmetry,
        emit, -1.0 if deadline is None else deadline,
    )


@dataclass
class SweepResult:
    epsilons: list[float]
    thresholds: list[int]               # integer error bound per epsilon
    cumulative_counts: list[int]        # members admitted at each epsilon
    buckets: Optional[list[list[Solution]]]   # solutions by smallest admitting epsilon
    stats: EnumStats = field(default=None)


def sweep_tolerances(dataset: BinaryDataset, vocabulary: Vocabulary,
                     reference: RuleList, epsilons, max_total_len: int,
                     min_capture: int = 1, backend: str = "auto",
                     sink: Optional[Callable[[Solution, int], None]] = None,
                     timeout_s: Optional[float] = None,
                     emit_order: str = "dfs") -> SweepResult:
    """One enumeration at the largest tolerance, bucketing each solution into
    the smallest epsilon that admits it.  Counts are cumulative, so they are
    nondecreasing in epsilon by construction (the sets are nested).

    If a sink is given it receives (solution, bucket_index) and no buckets
    are materialized.
    """
    eps = [float(e) for e in epsilons]
    if not eps or sorted(eps) != eps:
        raise InvalidParameterError("epsilons must be a nonempty ascending list")
    ref_errors = misclassification_count(reference, dataset, vocabulary)
    ref_risk = Fraction(ref_errors, dataset.n_examples)
    thresholds = [compute_threshold(ref_risk, e, dataset.n_examples) for e in eps]

    buckets: Optional[list[list[Solution]]] = None if sink is not None else [[] for _ in eps]
    counts = [0] * len(eps)

    def consume(sol: Solution):
        # thresholds are nondecreasing; find the first epsilon admitting this
        for i, bound in enumerate(thresholds):
            if sol.n_errors <= bound:
                counts[i] += 1
                if sink is not None:
                    sink(sol, i)
                else:
                    buckets[i].append(sol)
                return
        # unreachable: the walk's threshold is the largest epsilon's

    config = EnumConfig(max_total_len=max_total_len, threshold_errors=thresholds[-1],
                        min_capture=min_capture, emit_order=emit_order)
    stats = enumerate_rashomon(dataset, vocabulary, config, consume,
                               backend=backend, timeout_s=timeout_s)
    cumulative = []
    running = 0
    for c in counts:
        running += c
        cumulative.append(running)
    return SweepResult(epsilons=eps, thresholds=thresholds,
                       cumulative_counts=cumulative, buckets=buckets, stats=stats)
