"""Branch-and-bound learner for the single optimal rule list.

Best-first exploration on a priority queue keyed by the prefix lower bound
(misclassifications among captured examples, plus the length penalty of the
shortest possible completion).  The incumbent is tie-broken
deterministically by (objective, total length, (term_id, label) sequence,
default label) so the reference classifier is reproducible.

Objective comparisons are exact.  The hot path compares integer
misclassification counts against per-depth cutoffs derived from the
incumbent ("is risk + lam * length still <= incumbent at this depth"),
recomputed only when the incumbent improves; rationals appear solely in
those recomputations and in final tie-breaking, so no float boundary can
misclassify a candidate.

Restricted searches (allowed term subset, banned exact term sets) are what
the top-K layer needs from its black-box fit; bans only veto incumbent
updates, never bound pruning, so they cannot cut a feasible optimum.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bitvec import popcount
from .dataset import BinaryDataset
from .errors import EmptyVocabularyError, InvalidParameterError
from .rulelist import EMPTY_PREFIX, Rule, RuleList, extend
from .vocabulary import Vocabulary


@dataclass
class OptResult:
    best: RuleList
    best_objective: float
    objective_exact: Fraction
    n_errors: int
    nodes_visited: int
    elapsed: float
    complete: bool


@dataclass(frozen=True)
class _Found:
    """Winner of a (possibly restricted) search, before RuleList rebuild."""

    key: tuple              # (objective, total_length, rules, default) - the tie-break key
    rules: tuple            # ((term_id, label), ...)
    default_label: int
    n_errors: int


def fit_optimal(dataset: BinaryDataset, vocabulary: Vocabulary, max_total_len: int,
                lam=0, min_capture: int = 1, timeout_s: Optional[float] = None) -> OptResult:
    """Globally minimize risk + lam * length over canonical rule lists of
    total length <= max_total_len whose every rule captures at least
    min_capture new examples.

    On timeout the best list found so far is returned with complete=False.
    """
    if len(vocabulary) == 0:
        raise EmptyVocabularyError("fit_optimal needs a nonempty vocabulary")
    start = time.monotonic()
    found, nodes, complete = search(dataset, vocabulary, max_total_len, lam,
                                    min_capture=min_capture, timeout_s=timeout_s)
    elapsed = time.monotonic() - start
    # with no bans the two constant lists are always candidates
    assert found is not None
    prefix = EMPTY_PREFIX
    for term_id, label in found.rules:
        prefix = extend(prefix, Rule(term_id=term_id, label=label), vocabulary, dataset)
    best = RuleList(prefix=prefix, default_label=found.default_label)
    return OptResult(best=best, best_objective=float(found.key[0]),
                     objective_exact=found.key[0], n_errors=found.n_errors,
                     nodes_visited=nodes, elapsed=elapsed, complete=complete)


def search(dataset: BinaryDataset, vocabulary: Vocabulary, max_total_len: int,
           lam=0, min_capture: int = 1, allowed_terms=None, banned_term_sets=None,
           timeout_s: Optional[float] = None, queue_cap: int = 200_000):
    """Core search; returns (_Found or None, nodes_visited, complete).

    allowed_terms restricts the candidate vocabulary (empty means only the
    two constant lists are candidates).  banned_term_sets is a collection of
    frozensets of term ids whose exact term set may not win.  When the queue
    would outgrow queue_cap, children are expanded depth-first immediately
    instead of enqueued, trading exploration order for bounded memory.
    """
    if max_total_len < 1:
        raise InvalidParameterError("max_total_len must be >= 1")
    lam = Fraction(lam)
    if lam < 0:
        raise InvalidParameterError("lambda must be nonnegative")
    n = dataset.n_examples
    mask = dataset.mask
    labels = dataset.labels
    notlabels = mask & ~labels
    captures = [t.capture for t in vocabulary.terms]
    if allowed_terms is None:
        base_terms = tuple(range(len(captures)))
    else:
        base_terms = tuple(sorted(allowed_terms))
    banned = frozenset(banned_term_sets) if banned_term_sets else frozenset()
    max_depth = max_total_len - 1
    deadline = None if timeout_s is None else time.monotonic() + timeout_s

    lam_len = [lam * (d + 1) for d in range(max_depth + 2)]
    # cutoffs[d]: largest error count whose objective at total length d+1
    # still ties or beats the incumbent; all hot-loop tests are integer
    cutoffs = [n] * (max_depth + 1)
    best_key: Optional[tuple] = None
    best: Optional[_Found] = None
    nodes = 0
    complete = True

    def refresh_cutoffs():
        inc = best_key[0]
        for d in range(max_depth + 1):
            cutoffs[d] = math.floor((inc - lam_len[d]) * n)

    def consider(rules, default_label, err, depth):
        nonlocal best_key, best
        if err > cutoffs[depth]:
            return
        obj = Fraction(err, n) + lam_len[depth]
        key = (obj, depth + 1, rules, default_label)
        if best_key is not None and key >= best_key:
            return
        if banned and frozenset(t for t, _ in rules) in banned:
            return
        best_key = key
        best = _Found(key=key, rules=rules, default_label=default_label, n_errors=err)
        refresh_cutoffs()

    def evaluate(captured, errors, rules, depth):
        uncaptured = mask & ~captured
        consider(rules, 0, errors + popcount(uncaptured & labels), depth)
        consider(rules, 1, errors + popcount(uncaptured & notlabels), depth)

    def children(captured, errors, rules, remaining, depth):
        """Yield viable child nodes in deterministic order."""
        last_label = rules[-1][1] if rules else -1
        last_term = rules[-1][0] if rules else -1
        child_cut = cutoffs[depth + 1]
        for i, t in enumerate(remaining):
            new_bits = captures[t] & ~captured
            n_new = popcount(new_bits)
            if n_new < min_capture:
                continue
            wrong0 = popcount(new_bits & labels)
            wrong1 = n_new - wrong0
            child_captured = None
            child_remaining = None
            for y in (0, 1):
                if y == last_label and t < last_term:
                    continue
                child_errors = errors + (wrong0 if y == 0 else wrong1)
                if child_errors > child_cut:
                    continue
                if child_captured is None:
                    child_captured = captured | new_bits
                    child_remaining = remaining[:i] + remaining[i + 1:]
                yield (child_errors, child_captured, rules + ((t, y),),
                       child_remaining, depth + 1)
            child_cut = cutoffs[depth + 1]   # incumbent may have moved

    def expand_dfs(captured, errors, rules, remaining, depth):
        """Memory-capped fallback: finish this subtree immediately."""
        nonlocal nodes, complete
        if deadline is not None and time.monotonic() > deadline:
            complete = False
            return
        for err2, cap2, rules2, rem2, d2 in children(captured, errors, rules,
                                                     remaining, depth):
            nodes += 1
            evaluate(cap2, err2, rules2, d2)
            if d2 < max_depth:
                expand_dfs(cap2, err2, rules2, rem2, d2)
            if not complete:
                return

    heap: list = []
    seq = 0
    nodes += 1
    evaluate(0, 0, (), 0)
    if max_depth > 0 and base_terms:
        heapq.heappush(heap, (0.0, seq, 0, 0, 0, (), base_terms))
    while heap:
        if deadline is not None and time.monotonic() > deadline:
            complete = False
            break
        _, _, err, depth, captured, rules, remaining = heapq.heappop(heap)
        if err > cutoffs[depth]:
            continue   # incumbent moved past this node after it was pushed
        for err2, cap2, rules2, rem2, d2 in children(captured, err, rules,
                                                     remaining, depth):
            nodes += 1
            evaluate(cap2, err2, rules2, d2)
            if d2 < max_depth:
                if len(heap) >= queue_cap:
                    expand_dfs(cap2, err2, rules2, rem2, d2)
                    if not complete:
                        break
                else:
                    seq += 1
                    heapq.heappush(heap, (err2 / n + float(lam_len[d2]), seq,
                                          err2, d2, cap2, rules2, rem2))
        if not complete:
            break
    return best, nodes, complete
