"""Top-K good rule lists via Lawler-style branching over the fit black box.

A priority queue holds (score, rule list, allowed terms, excluded terms)
nodes seeded with the unrestricted optimum.  Popping the minimum either
yields a new answer (when its term set is unseen) or a duplicate; either
way, the region is branched: one child per term used by the popped list with
that term removed from the allowed set, plus a regeneration of the same
region with the popped term set banned outright.

The regeneration child is the one correctness addition over removal-only
branching: removing a used term from every child loses any term set that
strictly contains the popped one (and a constant-list optimum, which uses no
terms, would produce no children at all).  With it, the k answers are
provably the k smallest objective values over distinct term sets - matching
what grouping an exhaustive enumeration by term set yields.

The set of seen term sets is retained for the duration of the run; its
growth is proportional to the number of answers, which is precisely the
memory cost the streaming enumerator avoids.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dataset import BinaryDataset
from .errors import EmptyVocabularyError, InvalidParameterError
from .optimizer import search
from .rulelist import EMPTY_PREFIX, Rule, RuleList, extend
from .vocabulary import Vocabulary


@dataclass(frozen=True)
class TopKAnswer:
    score: float
    score_exact: Fraction
    rule_list: RuleList
    term_set: frozenset[int]
    n_errors: int


@dataclass
class TopKResult:
    answers: list[TopKAnswer]
    seen_term_sets: set[frozenset[int]]
    complete: bool
    pops: int = 0
    refits: int = 0
    elapsed: float = 0.0
    peak_queue: int = 0

    @property
    def scores(self) -> list[float]:
        return [a.score for a in self.answers]


def topk(dataset: BinaryDataset, vocabulary: Vocabulary, max_total_len: int,
         lam, k: int, timeout_s: Optional[float] = None,
         min_capture: int = 1) -> TopKResult:
    """Best k distinct-term-set rule lists by the regularized objective.

    Answers come out in nondecreasing score order.  complete is False only
    when the timeout fired before k answers (or queue exhaustion).
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if len(vocabulary) == 0:
        raise EmptyVocabularyError("topk needs a nonempty vocabulary")
    start = time.monotonic()
    deadline = None if timeout_s is None else start + timeout_s

    def remaining_budget():
        if deadline is None:
            return None
        return max(deadline - time.monotonic(), 0.0)

    all_terms = frozenset(range(len(vocabulary)))
    refits = 0

    def fit(allowed: frozenset, banned: frozenset):
        nonlocal refits
        refits += 1
        found, _, fit_complete = search(
            dataset, vocabulary, max_total_len, lam, min_capture=min_capture,
            allowed_terms=allowed, banned_term_sets=banned,
            timeout_s=remaining_budget())
        return found, fit_complete

    answers: list[TopKAnswer] = []
    seen: set[frozenset[int]] = set()
    pushed_regions: set = set()      # (allowed, banned) pairs already queued
    heap: list = []
    seq = 0
    pops = 0
    peak_queue = 0
    complete = True

    def push(allowed, excluded, banned):
        """Fit a region and enqueue its optimum, once per distinct region."""
        nonlocal seq, complete
        region = (allowed, banned)
        if region in pushed_regions:
            return True
        pushed_regions.add(region)
        found, fit_ok = fit(allowed, banned)
        if not fit_ok:
            complete = False
            return False
        if found is not None:
            seq += 1
            heapq.heappush(heap, (found.key[0], seq, found, allowed, excluded, banned))
        return True

    push(all_terms, frozenset(), frozenset())

    while heap and len(answers) < k and complete:
        if deadline is not None and time.monotonic() > deadline:
            complete = False
            break
        peak_queue = max(peak_queue, len(heap))
        score, _, found, allowed, excluded, banned = heapq.heappop(heap)
        pops += 1
        terms = frozenset(t for t, _ in found.rules)
        if terms in seen:
            # duplicate find: only regenerate this region past the known set
            push(allowed, excluded, banned | {terms})
            continue
        seen.add(terms)
        answers.append(TopKAnswer(
            score=float(score), score_exact=score,
            rule_list=_rebuild(found, vocabulary, dataset),
            term_set=terms, n_errors=found.n_errors))
        # same-region regeneration keeps supersets and ties of this term set
        # reachable; removal children mirror the black-box branching
        if not push(allowed, excluded, banned | {terms}):
            break
        for f in sorted(terms):
            if not push(allowed - {f}, excluded | {f}, banned):
                break

    return TopKResult(answers=answers, seen_term_sets=seen, complete=complete,
                      pops=pops, refits=refits, elapsed=time.monotonic() - start,
                      peak_queue=peak_queue)


def _rebuild(found, vocabulary: Vocabulary, dataset: BinaryDataset) -> RuleList:
    prefix = EMPTY_PREFIX
    for term_id, label in found.rules:
        prefix = extend(prefix, Rule(term_id=term_id, label=label), vocabulary, dataset)
    return RuleList(prefix=prefix, default_label=found.default_label)
