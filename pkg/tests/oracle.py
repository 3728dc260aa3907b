"""Independent exhaustive reference for the search modules.

Everything here deliberately avoids the package's incremental capture
machinery: candidate lists come from itertools, and risks are computed by
per-row first-match evaluation.  The search implementations are checked
against these results by exact set equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product


@dataclass(frozen=True)
class OracleList:
    term_ids: tuple
    labels: tuple
    default_label: int
    n_errors: int

    def key(self):
        return (self.term_ids, self.labels, self.default_label)


def evaluate_by_rows(term_captures, term_ids, labels, default_label, y_bits, n):
    """Per-row evaluation: walk the rules until one captures the row.

    Returns (misclassification count, per-rule falls-into counts).
    """
    falls = [0] * len(term_ids)
    errors = 0
    for row in range(n):
        pred = default_label
        for i, t in enumerate(term_ids):
            if (term_captures[t] >> row) & 1:
                falls[i] += 1
                pred = labels[i]
                break
        if pred != ((y_bits >> row) & 1):
            errors += 1
    return errors, falls


def is_canonical_form(term_ids, labels) -> bool:
    for i in range(1, len(term_ids)):
        if labels[i] == labels[i - 1] and term_ids[i] < term_ids[i - 1]:
            return False
    return True


def canonical_representative(term_ids, labels):
    """Sort each maximal equal-label run of rules by term id."""
    out_t, out_l = [], []
    i = 0
    while i < len(term_ids):
        j = i
        while j < len(term_ids) and labels[j] == labels[i]:
            j += 1
        out_t.extend(sorted(term_ids[i:j]))
        out_l.extend([labels[i]] * (j - i))
        i = j
    return tuple(out_t), tuple(out_l)


def universe(dataset, vocabulary, max_total_len, min_capture=1, require_canonical=True):
    """Every rule list of total length <= max_total_len over distinct terms,
    subject to the canonical-form and min-capture membership rules."""
    caps = [t.capture for t in vocabulary.terms]
    n = dataset.n_examples
    out = []
    for k in range(0, max_total_len):
        for term_ids in permutations(range(len(caps)), k):
            for labels in product((0, 1), repeat=k):
                if require_canonical and not is_canonical_form(term_ids, labels):
                    continue
                errors0, falls = evaluate_by_rows(caps, term_ids, labels, 0,
                                                  dataset.labels, n)
                if min_capture and any(f < min_capture for f in falls):
                    continue
                errors1, _ = evaluate_by_rows(caps, term_ids, labels, 1,
                                              dataset.labels, n)
                out.append(OracleList(term_ids, tuple(labels), 0, errors0))
                out.append(OracleList(term_ids, tuple(labels), 1, errors1))
    return out


def rashomon_keys(dataset, vocabulary, max_total_len, max_errors,
                  min_capture=1, require_canonical=True):
    """The exact brute-force solution set, as hashable keys with risks."""
    return {
        (ol.key(), ol.n_errors)
        for ol in universe(dataset, vocabulary, max_total_len,
                           min_capture=min_capture,
                           require_canonical=require_canonical)
        if ol.n_errors <= max_errors
    }


def objective_of(ol: OracleList, n: int, lam) -> Fraction:
    return Fraction(ol.n_errors, n) + Fraction(lam) * (len(ol.term_ids) + 1)


def best_key(dataset, vocabulary, max_total_len, lam, min_capture=1):
    """Minimum over the universe under the deterministic tie-break order
    (objective, total length, (term, label) sequence, default label)."""
    n = dataset.n_examples
    best = None
    for ol in universe(dataset, vocabulary, max_total_len, min_capture=min_capture):
        key = (objective_of(ol, n, lam), len(ol.term_ids) + 1,
               tuple(zip(ol.term_ids, ol.labels)), ol.default_label)
        if best is None or key < best:
            best = key
    return best


def grouped_topk_scores(dataset, vocabulary, max_total_len, lam, k, min_capture=1):
    """The k smallest objectives over distinct term sets."""
    n = dataset.n_examples
    groups: dict = {}
    for ol in universe(dataset, vocabulary, max_total_len, min_capture=min_capture):
        obj = objective_of(ol, n, lam)
        key = frozenset(ol.term_ids)
        if key not in groups or obj < groups[key]:
            groups[key] = obj
    return sorted(groups.values())[:k]
