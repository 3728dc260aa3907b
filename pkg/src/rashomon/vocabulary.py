"""Candidate term set management.

A term is a conjunction of positive Boolean features with a cached capture
bitvector (the examples it evaluates true on).  Vocabularies come from two
places: exhaustive bounded-length mining with a positive-coverage filter, or
a pre-mined term-capture file in the one-term-per-line format

    {NAME} b1 b2 ... bN

where NAME contains no '}' and the bits are space-separated ASCII 0/1 with
bit n belonging to example n in file order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bitvec import full_mask, popcount
from .dataset import BinaryDataset, positive_count
from .errors import (
    DataError,
    DuplicateNameError,
    IndexOutOfRangeError,
    InvalidFractionError,
    InvalidParameterError,
    LengthMismatchError,
    NoPositivesError,
)

NAME_JOINER = " & "


@dataclass(frozen=True)
class Term:
    id: int
    name: str
    feature_indices: frozenset[int] | None   # None when loaded from a capture file
    capture: int                             # bitvector of length n_examples

    def supports_row_eval(self) -> bool:
        return self.feature_indices is not None


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[Term, ...]
    n_examples: int

    def __post_init__(self):
        names = set()
        mask = full_mask(self.n_examples)
        for i, t in enumerate(self.terms):
            if t.id != i:
                raise DataError("term ids must be dense 0..len-1 in order")
            if not t.name:
                raise DuplicateNameError("empty term name")
            if t.name in names:
                raise DuplicateNameError(f"duplicate term name {t.name!r}")
            names.add(t.name)
            if t.capture & ~mask:
                raise LengthMismatchError(f"term {t.name!r}: capture longer than dataset")

    def __len__(self) -> int:
        return len(self.terms)

    def names(self) -> list[str]:
        return [t.name for t in self.terms]

    def by_name(self) -> dict[str, Term]:
        return {t.name: t for t in self.terms}

    def restrict(self, term_ids) -> "Vocabulary":
        """Sub-vocabulary with ids re-densified, preserving order."""
        keep = sorted(term_ids)
        terms = tuple(
            Term(id=i, name=self.terms[t].name,
                 feature_indices=self.terms[t].feature_indices,
                 capture=self.terms[t].capture)
            for i, t in enumerate(keep)
        )
        return Vocabulary(terms=terms, n_examples=self.n_examples)


def term_capture(feature_indices, dataset: BinaryDataset) -> int:
    """Bitwise AND of the referenced feature columns; empty set is all-ones."""
    bits = dataset.mask
    for i in feature_indices:
        if not 0 <= i < dataset.n_features:
            raise IndexOutOfRangeError(f"feature index {i} outside 0..{dataset.n_features - 1}")
        bits &= dataset.features[i]
    return bits


def mine_terms(dataset: BinaryDataset, max_conjunction_len: int,
               min_pos_coverage: float) -> Vocabulary:
    """Exhaustively generate conjunctions of bounded length, keeping those
    whose capture covers at least min_pos_coverage of the positive examples.

    Enumeration order is lexicographic on the sorted feature-index tuples, so
    the vocabulary (and everything downstream of it) is reproducible.  The
    coverage filter counts positives only; overall support is a search-time
    concern, not a mining one.
    """
    if max_conjunction_len < 1:
        raise InvalidParameterError("max_conjunction_len must be >= 1")
    if not 0.0 <= min_pos_coverage <= 1.0:
        raise InvalidFractionError(f"min_pos_coverage must be in [0, 1], got {min_pos_coverage}")
    n_pos = positive_count(dataset)
    threshold = Fraction(min_pos_coverage)
    if n_pos == 0 and threshold > 0:
        raise NoPositivesError("no positive examples to measure coverage against")

    def covered_enough(capture: int) -> bool:
        if n_pos == 0:
            return True
        return Fraction(popcount(capture & dataset.labels), n_pos) >= threshold

    # Apriori-style: a conjunction can only lose coverage as it grows, so
    # only extend survivors.
    kept: list[tuple[tuple[int, ...], int]] = []
    frontier: list[tuple[tuple[int, ...], int]] = []
    for i in range(dataset.n_features):
        cap = dataset.features[i]
        if covered_enough(cap):
            frontier.append(((i,), cap))
    kept.extend(frontier)
    for _ in range(2, max_conjunction_len + 1):
        nxt = []
        for idxs, cap in frontier:
            for j in range(idxs[-1] + 1, dataset.n_features):
                cap2 = cap & dataset.features[j]
                if covered_enough(cap2):
                    nxt.append((idxs + (j,), cap2))
        kept.extend(nxt)
        frontier = nxt
        if not frontier:
            break

    kept.sort(key=lambda pair: pair[0])
    terms = tuple(
        Term(
            id=tid,
            name=NAME_JOINER.join(dataset.feature_names[i] for i in idxs),
            feature_indices=frozenset(idxs),
            capture=cap,
        )
        for tid, (idxs, cap) in enumerate(kept)
    )
    return Vocabulary(terms=terms, n_examples=dataset.n_examples)


def load_terms_file(path, n_examples: int) -> Vocabulary:
    """Parse a term-capture file; captures are taken verbatim."""
    terms = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if not line.startswith("{") or "}" not in line:
                raise DataError(f"{path}:{line_no}: expected '{{NAME}} bits...'")
            close = line.index("}")
            name = line[1:close]
            if not name:
                raise DuplicateNameError(f"{path}:{line_no}: empty term name")
            if name in seen:
                raise DuplicateNameError(f"{path}:{line_no}: duplicate term name {name!r}")
            seen.add(name)
            bits = line[close + 1:].split()
            if len(bits) != n_examples:
                raise LengthMismatchError(
                    f"{path}:{line_no}: {len(bits)} bits, expected {n_examples}")
            cap = 0
            for n, b in enumerate(bits):
                if b == "1":
                    cap |= 1 << n
                elif b != "0":
                    raise DataError(f"{path}:{line_no}: bit {n + 1} is {b!r}, expected 0/1")
            terms.append(Term(id=len(terms), name=name, feature_indices=None, capture=cap))
    return Vocabulary(terms=tuple(terms), n_examples=n_examples)


def save_terms_file(vocabulary: Vocabulary, path) -> None:
    """Write the bit-exact inverse of load_terms_file."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in vocabulary.terms:
            if "}" in t.name:
                raise DataError(f"term name {t.name!r} cannot contain '}}' in a capture file")
            bits = " ".join(str((t.capture >> n) & 1) for n in range(vocabulary.n_examples))
            fh.write(f"{{{t.name}}} {bits}\n")


def positive_coverage(term: Term, dataset: BinaryDataset) -> Fraction:
    """Fraction of positive examples the term captures."""
    n_pos = positive_count(dataset)
    if n_pos == 0:
        raise NoPositivesError("dataset has no positive examples")
    return Fraction(popcount(term.capture & dataset.labels), n_pos)
