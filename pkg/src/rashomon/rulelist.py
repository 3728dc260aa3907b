"""Rule-list semantics.

A rule list is an ordered sequence of (term -> label) rules closed by a
default rule whose test is constant true.  The list length convention counts
the default rule: a list of total length L has L-1 non-default rules.  All
risk bookkeeping is done in exact integer misclassification counts; ratios
appear only at API boundaries, so threshold comparisons such as "risk within
tolerance" never hinge on float rounding.

Prefixes are immutable; ``extend`` returns a fresh value carrying the
incremental capture/misclassification state plus the newly-captured count
the search layers need for min-support pruning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bitvec import popcount
from .dataset import BinaryDataset
from .errors import DataError, DuplicateTermError, InvalidParameterError
from .vocabulary import Vocabulary


@dataclass(frozen=True)
class Rule:
    term_id: int
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise InvalidParameterError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class Prefix:
    rules: tuple[Rule, ...] = ()
    captured: int = 0                  # union of captures of the rules so far
    errors_captured: int = 0           # captured examples misclassified by their rule
    newly_captured: tuple[int, ...] = ()   # per-rule count of examples falling into it

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def term_ids(self) -> tuple[int, ...]:
        return tuple(r.term_id for r in self.rules)


EMPTY_PREFIX = Prefix()


@dataclass(frozen=True)
class PredictionVector:
    """Per-example predictions of one model, as a bitvector."""

    bits: int
    n_examples: int


@dataclass(frozen=True)
class RuleList:
    prefix: Prefix
    default_label: int

    @property
    def total_length(self) -> int:
        """Rule count including the default rule."""
        return len(self.prefix.rules) + 1

    @property
    def rules(self) -> tuple[Rule, ...]:
        return self.prefix.rules


def extend(prefix: Prefix, rule: Rule, vocabulary: Vocabulary,
           dataset: BinaryDataset) -> Prefix:
    """Append a rule, updating capture state incrementally.

    Only examples not captured by earlier rules fall into the new one; the
    parent prefix is unchanged.
    """
    if any(r.term_id == rule.term_id for r in prefix.rules):
        raise DuplicateTermError(f"term {rule.term_id} already used in this prefix")
    cap = vocabulary.terms[rule.term_id].capture
    new_bits = cap & ~prefix.captured
    if rule.label == 1:
        wrong = new_bits & ~dataset.labels & dataset.mask
    else:
        wrong = new_bits & dataset.labels
    return Prefix(
        rules=prefix.rules + (rule,),
        captured=prefix.captured | new_bits,
        errors_captured=prefix.errors_captured + popcount(wrong),
        newly_captured=prefix.newly_captured + (popcount(new_bits),),
    )


def is_canonical(prefix: Prefix, about_to_append: Rule) -> bool:
    """Canonical form: term ids strictly increase inside every maximal run of
    consecutive equal-label rules.  One representative per permutation class
    (permuting an equal-label run never changes predictions)."""
    if not prefix.rules:
        return True
    last = prefix.rules[-1]
    if about_to_append.label != last.label:
        return True
    return about_to_append.term_id > last.term_id


def predict(rulelist: RuleList, x, vocabulary: Vocabulary) -> int:
    """Scalar prediction on one input row (sequence of J feature bits).

    Requires index-bearing terms (mined or constructed vocabularies); terms
    loaded verbatim from a capture file cannot be evaluated on new rows.
    """
    for rule in rulelist.prefix.rules:
        term = vocabulary.terms[rule.term_id]
        if term.feature_indices is None:
            raise InvalidParameterError(
                f"term {term.name!r} has no feature indices; row evaluation unsupported")
        if all(x[i] for i in term.feature_indices):
            return rule.label
    return rulelist.default_label


def prediction_vector(rulelist: RuleList, dataset: BinaryDataset,
                      vocabulary: Vocabulary) -> PredictionVector:
    """Vectorized predict: bit n is the label of the first rule capturing
    example n (default label if none)."""
    pv = 0
    remaining = dataset.mask
    for rule in rulelist.prefix.rules:
        fall_in = vocabulary.terms[rule.term_id].capture & remaining
        if rule.label == 1:
            pv |= fall_in
        remaining &= ~fall_in
    if rulelist.default_label == 1:
        pv |= remaining
    return PredictionVector(bits=pv, n_examples=dataset.n_examples)


def default_rule_errors(captured: int, errors_captured: int, default_label: int,
                        dataset: BinaryDataset) -> int:
    """Misclassification count of closing the given prefix state with a
    default rule."""
    uncaptured = dataset.mask & ~captured
    if default_label == 1:
        wrong = uncaptured & ~dataset.labels & dataset.mask
    else:
        wrong = uncaptured & dataset.labels
    return errors_captured + popcount(wrong)


def misclassification_count(rulelist: RuleList, dataset: BinaryDataset,
                            vocabulary: Vocabulary) -> int:
    pv = prediction_vector(rulelist, dataset, vocabulary)
    return popcount(pv.bits ^ dataset.labels)


def empirical_risk(rulelist: RuleList, dataset: BinaryDataset,
                   vocabulary: Vocabulary) -> float:
    """Fraction of examples misclassified (0-1 loss)."""
    return misclassification_count(rulelist, dataset, vocabulary) / dataset.n_examples


def objective(rulelist: RuleList, dataset: BinaryDataset, vocabulary: Vocabulary,
              lam) -> float:
    """Empirical risk plus lam times total rule count (default included)."""
    return float(objective_exact(
        misclassification_count(rulelist, dataset, vocabulary),
        rulelist.total_length, dataset.n_examples, lam))


def objective_exact(n_errors: int, total_length: int, n_examples: int, lam) -> Fraction:
    if lam < 0:
        raise InvalidParameterError("lambda must be nonnegative")
    return Fraction(n_errors, n_examples) + Fraction(lam) * total_length


def lower_bound(prefix: Prefix, dataset: BinaryDataset, lam=0) -> float:
    """Risk contribution of the captured examples, ignoring everything that
    falls through to the default rule; with lam > 0, the shortest possible
    completion's length penalty is added.  Never exceeds the objective of any
    rule list extending this prefix."""
    return float(lower_bound_exact(prefix.errors_captured, len(prefix.rules),
                                   dataset.n_examples, lam))


def lower_bound_exact(errors_captured: int, prefix_len: int, n_examples: int,
                      lam) -> Fraction:
    return Fraction(errors_captured, n_examples) + Fraction(lam) * (prefix_len + 1)


def serialize(rulelist: RuleList, vocabulary: Vocabulary, n_errors: int,
              n_examples: int, lam=0) -> dict:
    """The wire form: rules in evaluation order, default rule excluded from
    the array but counted in "length"."""
    return {
        "rules": [
            {"term": vocabulary.terms[r.term_id].name, "label": r.label}
            for r in rulelist.prefix.rules
        ],
        "default": rulelist.default_label,
        "risk": n_errors / n_examples,
        "objective": float(objective_exact(n_errors, rulelist.total_length,
                                           n_examples, lam)),
        "length": rulelist.total_length,
    }


def deserialize(obj: dict, vocabulary: Vocabulary, dataset: BinaryDataset) -> tuple[RuleList, int]:
    """Rebuild a rule list (and its exact error count) from its wire form.

    Term names must resolve in the given vocabulary.
    """
    by_name = vocabulary.by_name()
    prefix = EMPTY_PREFIX
    for entry in obj["rules"]:
        name = entry["term"]
        if name not in by_name:
            raise DataError(f"unknown term name {name!r} in serialized rule list")
        prefix = extend(prefix, Rule(term_id=by_name[name].id, label=int(entry["label"])),
                        vocabulary, dataset)
    rl = RuleList(prefix=prefix, default_label=int(obj["default"]))
    n_err = default_rule_errors(prefix.captured, prefix.errors_captured,
                                rl.default_label, dataset)
    return rl, n_err
