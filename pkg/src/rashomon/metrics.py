"""Characterization of an enumerated model collection.

Predictive multiplicity is measured against the reference model: ambiguity
is the fraction of examples on which at least one member disagrees with the
reference (an OR over XOR vectors), discrepancy the largest single-member
normalized Hamming distance.  Fairness is measured per model as a signed
difference of group rates (demographic parity over all examples, equal
opportunity over the positives), and summarized over the collection as a
[min, max] unfairness range.

Every metric exists in two forms that agree bit-exactly: a batch function
over stored prediction vectors and a mergeable streaming accumulator fed one
vector at a time, so huge enumerations can be analyzed without retaining the
models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .bitvec import full_mask, popcount
from .dataset import SensitiveVector
from .errors import (
    EmptyGroupError,
    EmptySetError,
    InvalidParameterError,
    LengthMismatchError,
)
from .rulelist import PredictionVector, RuleList

DP = "DP"
EO = "EO"


@dataclass(frozen=True)
class Member:
    """One model of the collection; the rule structure is optional so that
    large sets can be held as prediction vectors only."""

    prediction: PredictionVector
    n_errors: int
    rule_list: Optional[RuleList] = None


@dataclass(frozen=True)
class RashomonSet:
    reference: Member
    members: tuple[Member, ...]
    epsilon: float
    dataset_fingerprint: str = ""

    def __post_init__(self):
        n = self.reference.prediction.n_examples
        bound = self.reference.n_errors + self.epsilon * n + 1e-9
        for m in self.members:
            if m.prediction.n_examples != n:
                raise LengthMismatchError("member prediction length differs from reference")
            if m.n_errors > bound:
                raise ValueError(
                    f"member with {m.n_errors} errors exceeds reference {self.reference.n_errors} "
                    f"+ epsilon {self.epsilon}")
        if not any(m.prediction.bits == self.reference.prediction.bits for m in self.members):
            raise ValueError("the reference model must be among the members")

    @property
    def n_examples(self) -> int:
        return self.reference.prediction.n_examples


def build_set(reference: Member, members: Iterable[Member], epsilon: float,
              dataset_fingerprint: str = "") -> RashomonSet:
    """Construct a RashomonSet, adding the reference to the members if the
    enumeration did not include it (it always should)."""
    members = tuple(members)
    if not any(m.prediction.bits == reference.prediction.bits for m in members):
        members = (reference,) + members
    return RashomonSet(reference=reference, members=members, epsilon=epsilon,
                       dataset_fingerprint=dataset_fingerprint)


def hamming_distance(p: PredictionVector, q: PredictionVector) -> float:
    """Normalized Hamming distance between two prediction vectors."""
    if p.n_examples != q.n_examples:
        raise LengthMismatchError(
            f"prediction lengths differ: {p.n_examples} vs {q.n_examples}")
    return popcount(p.bits ^ q.bits) / p.n_examples


def discrepancy(rset: RashomonSet) -> float:
    """Largest member-to-reference normalized Hamming distance."""
    if not rset.members:
        raise EmptySetError("discrepancy of an empty model set")
    return max(hamming_distance(m.prediction, rset.reference.prediction)
               for m in rset.members)


def ambiguity(rset: RashomonSet) -> float:
    """Fraction of examples where some member disagrees with the reference."""
    if not rset.members:
        raise EmptySetError("ambiguity of an empty model set")
    ref = rset.reference.prediction.bits
    acc = 0
    for m in rset.members:
        acc |= m.prediction.bits ^ ref
    return popcount(acc) / rset.n_examples


@dataclass(frozen=True)
class MultiplicityReport:
    ambiguity: float
    discrepancy: float
    per_model_distance: list[float]


def multiplicity_report(rset: RashomonSet) -> MultiplicityReport:
    dists = [hamming_distance(m.prediction, rset.reference.prediction)
             for m in rset.members]
    if not dists:
        raise EmptySetError("multiplicity of an empty model set")
    return MultiplicityReport(ambiguity=ambiguity(rset), discrepancy=max(dists),
                              per_model_distance=dists)


def demographic_parity(p: PredictionVector, z: SensitiveVector) -> float:
    """P(prediction=1 | z=1) - P(prediction=1 | z=0), signed."""
    if p.n_examples != z.n_examples:
        raise LengthMismatchError("prediction and sensitive vector lengths differ")
    mask = full_mask(p.n_examples)
    n1 = popcount(z.values)
    n0 = p.n_examples - n1
    if n1 == 0 or n0 == 0:
        raise EmptyGroupError(f"sensitive attribute {z.name!r} has an empty group")
    pos1 = popcount(p.bits & z.values)
    pos0 = popcount(p.bits & ~z.values & mask)
    return pos1 / n1 - pos0 / n0


def equal_opportunity(p: PredictionVector, z: SensitiveVector, labels: int) -> float:
    """True-positive-rate difference between groups, among y=1 examples."""
    if p.n_examples != z.n_examples:
        raise LengthMismatchError("prediction and sensitive vector lengths differ")
    mask = full_mask(p.n_examples)
    pos = labels & mask
    n1 = popcount(pos & z.values)
    n0 = popcount(pos & ~z.values & mask)
    if n1 == 0 or n0 == 0:
        raise EmptyGroupError(
            f"no positive examples in a {z.name!r} group; equal opportunity undefined")
    tp1 = popcount(p.bits & pos & z.values)
    tp0 = popcount(p.bits & pos & ~z.values & mask)
    return tp1 / n1 - tp0 / n0


@dataclass(frozen=True)
class UnfairnessRange:
    criterion: str
    lo: float
    hi: float
    per_model_score: list[float]


def unfairness_range(rset: RashomonSet, z: SensitiveVector, labels: int,
                     criterion: str) -> UnfairnessRange:
    """[min, max] of a discrimination score over the collection, one pass."""
    if not rset.members:
        raise EmptySetError("unfairness range of an empty model set")
    acc = FairnessAccumulator(criterion=criterion, z=z, labels=labels)
    for m in rset.members:
        acc.add(m.prediction)
    return acc.result()


class MultiplicityAccumulator:
    """Streaming ambiguity/discrepancy against a fixed reference.

    State is one N-bit OR vector and a running maximum; accumulators merge
    associatively, so concurrent partials combine to the batch answer.
    """

    def __init__(self, reference: PredictionVector, collect_per_model: bool = False):
        self.reference = reference
        self._or_acc = 0
        self._max_dist = None
        self._count = 0
        self._per_model = [] if collect_per_model else None

    def add(self, p: PredictionVector) -> None:
        if p.n_examples != self.reference.n_examples:
            raise LengthMismatchError("prediction length differs from reference")
        diff = p.bits ^ self.reference.bits
        self._or_acc |= diff
        d = popcount(diff) / p.n_examples
        if self._max_dist is None or d > self._max_dist:
            self._max_dist = d
        self._count += 1
        if self._per_model is not None:
            self._per_model.append(d)

    def merge(self, other: "MultiplicityAccumulator") -> None:
        if other.reference.bits != self.reference.bits:
            raise ValueError("accumulators have different references")
        self._or_acc |= other._or_acc
        if other._max_dist is not None and (self._max_dist is None
                                            or other._max_dist > self._max_dist):
            self._max_dist = other._max_dist
        self._count += other._count
        if self._per_model is not None and other._per_model is not None:
            self._per_model.extend(other._per_model)

    def result(self) -> MultiplicityReport:
        if self._count == 0:
            raise EmptySetError("no models accumulated")
        return MultiplicityReport(
            ambiguity=popcount(self._or_acc) / self.reference.n_examples,
            discrepancy=self._max_dist,
            per_model_distance=self._per_model if self._per_model is not None else [])


class FairnessAccumulator:
    """Streaming unfairness range; retains per-model scores for histograms."""

    def __init__(self, criterion: str, z: SensitiveVector, labels: int):
        if criterion not in (DP, EO):
            raise InvalidParameterError(f"criterion must be {DP!r} or {EO!r}")
        self.criterion = criterion
        self.z = z
        self.labels = labels
        self.scores: list[float] = []

    def add(self, p: PredictionVector) -> None:
        if self.criterion == DP:
            s = demographic_parity(p, self.z)
        else:
            s = equal_opportunity(p, self.z, self.labels)
        self.scores.append(s)

    def merge(self, other: "FairnessAccumulator") -> None:
        if other.criterion != self.criterion:
            raise ValueError("accumulators measure different criteria")
        self.scores.extend(other.scores)

    def result(self) -> UnfairnessRange:
        if not self.scores:
            raise EmptySetError("no models accumulated")
        return UnfairnessRange(criterion=self.criterion, lo=min(self.scores),
                               hi=max(self.scores), per_model_score=list(self.scores))
