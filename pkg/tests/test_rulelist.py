import random
from itertools import permutations

import pytest

from rashomon.bitvec import from_bits, to_bits
from rashomon.errors import DuplicateTermError
from rashomon.rulelist import (
    EMPTY_PREFIX,
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

from conftest import random_instance


def make_list(pairs, default, vocab, dataset):
    prefix = EMPTY_PREFIX
    for term_id, label in pairs:
        prefix = extend(prefix, Rule(term_id=term_id, label=label), vocab, dataset)
    return RuleList(prefix=prefix, default_label=default)


def test_predict_scalar(toy_dataset, toy_vocab):
    d = make_list([(0, 1)], 0, toy_vocab, toy_dataset)
    assert predict(d, (1, 0), toy_vocab) == 1
    assert predict(d, (0, 1), toy_vocab) == 0
    empty = RuleList(prefix=EMPTY_PREFIX, default_label=1)
    assert predict(empty, (0, 0), toy_vocab) == 1


def test_prediction_vector(toy_dataset, toy_vocab):
    d = make_list([(0, 1)], 0, toy_vocab, toy_dataset)
    assert prediction_vector(d, toy_dataset, toy_vocab).bits == from_bits([1, 1, 0, 0])
    d = make_list([(1, 1)], 0, toy_vocab, toy_dataset)
    assert prediction_vector(d, toy_dataset, toy_vocab).bits == from_bits([0, 1, 1, 0])
    d = RuleList(prefix=EMPTY_PREFIX, default_label=0)
    assert prediction_vector(d, toy_dataset, toy_vocab).bits == 0


def test_vectorized_matches_scalar_everywhere():
    for seed in range(10):
        dataset, vocab = random_instance(seed)
        rng = random.Random(seed + 1000)
        ids = rng.sample(range(len(vocab)), min(2, len(vocab)))
        pairs = [(t, rng.randint(0, 1)) for t in ids]
        d = make_list(pairs, rng.randint(0, 1), vocab, dataset)
        pv = prediction_vector(d, dataset, vocab).bits
        for n in range(dataset.n_examples):
            row = [(col >> n) & 1 for col in dataset.features]
            assert ((pv >> n) & 1) == predict(d, row, vocab)


def test_empirical_risk(toy_dataset, toy_vocab):
    assert empirical_risk(make_list([(0, 1)], 0, toy_vocab, toy_dataset),
                          toy_dataset, toy_vocab) == 0.0
    assert empirical_risk(make_list([(1, 1)], 0, toy_vocab, toy_dataset),
                          toy_dataset, toy_vocab) == 0.5
    assert empirical_risk(RuleList(prefix=EMPTY_PREFIX, default_label=0),
                          toy_dataset, toy_vocab) == 0.5


def test_risk_is_count_over_n(toy_dataset, toy_vocab):
    d = make_list([(1, 1)], 0, toy_vocab, toy_dataset)
    count = misclassification_count(d, toy_dataset, toy_vocab)
    assert count == 2
    assert empirical_risk(d, toy_dataset, toy_vocab) == count / 4


def test_objective(toy_dataset, toy_vocab):
    d = make_list([(0, 1)], 0, toy_vocab, toy_dataset)
    assert objective(d, toy_dataset, toy_vocab, 0.1) == pytest.approx(0.2)
    assert objective(d, toy_dataset, toy_vocab, 0) == empirical_risk(d, toy_dataset, toy_vocab)
    const = RuleList(prefix=EMPTY_PREFIX, default_label=0)
    assert objective(const, toy_dataset, toy_vocab, 0.015) == pytest.approx(0.515)


def test_lower_bound_examples(toy_dataset, toy_vocab):
    p = extend(EMPTY_PREFIX, Rule(1, 1), toy_vocab, toy_dataset)
    assert lower_bound(p, toy_dataset) == 0.25
    assert lower_bound(EMPTY_PREFIX, toy_dataset) == 0.0
    p = extend(EMPTY_PREFIX, Rule(0, 0), toy_vocab, toy_dataset)
    assert lower_bound(p, toy_dataset) == 0.5


def test_lower_bound_bounds_all_extensions(toy_dataset, toy_vocab):
    # exhaustive: LB(prefix) <= risk of every list extending it (lam = 0)
    for first in range(len(toy_vocab)):
        for y in (0, 1):
            p = extend(EMPTY_PREFIX, Rule(first, y), toy_vocab, toy_dataset)
            lb = lower_bound(p, toy_dataset)
            for default in (0, 1):
                d = RuleList(prefix=p, default_label=default)
                assert lb <= empirical_risk(d, toy_dataset, toy_vocab)
            for second in range(len(toy_vocab)):
                if second == first:
                    continue
                for y2 in (0, 1):
                    p2 = extend(p, Rule(second, y2), toy_vocab, toy_dataset)
                    assert lower_bound(p2, toy_dataset) >= lb   # monotone
                    for default in (0, 1):
                        d = RuleList(prefix=p2, default_label=default)
                        assert lb <= empirical_risk(d, toy_dataset, toy_vocab)


def test_extend_state(toy_dataset, toy_vocab):
    p = extend(EMPTY_PREFIX, Rule(0, 1), toy_vocab, toy_dataset)
    assert to_bits(p.captured, 4) == [1, 1, 0, 0]
    assert p.errors_captured == 0
    assert p.newly_captured == (2,)
    p2 = extend(p, Rule(1, 1), toy_vocab, toy_dataset)
    assert p2.newly_captured == (2, 1)     # only x3 is new; x2 already captured
    assert p2.errors_captured == 1
    assert p.newly_captured == (2,)        # parent untouched


def test_extend_no_new_capture(toy_dataset):
    from rashomon.vocabulary import mine_terms
    vocab = mine_terms(toy_dataset, 2, 0.0)   # includes a, a & b, b
    a = vocab.by_name()["a"].id
    ab = vocab.by_name()["a & b"].id
    p = extend(EMPTY_PREFIX, Rule(a, 1), vocab, toy_dataset)
    p2 = extend(p, Rule(ab, 0), vocab, toy_dataset)
    assert p2.newly_captured[-1] == 0
    assert p2.captured == p.captured
    assert p2.errors_captured == p.errors_captured


def test_extend_duplicate_term(toy_dataset, toy_vocab):
    p = extend(EMPTY_PREFIX, Rule(0, 1), toy_vocab, toy_dataset)
    with pytest.raises(DuplicateTermError):
        extend(p, Rule(0, 0), toy_vocab, toy_dataset)


def test_is_canonical():
    from rashomon.rulelist import Prefix
    p5 = Prefix(rules=(Rule(5, 1),))
    assert is_canonical(p5, Rule(3, 1)) is False
    assert is_canonical(p5, Rule(3, 0)) is True
    assert is_canonical(EMPTY_PREFIX, Rule(0, 1)) is True
    assert is_canonical(p5, Rule(7, 1)) is True


def test_equal_label_run_permutation_invariance():
    # permuting rules inside an equal-label run never changes predictions
    for seed in range(6):
        dataset, vocab = random_instance(seed)
        if len(vocab) < 3:
            continue
        rng = random.Random(seed)
        ids = rng.sample(range(len(vocab)), 3)
        label = rng.randint(0, 1)
        base = None
        for perm in permutations(ids):
            d = make_list([(t, label) for t in perm], 1 - label, vocab, dataset)
            pv = prediction_vector(d, dataset, vocab).bits
            if base is None:
                base = pv
            assert pv == base


def test_serialize_shape(toy_dataset, toy_vocab):
    d = make_list([(0, 1)], 0, toy_vocab, toy_dataset)
    n_err = misclassification_count(d, toy_dataset, toy_vocab)
    obj = serialize(d, toy_vocab, n_err, toy_dataset.n_examples, lam=0.1)
    assert obj == {
        "rules": [{"term": "a", "label": 1}],
        "default": 0,
        "risk": 0.0,
        "objective": 0.2,
        "length": 2,
    }
