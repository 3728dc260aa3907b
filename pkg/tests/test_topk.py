from fractions import Fraction

import pytest

from rashomon.bitvec import from_bits
from rashomon.dataset import BinaryDataset
from rashomon.errors import InvalidParameterError
from rashomon.optimizer import fit_optimal
from rashomon.topk import topk
from rashomon.vocabulary import mine_terms

from conftest import random_instance
from oracle import grouped_topk_scores


def test_toy_first_two_answers(toy_dataset, toy_vocab):
    result = topk(toy_dataset, toy_vocab, 2, 0, 2)
    assert result.complete
    assert len(result.answers) == 2
    first, second = result.answers
    assert first.score == 0.0
    assert first.term_set == frozenset({0})
    assert second.score == 0.5   # best list avoiding term a
    assert [a.score for a in result.answers] == sorted(a.score for a in result.answers)


def test_k1_equals_fit_optimal(toy_dataset, toy_vocab):
    result = topk(toy_dataset, toy_vocab, 2, 0, 1)
    fit = fit_optimal(toy_dataset, toy_vocab, 2, 0)
    assert result.answers[0].score_exact == fit.objective_exact
    assert result.answers[0].rule_list == fit.best


def test_k_exceeding_reachable_sets_terminates(toy_dataset, toy_vocab):
    result = topk(toy_dataset, toy_vocab, 2, 0, 50)
    assert result.complete
    # distinct term sets at total length <= 2 over {a, b}: {}, {a}, {b}
    assert len(result.answers) == 3
    assert len(result.seen_term_sets) == 3


def test_term_sets_pairwise_distinct(toy_dataset, toy_vocab):
    result = topk(toy_dataset, toy_vocab, 2, 0, 10)
    sets = [a.term_set for a in result.answers]
    assert len(set(sets)) == len(sets)


def test_invalid_k(toy_dataset, toy_vocab):
    with pytest.raises(InvalidParameterError):
        topk(toy_dataset, toy_vocab, 2, 0, 0)


def test_timeout_partial(toy_dataset, toy_vocab):
    result = topk(toy_dataset, toy_vocab, 2, 0, 3, timeout_s=-1)
    assert not result.complete


@pytest.mark.parametrize("lam", [0, Fraction(3, 200)])
def test_agreement_with_grouped_enumeration(lam):
    for seed in range(10):
        dataset, vocab = random_instance(seed)
        k = 10
        expected = grouped_topk_scores(dataset, vocab, 3, lam, k)
        result = topk(dataset, vocab, 3, lam, k)
        assert result.complete
        got = [a.score_exact for a in result.answers]
        assert got == expected[:len(got)], f"seed {seed}"
        assert len(got) == min(k, len(expected))


def test_superset_term_sets_are_reachable():
    # the optimum uses {a} alone; the best {a, b} list scores strictly between
    # {a} and {b}, so removal-only branching would miss it
    ds = BinaryDataset(
        n_examples=6, n_features=2,
        features=(from_bits([1, 1, 1, 0, 0, 0]), from_bits([0, 0, 0, 1, 1, 0])),
        labels=from_bits([1, 1, 1, 0, 0, 0]),
        feature_names=("a", "b"))
    vocab = mine_terms(ds, 1, 0.0)
    expected = grouped_topk_scores(ds, vocab, 3, 0, 4)
    result = topk(ds, vocab, 3, 0, 4)
    assert [a.score_exact for a in result.answers] == expected
    # the second-best distinct term set is {a, b} at score 0
    assert result.answers[1].score == 0.0
    assert result.answers[1].term_set == frozenset({0, 1})


def test_constant_optimum_still_branches():
    # when the best list is constant (uses no terms), the literal removal
    # loop has nothing to remove; regeneration must keep the queue alive
    ds = BinaryDataset(
        n_examples=4, n_features=2,
        features=(from_bits([1, 1, 0, 0]), from_bits([0, 0, 1, 0])),
        labels=from_bits([1, 1, 1, 1]),
        feature_names=("a", "b"))
    vocab = mine_terms(ds, 1, 0.0)
    result = topk(ds, vocab, 2, 0, 3)
    assert result.complete
    assert len(result.answers) == 3
    assert result.answers[0].term_set == frozenset()
    assert {a.score for a in result.answers} == {0.0}


@pytest.mark.parametrize("seed", range(6))
def test_full_ranking_matches_oracle(seed):
    # k large enough to exhaust every distinct term set: the entire ranking
    # must agree with grouping the exhaustive universe
    dataset, vocab = random_instance(seed + 200)
    expected = grouped_topk_scores(dataset, vocab, 3, Fraction(3, 200), 10**6)
    result = topk(dataset, vocab, 3, Fraction(3, 200), 10**6)
    assert result.complete
    assert [a.score_exact for a in result.answers] == expected
    assert len(result.answers) == len(expected)


def test_seen_set_growth_tracks_answers(toy_dataset, toy_vocab):
    small = topk(toy_dataset, toy_vocab, 2, 0, 1)
    large = topk(toy_dataset, toy_vocab, 2, 0, 3)
    assert len(small.seen_term_sets) == 1
    assert len(large.seen_term_sets) == 3


def test_length_one_lists_have_single_term_set(toy_dataset, toy_vocab):
    # at total length 1 only default-rule lists exist, so the empty term set
    # is the entire ranking space
    result = topk(toy_dataset, toy_vocab, 1, 0, 5)
    assert result.complete
    assert len(result.answers) == 1
    assert result.answers[0].term_set == frozenset()
