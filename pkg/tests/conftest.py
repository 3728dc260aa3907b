import random

import pytest

from rashomon.bitvec import from_bits
from rashomon.dataset import BinaryDataset
from rashomon.vocabulary import mine_terms


@pytest.fixture
def toy_dataset():
    """The 4-row instance used throughout: a=[1,1,0,0], b=[0,1,1,0], y=[1,1,0,0]."""
    return BinaryDataset(
        n_examples=4,
        n_features=2,
        features=(from_bits([1, 1, 0, 0]), from_bits([0, 1, 1, 0])),
        labels=from_bits([1, 1, 0, 0]),
        feature_names=("a", "b"),
    )


@pytest.fixture
def toy_vocab(toy_dataset):
    return mine_terms(toy_dataset, 1, 0.5)


def random_instance(seed: int, max_terms: int = 6):
    """Small random dataset plus a mined vocabulary of at most max_terms."""
    rng = random.Random(seed)
    n = rng.randint(8, 64)
    j = rng.randint(3, 6)
    while True:
        features = tuple(
            from_bits([1 if rng.random() < rng.uniform(0.2, 0.8) else 0 for _ in range(n)])
            for _ in range(j)
        )
        labels = from_bits([rng.randint(0, 1) for _ in range(n)])
        if labels:   # at least one positive so coverage mining is defined
            break
    dataset = BinaryDataset(n_examples=n, n_features=j, features=features,
                            labels=labels, feature_names=tuple(f"f{i}" for i in range(j)))
    max_len = rng.choice((1, 2))
    coverage = rng.choice((0.0, 0.25, 0.5))
    vocab = mine_terms(dataset, max_len, coverage)
    if len(vocab) == 0:
        vocab = mine_terms(dataset, 1, 0.0)
    if len(vocab) > max_terms:
        vocab = vocab.restrict(range(max_terms))
    return dataset, vocab


ATOL = 1e-12   # float comparisons on ratios that are exact by construction

ACCEPTANCE_RESULTS: dict[str, str] = {}


def record_acceptance(name: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS[name] = ("PASS" if passed else "FAIL") + (f" {detail}" if detail else "")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{name}: {ACCEPTANCE_RESULTS[name]}")
