#!/usr/bin/env python3
"""Benchmark the enumeration backends against each other.

Two workload shapes on synthetic binarized data:

  emit-heavy   threshold never binds, every candidate is a solution; both
               backends pay the same Python cost per emitted solution, so
               this measures the floor.
  prune-heavy  threshold close to the optimum with a counting-only sink;
               nearly all time is capture/popcount kernel work, where the
               compiled core avoids per-node interpreter overhead.

The largest emit-heavy case matches the COMPAS protocol's shape (~6.5k
examples, 64 terms, total length <= 3).  Both backends must agree on
candidate and solution counts exactly.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import random
import time

from rashomon.bitvec import from_bits
from rashomon.dataset import BinaryDataset
from rashomon.enumerator import EnumConfig, available_backends, enumerate_rashomon
from rashomon.optimizer import fit_optimal
from rashomon.vocabulary import mine_terms


def synthetic(n, j, seed):
    rng = random.Random(seed)
    features = tuple(
        from_bits([1 if rng.random() < rng.uniform(0.2, 0.8) else 0 for _ in range(n)])
        for _ in range(j))
    labels = from_bits([rng.randint(0, 1) for _ in range(n)])
    return BinaryDataset(n_examples=n, n_features=j, features=features,
                         labels=labels, feature_names=tuple(f"f{i}" for i in range(j)))


def timed(dataset, vocab, config, backend, counting, repeats):
    best = None
    stats = None
    solutions = 0
    for _ in range(repeats):
        if counting:
            sink = None
        else:
            box = [0]

            def sink(_):
                box[0] += 1

        t0 = time.perf_counter()
        stats = enumerate_rashomon(dataset, vocab, config, sink, backend=backend)
        elapsed = time.perf_counter() - t0
        solutions = stats.solutions
        best = elapsed if best is None else min(best, elapsed)
    return best, solutions, stats


def bench_case(label, dataset, vocab, config, backends, counting, repeats):
    times = {}
    counts = {}
    for backend in backends:
        elapsed, solutions, stats = timed(dataset, vocab, config, backend,
                                          counting, repeats)
        times[backend] = elapsed
        counts[backend] = (stats.candidates_visited, solutions)
        per_cand = elapsed / stats.candidates_visited * 1e6
        print(f"{label:>32} {backend:>9} {elapsed:>8.3f}s "
              f"{stats.candidates_visited:>11} {per_cand:>8.2f} {solutions:>10}")
    if len(backends) == 2:
        assert counts["python"] == counts["compiled"], "backend disagreement!"
        print(f"{'':>42} agreement ok, speedup x"
              f"{times['python'] / max(times['compiled'], 1e-9):.1f}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="small sizes only")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled core not built; timing the pure-Python walk only")

    header = (f"{'case':>32} {'backend':>9} {'time':>9} {'candidates':>11} "
              f"{'us/cand':>8} {'solutions':>10}")
    print(header)
    print("-" * len(header))

    emit_cases = [(200, 16, 5), (1000, 32, 3)]
    if not args.quick:
        emit_cases.append((6489, 64, 1))
    for n, j, repeats in emit_cases:
        dataset = synthetic(n, j, seed=n)
        vocab = mine_terms(dataset, 1, 0.0)
        config = EnumConfig(max_total_len=3, threshold_errors=n)
        bench_case(f"emit-heavy N={n} |T|={len(vocab)} L=3", dataset, vocab,
                   config, backends, counting=False, repeats=repeats)

    prune_cases = [(200, 24, 3, 5)]
    if not args.quick:
        prune_cases.append((200, 24, 4, 3))
        prune_cases.append((2000, 32, 3, 3))
    for n, j, max_len, repeats in prune_cases:
        dataset = synthetic(n, j, seed=n + max_len)
        vocab = mine_terms(dataset, 1, 0.0)
        ref = fit_optimal(dataset, vocab, max_len, 0)
        config = EnumConfig(max_total_len=max_len,
                            threshold_errors=ref.n_errors + n // 50)
        bench_case(f"prune-heavy N={n} |T|={len(vocab)} L={max_len}", dataset,
                   vocab, config, backends, counting=True, repeats=repeats)

    print("\nper-candidate cost scales with the example count and stays flat in "
          "the number of solutions; the compiled core's gain is interpreter "
          "overhead per candidate, so it grows with search depth and shrinks "
          "as emission work dominates.")


if __name__ == "__main__":
    main()
