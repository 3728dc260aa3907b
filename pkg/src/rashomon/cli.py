"""Command-line pipeline.

Subcommands: mine, fit, enumerate, topk, compare, analyze.  Every output
artifact embeds (or sits next to, for line-oriented formats) a RunManifest
recording the command, inputs, parameters, tool version, and dataset
fingerprint, so any run can be reproduced byte-identically apart from
elapsed-time fields.

Exit codes: 0 success, 2 usage error, 3 data error, 4 timeout-partial.
"""

from __future__ import annotations

import argparse
import csv
import gc
import json
import sys
import tracemalloc
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .dataset import load_csv, split
from .enumerator import (
    EnumConfig,
    compute_threshold,
    enumerate_rashomon,
    sweep_tolerances,
)
from .errors import DataError, RashomonError, UsageError
from .metrics import (
    DP,
    EO,
    FairnessAccumulator,
    MultiplicityAccumulator,
    demographic_parity,
    equal_opportunity,
    hamming_distance,
)
from .optimizer import fit_optimal
from .rulelist import deserialize, prediction_vector, serialize
from .topk import topk as run_topk
from .vocabulary import load_terms_file, mine_terms, save_terms_file


@dataclass
class RunManifest:
    command: str
    inputs: dict
    parameters: dict
    tool_version: str
    dataset_fingerprint: str

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "dataset_fingerprint": self.dataset_fingerprint,
        }


def _manifest(command, args, dataset, extra_params=None) -> RunManifest:
    params = {
        "label_col": args.label_col,
        "sensitive_col": getattr(args, "sensitive_col", None),
        "seed": getattr(args, "seed", None),
        "threads": getattr(args, "threads", 1),
        "split_fraction": getattr(args, "split_fraction", None),
        "split_side": getattr(args, "split_side", None),
    }
    if extra_params:
        params.update(extra_params)
    inputs = {"data": args.data}
    for key in ("terms", "solutions", "reference"):
        val = getattr(args, key, None)
        if val:
            inputs[key] = val
    return RunManifest(command=command, inputs=inputs, parameters=params,
                       tool_version=__version__,
                       dataset_fingerprint=dataset.fingerprint())


def _load_dataset(args):
    dataset, sensitive = load_csv(args.data, args.label_col,
                                  getattr(args, "sensitive_col", None))
    frac = getattr(args, "split_fraction", None)
    if frac is not None:
        if sensitive is not None:
            raise UsageError("--split-fraction with --sensitive-col is not supported; "
                             "split the CSV beforehand")
        seed = getattr(args, "seed", None) or 0
        train, test = split(dataset, frac, seed)
        side = getattr(args, "split_side", "train") or "train"
        dataset = train if side == "train" else test
        if dataset.n_examples == 0:
            raise UsageError(f"--split-side {side} selected an empty partition")
    return dataset, sensitive


def _load_vocabulary(args, dataset):
    if getattr(args, "terms", None):
        return load_terms_file(args.terms, dataset.n_examples)
    if getattr(args, "mine", False):
        return mine_terms(dataset, args.mine_max_len, args.mine_coverage)
    raise UsageError("either --terms FILE or --mine is required")


def _resolve_reference(args, dataset, vocabulary):
    """Reference rule list: from --reference JSON, or fit the optimum."""
    if getattr(args, "reference", None):
        with open(args.reference, encoding="utf-8") as fh:
            obj = json.load(fh)
        serial = obj.get("rule_list", obj)
        rule_list, n_err = deserialize(serial, vocabulary, dataset)
        return rule_list, n_err, "file"
    lam = _lam(args)
    result = fit_optimal(dataset, vocabulary, args.max_len, lam,
                         min_capture=getattr(args, "min_capture", 1),
                         timeout_s=getattr(args, "timeout_s", None))
    if not result.complete:
        raise UsageError("reference fit timed out; pass --reference or raise --timeout-s")
    return result.best, result.n_errors, "fit"


def _lam(args) -> Fraction:
    raw = getattr(args, "lam", None)
    if raw is None:
        return Fraction(0)
    try:
        return Fraction(raw)   # parsed from the command line as a decimal string
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"invalid --lambda {raw!r}") from exc


def _write_json(path, obj) -> None:
    if path == "-":
        json.dump(obj, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ----------------------------------------------------------------- commands

def cmd_mine(args) -> int:
    dataset, _ = _load_dataset(args)
    vocab = mine_terms(dataset, args.max_len, args.min_coverage)
    save_terms_file(vocab, args.out)
    manifest = _manifest("mine", args, dataset,
                         {"max_len": args.max_len, "min_coverage": args.min_coverage})
    # the term-file format is bit-exact with no room for metadata: sidecar
    _write_json(args.out + ".manifest.json",
                {"n_terms": len(vocab), "manifest": manifest.to_dict()})
    print(f"mined {len(vocab)} terms -> {args.out}")
    return 0


def cmd_fit(args) -> int:
    dataset, _ = _load_dataset(args)
    vocab = _load_vocabulary(args, dataset)
    lam = _lam(args)
    result = fit_optimal(dataset, vocab, args.max_len, lam,
                         min_capture=args.min_capture, timeout_s=args.timeout_s)
    manifest = _manifest("fit", args, dataset, {
        "max_len": args.max_len, "lambda": str(lam), "min_capture": args.min_capture,
        "timeout_s": args.timeout_s,
    })
    out = {
        "rule_list": serialize(result.best, vocab, result.n_errors,
                               dataset.n_examples, lam),
        "objective": result.best_objective,
        "errors": result.n_errors,
        "nodes_visited": result.nodes_visited,
        "elapsed_ms": round(result.elapsed * 1000.0, 3),
        "complete": result.complete,
        "manifest": manifest.to_dict(),
    }
    _write_json(args.out or "-", out)
    return 0 if result.complete else 4


def cmd_enumerate(args) -> int:
    dataset, _ = _load_dataset(args)
    vocab = _load_vocabulary(args, dataset)
    lam = _lam(args)
    if args.threshold_errors is None and not args.epsilon:
        raise UsageError("need --epsilon (repeatable) or --threshold-errors")
    if args.threshold_errors is not None and args.epsilon:
        raise UsageError("--epsilon and --threshold-errors are mutually exclusive")

    stats_path = args.stats or args.out + ".stats.json"
    reference = ref_errors = None
    epsilons = sorted(float(e) for e in args.epsilon) if args.epsilon else []

    prune_flags = {
        "prune_lower_bound": not args.no_prune_lower_bound,
        "prune_min_support": not args.no_prune_min_support,
        "prune_symmetry": not args.no_prune_symmetry,
    }
    manifest = _manifest("enumerate", args, dataset, {
        "max_len": args.max_len, "lambda": str(lam), "epsilons": epsilons,
        "threshold_errors": args.threshold_errors, "min_capture": args.min_capture,
        "emit_order": args.emit_order, "backend": args.backend,
        "timeout_s": args.timeout_s, **prune_flags,
    })

    with open(args.out, "w", encoding="utf-8") as out_fh:
        if args.threshold_errors is not None:
            config = EnumConfig(max_total_len=args.max_len,
                                threshold_errors=args.threshold_errors,
                                lam=lam, min_capture=args.min_capture,
                                emit_order=args.emit_order, **prune_flags)

            def sink(sol):
                out_fh.write(json.dumps(sol.serialize(vocab, lam)) + "\n")

            stats = enumerate_rashomon(dataset, vocab, config, sink,
                                       backend=args.backend, timeout_s=args.timeout_s)
            thresholds = [args.threshold_errors]
            counts = [stats.solutions]
        else:
            reference, ref_errors, _src = _resolve_reference(args, dataset, vocab)
            ref_risk = Fraction(ref_errors, dataset.n_examples)
            thresholds = [compute_threshold(ref_risk, e, dataset.n_examples)
                          for e in epsilons]

            def sink(sol, _bucket):
                out_fh.write(json.dumps(sol.serialize(vocab, lam)) + "\n")

            sweep = sweep_tolerances(dataset, vocab, reference, epsilons,
                                     args.max_len, min_capture=args.min_capture,
                                     backend=args.backend, sink=sink,
                                     timeout_s=args.timeout_s,
                                     emit_order=args.emit_order)
            stats = sweep.stats
            counts = sweep.cumulative_counts

    stats_obj = {
        "candidates_visited": stats.candidates_visited,
        "solutions": stats.solutions,
        "nodes_visited": stats.nodes_visited,
        "peak_queue_depth": stats.peak_queue_depth,
        "elapsed_ms": round(stats.elapsed * 1000.0, 3),
        "backend": stats.backend,
        "complete": stats.complete,
        "epsilons": epsilons,
        "thresholds": thresholds,
        "cumulative_counts": counts,
        "manifest": manifest.to_dict(),
    }
    if reference is not None:
        stats_obj["reference"] = serialize(reference, vocab, ref_errors,
                                           dataset.n_examples, lam)
    _write_json(stats_path, stats_obj)
    print(f"{stats.solutions} solutions -> {args.out}")
    return 0 if stats.complete else 4


def cmd_topk(args) -> int:
    dataset, _ = _load_dataset(args)
    vocab = _load_vocabulary(args, dataset)
    lam = _lam(args)
    result = run_topk(dataset, vocab, args.max_len, lam, args.k,
                      timeout_s=args.timeout_s, min_capture=args.min_capture)
    manifest = _manifest("topk", args, dataset, {
        "max_len": args.max_len, "lambda": str(lam), "k": args.k,
        "min_capture": args.min_capture, "timeout_s": args.timeout_s,
    })
    out = {
        "answers": [
            {"score": a.score,
             "rule_list": serialize(a.rule_list, vocab, a.n_errors,
                                    dataset.n_examples, lam)}
            for a in result.answers
        ],
        "complete": result.complete,
        "stats": {
            "pops": result.pops,
            "refits": result.refits,
            "elapsed_ms": round(result.elapsed * 1000.0, 3),
            "peak_seen_sets": len(result.seen_term_sets),
            "peak_queue": result.peak_queue,
        },
        "manifest": manifest.to_dict(),
    }
    _write_json(args.out or "-", out)
    return 0 if result.complete else 4


def cmd_compare(args) -> int:
    dataset, _ = _load_dataset(args)
    vocab = _load_vocabulary(args, dataset)
    lam = _lam(args)
    budget = args.budget_s

    # enumeration side: full candidate space (threshold never binds), models
    # grouped by term set so ranks are comparable with the top-K baseline
    group_best: dict = {}
    total = [0]

    def sink(sol):
        total[0] += 1
        obj = Fraction(sol.n_errors, dataset.n_examples) + lam * sol.total_length
        key = frozenset(sol.term_ids)
        prev = group_best.get(key)
        if prev is None or obj < prev:
            group_best[key] = obj

    config = EnumConfig(max_total_len=args.max_len,
                        threshold_errors=dataset.n_examples,
                        lam=lam, min_capture=args.min_capture)
    gc.collect()
    tracemalloc.start()
    enum_stats = enumerate_rashomon(dataset, vocab, config, sink,
                                    backend=args.backend, timeout_s=budget)
    _, enum_peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    gc.collect()
    tracemalloc.start()
    lawler = run_topk(dataset, vocab, args.max_len, lam, args.k,
                      timeout_s=budget, min_capture=args.min_capture)
    _, lawler_peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    enum_series = sorted(group_best.values())[:max(args.k, len(lawler.answers))]
    rows = [(rank + 1, float(obj), "enumerate") for rank, obj in enumerate(enum_series)]
    rows += [(rank + 1, a.score, "lawler") for rank, a in enumerate(lawler.answers)]
    csv_path = args.out_prefix + ".rank_objective.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "objective", "method"])
        writer.writerows(rows)

    manifest = _manifest("compare", args, dataset, {
        "max_len": args.max_len, "lambda": str(lam), "k": args.k,
        "budget_s": budget, "min_capture": args.min_capture,
    })
    report = {
        "enumerate": {
            "models": total[0],
            "distinct_term_sets": len(group_best),
            "elapsed_ms": round(enum_stats.elapsed * 1000.0, 3),
            "complete": enum_stats.complete,
            "peak_live_prefixes": enum_stats.peak_queue_depth + 1,
            "peak_traced_bytes": enum_peak,
            "backend": enum_stats.backend,
        },
        "lawler": {
            "models": len(lawler.answers),
            "elapsed_ms": round(lawler.elapsed * 1000.0, 3),
            "complete": lawler.complete,
            "seen_term_sets": len(lawler.seen_term_sets),
            "refits": lawler.refits,
            "peak_traced_bytes": lawler_peak,
        },
        "note": "peak_traced_bytes is a Python-allocation high-water mark; "
                "treat it as relative, not absolute",
        "manifest": manifest.to_dict(),
    }
    _write_json(args.out_prefix + ".report.json", report)
    print(f"enumerate: {total[0]} models ({'complete' if enum_stats.complete else 'partial'}), "
          f"lawler: {len(lawler.answers)} answers "
          f"({'complete' if lawler.complete else 'partial'})")
    return 0


def cmd_analyze(args) -> int:
    dataset, sensitive = _load_dataset(args)
    vocab = _load_vocabulary(args, dataset)
    if args.fairness and sensitive is None:
        raise UsageError("--fairness requires --sensitive-col")
    if not args.epsilon:
        raise UsageError("--epsilon is required (repeatable)")
    epsilons = sorted(float(e) for e in args.epsilon)
    reference, ref_errors, _src = _resolve_reference(args, dataset, vocab)
    ref_pv = prediction_vector(reference, dataset, vocab)
    ref_risk = Fraction(ref_errors, dataset.n_examples)
    bounds = [compute_threshold(ref_risk, e, dataset.n_examples) for e in epsilons]

    mult = [MultiplicityAccumulator(ref_pv, collect_per_model=True) for _ in epsilons]
    fair = {}
    warnings_out = []
    if args.fairness:
        # group preconditions depend only on (z, labels): probe once, and
        # keep reporting the criteria that remain well defined
        for crit, probe in ((DP, lambda: demographic_parity(ref_pv, sensitive)),
                            (EO, lambda: equal_opportunity(ref_pv, sensitive,
                                                           dataset.labels))):
            try:
                probe()
            except DataError as exc:
                warnings_out.append(f"{crit}: {exc}")
                continue
            fair[crit] = [FairnessAccumulator(crit, sensitive, dataset.labels)
                          for _ in epsilons]

    n_models = [0] * len(epsilons)
    per_model_rows = []
    with open(args.solutions, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{args.solutions}:{line_no}: invalid JSON") from exc
            rl, n_err = deserialize(obj, vocab, dataset)
            pv = prediction_vector(rl, dataset, vocab)
            dist = hamming_distance(pv, ref_pv)
            dp_score = demographic_parity(pv, sensitive) if DP in fair else None
            eo_score = equal_opportunity(pv, sensitive, dataset.labels) if EO in fair else None
            min_eps = None
            for i, bound in enumerate(bounds):
                if n_err <= bound:
                    if min_eps is None:
                        min_eps = epsilons[i]
                    n_models[i] += 1
                    mult[i].add(pv)
                    if DP in fair:
                        fair[DP][i].add(pv)
                    if EO in fair:
                        fair[EO][i].add(pv)
            if min_eps is not None:
                per_model_rows.append((line_no, min_eps, n_err / dataset.n_examples,
                                       dist, dp_score, eo_score))

    report_rows = []
    for i, eps in enumerate(epsilons):
        entry = {"epsilon": eps, "threshold_errors": bounds[i], "n_models": n_models[i]}
        if n_models[i] > 0:
            rep = mult[i].result()
            entry["ambiguity"] = rep.ambiguity
            entry["discrepancy"] = rep.discrepancy
        else:
            entry["ambiguity"] = None
            entry["discrepancy"] = None
        for crit, key in ((DP, "dp_range"), (EO, "eo_range")):
            if crit in fair and n_models[i] > 0:
                rng = fair[crit][i].result()
                entry[key] = [rng.lo, rng.hi]
            else:
                entry[key] = None
        report_rows.append(entry)

    manifest = _manifest("analyze", args, dataset, {
        "epsilons": epsilons, "fairness": bool(args.fairness),
        "max_len": getattr(args, "max_len", None),
        "lambda": str(_lam(args)),
    })
    report = {
        "reference": serialize(reference, vocab, ref_errors, dataset.n_examples, _lam(args)),
        "levels": report_rows,
        "warnings": warnings_out,
        "manifest": manifest.to_dict(),
    }
    _write_json(args.out_prefix + ".report.json", report)

    with open(args.out_prefix + ".summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "metric", "value"])
        for entry in report_rows:
            for metric in ("n_models", "ambiguity", "discrepancy"):
                writer.writerow([entry["epsilon"], metric, entry[metric]])
            for key in ("dp_range", "eo_range"):
                if entry[key] is not None:
                    writer.writerow([entry["epsilon"], key + "_lo", entry[key][0]])
                    writer.writerow([entry["epsilon"], key + "_hi", entry[key][1]])

    with open(args.out_prefix + ".models.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "min_epsilon", "risk", "distance_to_reference", "dp", "eo"])
        writer.writerows(per_model_rows)

    for w in warnings_out:
        print(f"warning: {w}", file=sys.stderr)
    print(f"analyzed {len(per_model_rows)} models -> {args.out_prefix}.report.json")
    return 0


# -------------------------------------------------------------------- parser

def _add_data_options(p):
    p.add_argument("--data", required=True, help="binarized CSV (header, 0/1 cells)")
    p.add_argument("--label-col", default="y", help="label column name (default: y)")
    p.add_argument("--sensitive-col", default=None,
                   help="sensitive attribute column (excluded from features, "
                        "never usable as a rule term)")
    p.add_argument("--split-fraction", type=float, default=None,
                   help="train fraction; keeps one deterministic side of a seeded split")
    p.add_argument("--split-side", choices=("train", "test"), default="train")
    p.add_argument("--seed", type=int, default=0, help="seed for --split-fraction")
    p.add_argument("--threads", type=int, default=1,
                   help="recorded in the manifest; current builds run single-threaded")


def _add_vocab_options(p):
    p.add_argument("--terms", help="pre-mined term-capture file")
    p.add_argument("--mine", action="store_true", help="mine terms from the data instead")
    p.add_argument("--mine-max-len", type=int, default=1,
                   help="max conjunction length when mining inline")
    p.add_argument("--mine-coverage", type=float, default=0.5,
                   help="min fraction of positives a mined term must capture")


def _add_search_options(p):
    p.add_argument("--max-len", type=int, required=True,
                   help="maximum rule list length, default rule included")
    p.add_argument("--lambda", dest="lam", default="0",
                   help="length penalty per rule (decimal string, exact)")
    p.add_argument("--min-capture", type=int, default=1,
                   help="min newly captured examples per non-default rule")
    p.add_argument("--timeout-s", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rashomon",
        description="Enumerate and analyze all good rule lists on a binary dataset")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="write a coverage-filtered term-capture file")
    _add_data_options(p)
    p.add_argument("--max-len", type=int, default=1, help="max conjunction length")
    p.add_argument("--min-coverage", type=float, default=0.5,
                   help="min fraction of positives a term must capture")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("fit", help="fit the single optimal rule list")
    _add_data_options(p)
    _add_vocab_options(p)
    _add_search_options(p)
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("enumerate", help="stream every rule list within tolerance")
    _add_data_options(p)
    _add_vocab_options(p)
    _add_search_options(p)
    p.add_argument("--epsilon", action="append", default=[],
                   help="error tolerance; repeat for a sweep")
    p.add_argument("--threshold-errors", type=int, default=None,
                   help="explicit misclassification bound instead of --epsilon")
    p.add_argument("--reference", default=None,
                   help="JSON file with the reference rule list (else fit one)")
    p.add_argument("--emit-order", choices=("dfs", "sorted"), default="dfs")
    p.add_argument("--backend", choices=("auto", "python", "compiled"), default="auto")
    p.add_argument("--no-prune-lower-bound", action="store_true")
    p.add_argument("--no-prune-min-support", action="store_true")
    p.add_argument("--no-prune-symmetry", action="store_true")
    p.add_argument("--out", required=True, help="solutions JSONL path")
    p.add_argument("--stats", default=None, help="stats JSON path (default: OUT.stats.json)")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("topk", help="top-K good rule lists (Lawler baseline)")
    _add_data_options(p)
    _add_vocab_options(p)
    _add_search_options(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=None, help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("compare", help="run enumerator and top-K under one budget")
    _add_data_options(p)
    _add_vocab_options(p)
    _add_search_options(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--budget-s", type=float, default=60.0,
                   help="shared wall-clock budget per method")
    p.add_argument("--backend", choices=("auto", "python", "compiled"), default="auto")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze", help="multiplicity and fairness of a solution file")
    _add_data_options(p)
    _add_vocab_options(p)
    p.add_argument("--solutions", required=True, help="JSONL from the enumerate command")
    p.add_argument("--reference", default=None,
                   help="JSON file with the reference rule list (else fit one)")
    p.add_argument("--max-len", type=int, default=None,
                   help="needed only when fitting the reference here")
    p.add_argument("--lambda", dest="lam", default="0")
    p.add_argument("--min-capture", type=int, default=1)
    p.add_argument("--timeout-s", type=float, default=None)
    p.add_argument("--epsilon", action="append", default=[],
                   help="tolerance bucket; repeatable")
    p.add_argument("--fairness", action="store_true",
                   help="also compute DP/EO ranges (needs --sensitive-col)")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    if getattr(args, "command", None) == "analyze" and not args.reference and args.max_len is None:
        parser.error("analyze needs --reference or --max-len (to fit one)")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except RashomonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
