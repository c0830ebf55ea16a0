"""Command-line interface.

Subcommands: ``train``, ``infer``, ``eval``, ``check-identifiability``,
``synth``, ``train-end``, ``bench``. Every failure exits nonzero after
printing a single machine-greppable line ``error: <code>: <message>`` to
stderr; exit codes are stable per error class (see README).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fileio
from .baselines import UNLABELED, nearest_class, lfs_only
from .bench import DEFAULT_NAIVE_CAP, run_bench
from .endmodel import EndModelConfig, fit_linear, validate_soft_labels
from .errors import EngineError, ParseError
from .identifiability import (
    check_identifiability,
    grouped_conditional_matrix,
    numeric_rank,
)
from .labels import coverage_filter
from .metrics import macro_f1, micro_accuracy
from .model import posterior
from .synthetic import sample
from .training import TrainConfig, fit

INFER_METHODS = ("nplm", "nc", "lfs-only")


def _add_train(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("train", help="fit the label model and write a params file")
    p.add_argument("--spec", required=True, help="labeler spec file (JSON)")
    p.add_argument("--votes", required=True, help="votes file (CSV)")
    p.add_argument("--out", required=True, help="output params file (JSON)")
    p.add_argument("--report", help="optional JSON training report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--optimizer", choices=("sgd", "adam"), default="sgd")
    p.add_argument("--balance", choices=("fixed", "learned"), default="fixed")
    p.add_argument(
        "--filter-uncovered",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="drop rows where every labeler abstained (default: on)",
    )


def cmd_train(args: argparse.Namespace) -> int:
    project = fileio.load_spec_file(args.spec)
    votes = fileio.load_votes(args.votes, project)
    config = TrainConfig(
        batch_size=args.batch_size,
        epochs=args.epochs,
        optimizer=args.optimizer,
        initial_lr=args.lr,
        seed=args.seed,
        learn_balance=(args.balance == "learned"),
    )
    report = fit(project.specs, votes, config, filter_uncovered=args.filter_uncovered)
    fileio.save_params(args.out, report.params)
    print(
        f"trained {project.n} labelers on {votes.m} examples: "
        f"final log-likelihood {report.trace[-1]:.6f}, "
        f"{report.batches} batches in {report.seconds:.2f}s"
    )
    if args.report:
        doc = {
            "trace": list(report.trace),
            "batches": report.batches,
            "seconds": report.seconds,
            "epochs": args.epochs,
        }
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def _add_infer(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("infer", help="write posteriors (nplm) or hard labels (nc, lfs-only)")
    p.add_argument("--spec", required=True)
    p.add_argument("--votes", required=True)
    p.add_argument("--method", choices=INFER_METHODS, default="nplm")
    p.add_argument("--params", help="params file; required for nplm, optional prior for nc")
    p.add_argument("--out", required=True)


def cmd_infer(args: argparse.Namespace) -> int:
    project = fileio.load_spec_file(args.spec)
    votes = fileio.load_votes(args.votes, project)
    if args.method == "nplm":
        if not args.params:
            raise ParseError("--method nplm requires --params")
        params = fileio.load_params(args.params)
        post = posterior(project.specs, params, votes)
        fileio.save_posterior(args.out, post.probs, project.class_names)
        print(f"wrote posterior for {votes.m} examples to {args.out}")
        return 0

    balance = None
    if args.params:
        balance = fileio.load_params(args.params).class_balance
    if args.method == "nc":
        labels = nearest_class(project.specs, votes, balance).labels
    else:  # lfs-only: keep traditional LFs, then nearest-class (= plurality) vote
        kept, reduced = lfs_only(project.specs, votes)
        if kept:
            labels = nearest_class(kept, reduced, balance).labels
        else:
            labels = np.full(votes.m, UNLABELED, dtype=np.int64)
            print("warning: no traditional labeling functions; all rows unlabeled")
    fileio.save_labels(args.out, labels, project.class_names)
    covered = int((labels != UNLABELED).sum())
    print(f"wrote hard labels to {args.out} ({covered}/{votes.m} rows labeled)")
    return 0


def _add_eval(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("eval", help="micro accuracy and macro F1 against gold labels")
    p.add_argument("--spec", required=True)
    p.add_argument("--pred", required=True, help="posterior or hard-label file")
    p.add_argument("--gold", required=True, help="gold label file")


def cmd_eval(args: argparse.Namespace) -> int:
    project = fileio.load_spec_file(args.spec)
    gold = fileio.load_labels(args.gold, project.class_names)

    with open(args.pred, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if first == "label":
        pred = fileio.load_labels(args.pred, project.class_names)
    else:
        probs, header = fileio.load_posterior(args.pred)
        if header != project.class_names:
            raise ParseError(
                f"posterior columns {header!r} do not match classes "
                f"{project.class_names!r}"
            )
        pred = probs.argmax(axis=1)
    if pred.shape != gold.shape:
        raise ParseError(
            f"{pred.shape[0]} predictions vs {gold.shape[0]} gold labels"
        )
    result = {
        "accuracy": micro_accuracy(pred, gold),
        "macro_f1": macro_f1(pred, gold, project.k),
    }
    print(json.dumps(result, indent=2))
    return 0


def _add_check(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser(
        "check-identifiability",
        help="search for a labeler tripartition certifying recoverable accuracies",
    )
    p.add_argument("--spec", required=True)
    p.add_argument("--json", dest="json_out", help="write a machine-readable report")
    p.add_argument("--seed", type=int, default=0, help="seed for the numeric rank probe")
    p.add_argument(
        "--rank-cap",
        type=int,
        default=100_000,
        help="skip the rank probe when the joint outcome matrix exceeds this many entries",
    )


def cmd_check(args: argparse.Namespace) -> int:
    project = fileio.load_spec_file(args.spec)
    report = check_identifiability(project.specs, project.space)

    print(f"labelers: {report.n_plfs}, classes: {project.k}")
    print(f"status: {report.status}")
    print(f"detail: {report.detail}")

    rank_info = {}
    tri = report.tripartition
    if tri is not None:
        names = [spec.name for spec in project.specs]
        for label, group in (("s1", tri.s1), ("s2", tri.s2), ("s3", tri.s3)):
            print(f"  {label}: {[names[i] for i in group]}")
        rng = np.random.Generator(np.random.Philox(args.seed))
        for label, group in (("s1", tri.s1), ("s2", tri.s2)):
            subset = [project.specs[i] for i in group]
            alpha = rng.uniform(0.55, 0.95, size=(len(subset), project.k))
            beta = rng.uniform(0.5, 0.95, size=len(subset))
            entries = project.k
            for spec in subset:
                entries *= spec.n_outcomes + 1
            if entries > args.rank_cap:
                print(f"  rank probe for {label}: skipped ({entries} entries)")
                continue
            mat = grouped_conditional_matrix(subset, alpha, beta)
            rank = numeric_rank(mat)
            rank_info[label] = rank
            status = "full" if rank == project.k else "DEFICIENT at this random point"
            print(f"  rank probe for {label}: {rank}/{project.k} ({status})")
        if any(r < project.k for r in rank_info.values()):
            print(
                "  warning: a rank deficiency at one random point is not proof of "
                "non-identifiability"
            )

    if args.json_out:
        doc = {
            "status": report.status,
            "n_plfs": report.n_plfs,
            "detail": report.detail,
            "classes": list(project.class_names),
        }
        if tri is not None:
            doc["s1"], doc["s2"], doc["s3"] = list(tri.s1), list(tri.s2), list(tri.s3)
            doc["witnesses_s1"] = [list(w) for w in tri.witnesses_s1]
            doc["witnesses_s2"] = [list(w) for w in tri.witnesses_s2]
            doc["rank_probe"] = rank_info
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return 0


def _add_synth(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("synth", help="sample votes and a ground-truth sidecar from known params")
    p.add_argument("--spec", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-votes", required=True)
    p.add_argument("--out-labels", required=True, help="true-label sidecar file")


def cmd_synth(args: argparse.Namespace) -> int:
    project = fileio.load_spec_file(args.spec)
    params = fileio.load_params(args.params)
    data = sample(project.specs, params, args.m, args.seed)
    fileio.save_votes(args.out_votes, data.votes, project)
    fileio.save_labels(args.out_labels, data.true_labels, project.class_names)
    covered = len(coverage_filter(data.votes))
    print(
        f"sampled {args.m} examples ({covered} with at least one vote) "
        f"to {args.out_votes}; truth in {args.out_labels}"
    )
    return 0


def _add_train_end(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("train-end", help="train the linear noise-aware classifier")
    p.add_argument("--features", required=True, help="feature file (CSV)")
    p.add_argument("--soft-labels", required=True, help="posterior-format soft labels")
    p.add_argument("--out", required=True, help="output model file (JSON)")
    p.add_argument("--pred-out", help="optional predicted-probability file")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def cmd_train_end(args: argparse.Namespace) -> int:
    features = fileio.load_features(args.features)
    soft, class_names = fileio.load_posterior(args.soft_labels)
    soft = validate_soft_labels(soft)
    config = EndModelConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    model = fit_linear(features, soft, config)
    fileio.save_end_model(args.out, model)
    print(f"trained linear model on {features.shape[0]} examples, wrote {args.out}")
    if args.pred_out:
        fileio.save_posterior(args.pred_out, model.predict_proba(features), class_names)
        print(f"wrote predictions to {args.pred_out}")
    return 0


def _add_bench(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("bench", help="time naive vs vectorized likelihood and training")
    p.add_argument("--m", type=int, default=100_000)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--naive-cap", type=int, default=DEFAULT_NAIVE_CAP)
    p.add_argument("--json", dest="json_out")


def cmd_bench(args: argparse.Namespace) -> int:
    result = run_bench(
        m=args.m,
        n=args.n,
        k=args.k,
        seed=args.seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        naive_cap=args.naive_cap,
    )
    for line in result.summary_lines():
        print(line)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(result.__dict__, fh, indent=2)
            fh.write("\n")
    return 0


COMMANDS = {
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "check-identifiability": cmd_check,
    "synth": cmd_synth,
    "train-end": cmd_train_end,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plmodel",
        description="Label-model engine for weak supervision with partial labeling functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train(sub)
    _add_infer(sub)
    _add_eval(sub)
    _add_check(sub)
    _add_synth(sub)
    _add_train_end(sub)
    _add_bench(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: file-not-found: {exc}", file=sys.stderr)
        return 3
    except EngineError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
