"""Command-line pipeline: mine, stats, train, evaluate, keywords, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .churn import compute_churn
from .dataset import TARGETS, DatasetRecord, read_dataset, write_dataset
from .errors import PrestiError
from .io import load_model
from .keywords import HIGH_EFFORT, LOW_EFFORT, aggregate_keywords
from .miner import MinerOptions, walk_repository
from .pipeline import (
    APPROACHES,
    CnnRegressor,
    RunConfig,
    evaluate_models,
    load_models,
    save_models,
    train_models,
)
from .regressors import ForestParams
from .satd import load_patterns, rule_detect
from .significance import profile_commit
from .tables import (
    build_stats,
    render_keywords_text,
    render_report_csv,
    render_report_text,
    render_stats_csv,
    render_stats_text,
)
from .textcnn import CnnHyper

logger = logging.getLogger("presti")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, ensure_ascii=False, indent=2) + "\n"
    _write_text(text, out)


# --- mine ----------------------------------------------------------------


def _cmd_mine(args: argparse.Namespace) -> int:
    patterns = load_patterns(args.patterns) if args.patterns else None
    opts = MinerOptions(
        branch=args.branch,
        max_commits=args.max_commits,
        keep_non_english=args.keep_non_english,
        keep_reverts=args.keep_reverts,
    )

    def records():
        for repo in args.repos:
            try:
                for commit in walk_repository(repo, opts):
                    yield DatasetRecord(
                        repo_id=commit.repo_id,
                        sha=commit.sha,
                        timestamp=commit.timestamp,
                        message=commit.message,
                        label=rule_detect(commit.message, patterns),
                        effort=compute_churn(commit),
                        significance=profile_commit(commit),
                    )
            except PrestiError as exc:
                logger.error("skipping %s: %s", repo, exc)

    count = write_dataset(records(), args.out)
    if count == 0:
        logger.error("no records produced")
        return EXIT_DATA
    logger.info("wrote %d records to %s", count, args.out)
    return EXIT_OK


# --- stats ----------------------------------------------------------------


def _cmd_stats(args: argparse.Namespace) -> int:
    records = read_dataset(args.dataset)
    stats = build_stats(records)
    if args.format == "json":
        _write_json(stats, args.out)
    elif args.format == "csv":
        _write_text(render_stats_csv(stats), args.out)
    else:
        _write_text(render_stats_text(stats), args.out)
    return EXIT_OK


# --- train / evaluate -------------------------------------------------------


def _parse_split(text: str) -> tuple[float, float, float]:
    parts = text.split("/")
    if len(parts) != 3:
        raise _UsageError(f"--split expects A/B/C percentages, got {text!r}")
    try:
        ratios = tuple(float(p) / 100.0 for p in parts)
    except ValueError:
        raise _UsageError(f"--split expects numbers, got {text!r}")
    return ratios  # validated by RunConfig


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    models = tuple(args.models.split(",")) if args.models else APPROACHES
    targets = tuple(args.targets.split(",")) if args.targets else TARGETS
    windows = tuple(int(w) for w in args.windows.split(",")) if args.windows else (1, 2, 3, 4, 5)
    cnn = CnnHyper(
        embed_dim=args.embed_dim,
        window_sizes=windows,
        filters_per_window=args.filters,
        dropout=args.dropout,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    forest = ForestParams(
        trees=args.trees,
        max_depth=args.max_depth,
        min_leaf=args.min_leaf,
        feature_frac=args.feature_frac,
        seed=args.seed,
    )
    try:
        return RunConfig(
            seed=args.seed,
            split=_parse_split(args.split),
            models=models,
            targets=targets,
            ridge_lambda=args.ridge_lambda,
            forest=forest,
            cnn=cnn,
            max_len=args.max_len,
        )
    except ValueError as exc:
        raise _UsageError(str(exc))


def _cmd_train(args: argparse.Namespace) -> int:
    records = read_dataset(args.dataset)
    config = _config_from_args(args)
    models = train_models(records, config)
    written = save_models(models, args.out)
    logger.info("wrote %d model files to %s", len(written), args.out)
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    records = read_dataset(args.dataset)
    config = _config_from_args(args)
    if args.model_dir:
        models = load_models(args.model_dir, config)
    else:
        models = train_models(records, config)
    report = evaluate_models(records, models)
    _write_json(report, args.out)
    return EXIT_OK


# --- keywords ----------------------------------------------------------------


def _cmd_keywords(args: argparse.Namespace) -> int:
    records = read_dataset(args.dataset)
    kind, state = load_model(args.model_file)
    if kind != "textcnn":
        raise PrestiError(f"keywords need a textcnn model file, got kind {kind!r}")
    regressor = CnnRegressor.from_state(state)
    target = Path(args.model_file).stem.partition("_")[2]
    corpus = regressor.encode([r.message for r in records])
    directions = {
        "low": [LOW_EFFORT],
        "high": [HIGH_EFFORT],
        "both": [LOW_EFFORT, HIGH_EFFORT],
    }[args.direction]
    reports = [
        aggregate_keywords(
            regressor.network, corpus, regressor.vocab, direction, args.top, target=target
        ).as_dict()
        for direction in directions
    ]
    if args.format == "json":
        _write_json({"reports": reports}, args.out)
    else:
        _write_text(render_keywords_text(reports), args.out)
    return EXIT_OK


# --- report ----------------------------------------------------------------


def _cmd_report(args: argparse.Namespace) -> int:
    report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    if args.format == "csv":
        _write_text(render_report_csv(report), args.out)
    else:
        _write_text(render_report_text(report), args.out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--split", default="80/10/10", help="train/validation/test percentages")
    parser.add_argument("--models", help=f"comma list from {','.join(APPROACHES)}")
    parser.add_argument("--targets", help=f"comma list from {','.join(TARGETS)}")
    parser.add_argument("--ridge-lambda", type=float, default=1.0)
    parser.add_argument("--trees", type=int, default=100)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--min-leaf", type=int, default=1)
    parser.add_argument("--feature-frac", type=float, default=1.0)
    parser.add_argument("--embed-dim", type=int, default=300)
    parser.add_argument("--windows", help="comma list of window sizes, default 1,2,3,4,5")
    parser.add_argument("--filters", type=int, default=200)
    parser.add_argument("--dropout", type=float, default=0.5)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--max-len", type=int, default=100)


def build_parser() -> _Parser:
    parser = _Parser(prog="presti", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine git repositories into a JSONL dataset")
    p.add_argument("repos", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--branch")
    p.add_argument("--max-commits", type=int)
    p.add_argument("--keep-non-english", action="store_true")
    p.add_argument("--keep-reverts", action="store_true")
    p.add_argument("--patterns", help="override the bundled SATD pattern file")
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("stats", help="comparison tables over a mined dataset")
    p.add_argument("dataset")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("train", help="train effort regressors, write model files")
    p.add_argument("dataset")
    p.add_argument("--out", required=True, help="model directory")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="test-split RMSE report (JSON)")
    p.add_argument("dataset")
    p.add_argument("--out", help="report path; stdout when omitted")
    p.add_argument("--model-dir", help="reuse models written by `train`")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("keywords", help="n-gram keywords from a trained textcnn model")
    p.add_argument("dataset")
    p.add_argument("--model-file", required=True)
    p.add_argument("--direction", choices=("low", "high", "both"), default="both")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_keywords)

    p = sub.add_parser("report", help="render a report JSON as text or CSV")
    p.add_argument("report")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrestiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
