#!/usr/bin/env python3
"""Command-line entry point for the symbolic regression competition harness."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

# Add project root to path
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from config import configure_logging, load_settings, log_active_config
from engines.regressors import build_regressor
from errors import CompetitionError, ConfigurationError, MissingRecords
from eval.critical_difference import MAX_K
from eval.rubric import aggregate_track
from eval.runner import MODEL_SUFFIX, SCORE_SUFFIX, collect_scores, evaluate, load_model_record, write_report
from export.csv_writer import write_cd_csv
from export.json_writer import write_json
from export.markdown_writer import write_rank_md
from expr.nodes import node_count
from expr.parser import print_infix
from generators.dataset_io import read_dataset, write_dataset
from generators.tasks import generate
from models.configs import AlgorithmSpec, EngineKind, SelectionPolicy, TrackConfig, TrackKind
from models.records import ModelRecord, RunStatus
from models.tasks import Difficulty, TaskKind
from pipelines.budget import enforce_budget
from pipelines.rating_providers import CLIRatingProvider, CsvRatingProvider
from pipelines.runtime import build_pipeline, generate_run_id
from pipelines.track_pipeline import fit_r2
from realworld.features import extract_features, to_dataset
from realworld.ingest import SERIES_COLUMNS, read_series_csv
from realworld.preprocess import DEFAULT_ALPHA, prepare
from realworld.split import chunk_split
from symbolic.simplify import simplified_node_count

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_MISSING = 3


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Generate datasets, fit entrants, score and rank them, and run whole tracks.",
    )
    parser.add_argument("--log-level", default=None, help="Override SRCOMP_LOG_LEVEL.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate one synthetic (task, difficulty, seed) train/test pair.")
    gen.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    gen.add_argument("--difficulty", required=True, choices=[d.value for d in Difficulty])
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--n-train", type=int, default=1000)
    gen.add_argument("--n-test", type=int, default=1000)
    gen.add_argument("--no-sine", action="store_true", help="Extrapolation only: erf-only ground truth.")
    gen.add_argument("--gzip", action="store_true", help="Write .tsv.gz instead of .tsv.")
    gen.add_argument("--out", required=True, metavar="DIR")

    fit = sub.add_parser("fit", help="Fit one entrant on a training file and write its model record.")
    fit.add_argument("--dataset", required=True, metavar="TRAIN_TSV")
    fit.add_argument("--test", default=None, metavar="TEST_TSV", help="Needed for best-test-r2 selection.")
    fit.add_argument(
        "--algo",
        default="gp",
        help="Engine kind (gp, linear, constant, oracle) or a JSON file holding an algorithm spec.",
    )
    fit.add_argument("--name", default=None, help="Algorithm name recorded in the model file.")
    fit.add_argument("--budget-seconds", type=float, default=None)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--run", type=int, default=0)
    fit.add_argument("--out", required=True, metavar="MODEL_JSON")

    score = sub.add_parser("score", help="Score a model record against a test file.")
    score.add_argument("--model", required=True, metavar="MODEL_JSON")
    score.add_argument("--dataset", required=True, metavar="TEST_TSV")
    score.add_argument("--out", default=None, metavar="SCORE_JSON")
    score.add_argument("--report", default=None, metavar="MD", help="Optional Markdown summary.")

    rank = sub.add_parser("rank", help="Aggregate every score record under a directory.")
    rank.add_argument("--runs-dir", required=True)
    rank.add_argument("--out", required=True, metavar="DIR")
    rank.add_argument("--alpha", type=float, default=0.05, choices=[0.05, 0.10])
    rank.add_argument("--per-run", action="store_true", help="Rank each run, then take medians.")

    covid = sub.add_parser("covid", help="Real-world series preparation and trust rating.")
    covid_sub = covid.add_subparsers(dest="covid_command", required=True)
    prep = covid_sub.add_parser("prep", help="Clean, smooth, extract features and split.")
    prep.add_argument("--series", required=True, metavar="CSV")
    prep.add_argument("--out", required=True, metavar="DIR")
    prep.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="EWMA smoothing factor.")
    prep.add_argument("--targets", nargs="*", default=list(SERIES_COLUMNS), choices=list(SERIES_COLUMNS))
    rate = covid_sub.add_parser("rate", help="Rate model cards interactively (1-5).")
    rate.add_argument("--screens", required=True, metavar="DIR", help="Directory of model cards (*.md).")
    rate.add_argument("--out", required=True, metavar="RATINGS_CSV")
    rate.add_argument("--rater", default="expert")

    track = sub.add_parser("track", help="Run a qualification, synthetic or real-world track.")
    track.add_argument("kind", choices=["quali", "qualification", "synthetic", "realworld"])
    track.add_argument("--config", required=True, metavar="JSON")
    track.add_argument("--output-dir", default=None)
    track.add_argument("--ratings", default=None, metavar="CSV", help="Real-world trust ratings.")
    track.add_argument("--interactive", action="store_true", help="Ask for trust ratings on the terminal.")
    track.add_argument("--run-id", default=None)
    return parser.parse_args(argv)


# --- subcommands -----------------------------------------------------------------------


def _cmd_gen(args: argparse.Namespace) -> int:
    include_sine = False if args.no_sine else None
    train, test = generate(
        TaskKind(args.task), Difficulty(args.difficulty), args.seed, args.n_train, args.n_test,
        include_sine=include_sine,
    )
    ext = ".tsv.gz" if args.gzip else ".tsv"
    out = Path(args.out)
    paths = {
        "train": str(write_dataset(train, out / f"{train.dataset_id}_train{ext}")),
        "test": str(write_dataset(test, out / f"{test.dataset_id}_test{ext}")),
    }
    print(json.dumps({"dataset": train.dataset_id, **paths}, indent=2))
    return EXIT_OK


def _algorithm(args: argparse.Namespace) -> AlgorithmSpec:
    source = Path(args.algo)
    if source.suffix == ".json":
        try:
            spec = AlgorithmSpec.model_validate_json(source.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigurationError(f"algorithm file not found: {source}") from exc
    else:
        try:
            kind = EngineKind(args.algo)
        except ValueError as exc:
            raise ConfigurationError(f"unknown engine kind {args.algo!r}") from exc
        spec = AlgorithmSpec(name=kind.value, kind=kind)
    if args.name:
        spec = spec.model_copy(update={"name": args.name})
    return spec


def _cmd_fit(args: argparse.Namespace) -> int:
    spec = _algorithm(args)
    train = read_dataset(args.dataset)
    test = read_dataset(args.test) if args.test else None
    budget = args.budget_seconds or load_settings().synthetic_budget_seconds
    regressor = build_regressor(spec, budget, seed=args.seed, ground_truth=train.ground_truth)
    timed = enforce_budget(lambda: regressor.fit(train.features, train.target), budget)
    if spec.selection is SelectionPolicy.BEST_TEST_R2:
        if test is None:
            raise ConfigurationError("best-test-r2 selection needs --test")
        regressor.reselect(SelectionPolicy.BEST_TEST_R2, test, spec.epsilon)
    expr = regressor.expr_
    record = ModelRecord(
        algorithm=spec.name,
        dataset=train.dataset_id,
        seed=args.seed,
        run=args.run,
        expression=print_infix(expr),
        train_r2=fit_r2(expr, train),
        test_r2=fit_r2(expr, test) if test is not None else float("-inf"),
        nodes_raw=node_count(expr),
        nodes_simplified=simplified_node_count(expr),
        wall_seconds=timed.wall_seconds,
        over_budget=timed.over_budget,
        status=RunStatus.OK,
    )
    out = args.out if args.out.endswith(".json") else args.out + MODEL_SUFFIX
    write_json(record, out, drop=())
    print(f"[fit] {spec.name}: {record.expression} (train R2 {record.train_r2:.4f}, {timed.wall_seconds:.1f}s) -> {out}")
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    model = load_model_record(args.model)
    test = read_dataset(args.dataset)
    record = evaluate(model, test)
    if args.out:
        write_json(record, args.out, drop=())
    else:
        default = Path(args.model)
        name = default.name[: -len(MODEL_SUFFIX)] if default.name.endswith(MODEL_SUFFIX) else default.stem
        write_json(record, default.with_name(name + SCORE_SUFFIX), drop=())
    if args.report:
        write_report([record], args.report)
    exact = "-" if record.exact is None else record.exact.kind.value
    print(
        f"[score] {record.algorithm}/{record.dataset}/{record.run}: R2={record.r2_test:.6g} "
        f"simplicity={record.simplicity} task={record.task_score} exact={exact}"
    )
    return EXIT_OK


def _cmd_rank(args: argparse.Namespace) -> int:
    records = collect_scores(args.runs_dir)
    report = aggregate_track(records, median_first=not args.per_run, alpha=args.alpha, scope="rank")
    out = Path(args.out)
    write_json(report, out / "rank.json")
    write_rank_md(report, str(out / "rank.md"))
    if len(report.algorithms) <= MAX_K:
        write_cd_csv(report, out / "cd.csv")
    print(f"[rank] {len(records)} records, winner: {report.winner} -> {out}")
    return EXIT_OK


def _cmd_covid_prep(args: argparse.Namespace) -> int:
    frame = prepare(read_series_csv(args.series), alpha=args.alpha)
    out = Path(args.out)
    written = {}
    for target in args.targets:
        train_t, test_t = chunk_split(extract_features(frame, target))
        name = f"covid-{target}"
        written[target] = {
            "train": str(write_dataset(to_dataset(train_t, name, "train"), out / f"{name}_train.tsv")),
            "test": str(write_dataset(to_dataset(test_t, name, "test"), out / f"{name}_test.tsv")),
        }
    print(json.dumps(written, indent=2))
    return EXIT_OK


def _cmd_covid_rate(args: argparse.Namespace) -> int:
    cards = sorted(Path(args.screens).glob("*.md"))
    if not cards:
        raise ConfigurationError(f"no model cards in {args.screens}")
    provider = CLIRatingProvider(rater=args.rater, save_path=args.out)
    for card in cards:
        provider.rate(card.stem, card)
    provider.save()
    return EXIT_OK


_TRACK_KINDS = {"quali": TrackKind.QUALIFICATION, "qualification": TrackKind.QUALIFICATION,
                "synthetic": TrackKind.SYNTHETIC, "realworld": TrackKind.REALWORLD}


def load_track_config(path: str, kind: Optional[TrackKind] = None) -> TrackConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
    if kind is not None:
        declared = raw.setdefault("track", kind.value)
        if declared != kind.value:
            raise ConfigurationError(f"{path} declares track {declared!r}, not {kind.value!r}")
    try:
        return TrackConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid track config {path}: {exc}") from exc


def _cmd_track(args: argparse.Namespace) -> int:
    cfg = load_track_config(args.config, _TRACK_KINDS[args.kind])
    if args.output_dir:
        cfg = cfg.model_copy(update={"output_dir": args.output_dir})
    provider = None
    if cfg.track is TrackKind.REALWORLD:
        ratings = args.ratings or cfg.ratings_csv
        if args.interactive:
            provider = CLIRatingProvider(save_path=ratings)
        elif ratings:
            provider = CsvRatingProvider(path=ratings)
        else:
            raise ConfigurationError("the real-world track needs --ratings, ratings_csv or --interactive")
    run_id = args.run_id or generate_run_id(f"{cfg.track.value}-cli")
    result = build_pipeline(cfg, rating_provider=provider, run_id=run_id).run()
    summary = {
        "run_id": run_id,
        "track": cfg.track.value,
        "winners": {scope: r.winner for scope, r in result.reports.items()},
        "disqualified": result.qualification.disqualified if result.qualification else [],
        "outputs": result.outputs,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "covid":
        return _cmd_covid_prep(args) if args.covid_command == "prep" else _cmd_covid_rate(args)
    handlers = {"gen": _cmd_gen, "fit": _cmd_fit, "score": _cmd_score, "rank": _cmd_rank, "track": _cmd_track}
    return handlers[args.command](args)


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    configure_logging(args.log_level)
    log_active_config("[srcomp]")
    try:
        return _dispatch(args)
    except ConfigurationError as exc:
        print(f"[srcomp] Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as exc:
        print(f"[srcomp] Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingRecords as exc:
        print(f"[srcomp] {exc}", file=sys.stderr)
        return EXIT_MISSING
    except CompetitionError as exc:
        print(f"[srcomp] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
