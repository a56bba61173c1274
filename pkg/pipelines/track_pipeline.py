from __future__ import annotations

"""End-to-end competition track orchestrator.

Three tracks share one run loop:

1. Qualification: external PMLB datasets, 75/25 split per run seed, every entrant compared
   with the least-squares baseline on median test R².
2. Synthetic: every selected (task, difficulty) dataset generated from the configured seeds,
   scored on R², simplicity and the task-specific criterion, ranked per task and overall.
3. Real-world: daily series cleaned, smoothed and turned into next-day feature tables; the
   best-test-R² model of each entrant is rated for trust and scored on all three criteria.

Every (algorithm, dataset, run) cell yields a record, including failed and over-budget runs,
which score worst instead of aborting the track. Output writing and trust rating are
pluggable services.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import train_test_split

from config import load_settings
from engines.regressors import build_regressor
from errors import BudgetExceeded, ConfigurationError, DegenerateTarget
from eval.metrics import model_r2
from eval.rubric import aggregate_track, rank_criterion, recovery_rates, score_record, showcase
from expr.evaluate import predict
from expr.nodes import Expr, node_count
from expr.parser import print_infix
from generators.dataset_io import read_dataset
from generators.tasks import all_task_levels, generate
from models.configs import AlgorithmSpec, EngineKind, SelectionPolicy, TrackConfig, TrackKind
from models.dataset import Dataset
from models.records import (
    ModelRecord,
    QualificationResult,
    RankReport,
    RealworldEntry,
    RealworldScore,
    RecoveryRate,
    RunStatus,
    ScoreRecord,
    Showcase,
)
from models.tasks import ADMISSIBLE_DIFFICULTIES, TaskKind
from pipelines.budget import budget_for, enforce_budget
from realworld.features import extract_features, to_dataset
from realworld.ingest import read_series_csv
from realworld.preprocess import prepare
from realworld.split import chunk_split
from realworld.trust import realworld_score, write_screen
from symbolic.simplify import simplified_node_count

logger = logging.getLogger(__name__)

BASELINE_NAME = "linear"
QUALIFICATION_TEST_SIZE = 0.25


@dataclass(slots=True, frozen=True)
class RunJob:
    """One fit of one entrant on one train/test pair."""

    algorithm: AlgorithmSpec
    train: Dataset
    test: Dataset
    run: int
    seed: int
    budget_seconds: float
    task: Optional[TaskKind] = None
    # overrides the entrant's own policy when set
    selection: Optional[SelectionPolicy] = None


@dataclass(slots=True)
class RunOutcome:
    model: ModelRecord
    score: ScoreRecord
    expr: Optional[Expr] = None


@dataclass(slots=True)
class TrackResult:
    """Everything a track produced; writers turn it into files."""

    config: TrackConfig
    models: List[ModelRecord] = field(default_factory=list)
    scores: List[ScoreRecord] = field(default_factory=list)
    reports: Dict[str, RankReport] = field(default_factory=dict)
    qualification: Optional[QualificationResult] = None
    recovery: List[RecoveryRate] = field(default_factory=list)
    showcase: List[Showcase] = field(default_factory=list)
    realworld: Dict[str, List[RealworldScore]] = field(default_factory=dict)
    assumptions: List[str] = field(default_factory=list)
    outputs: Dict[str, str] = field(default_factory=dict)


class RatingProvider(Protocol):
    """Supplies mean trust ratings for representative real-world models."""

    def ratings_for(self, entries: Sequence[RealworldEntry], screens: Mapping[str, Path]) -> Dict[str, float]:
        ...


class ReportWriter(Protocol):
    """Persists a finished track (JSON, CSV, Markdown)."""

    def write(self, result: TrackResult, out_dir: Path) -> Dict[str, str]:
        ...


@dataclass(slots=True)
class PipelineDependencies:
    rating_provider: Optional[RatingProvider] = None
    writer: Optional[ReportWriter] = None


# --- single runs -----------------------------------------------------------------------


def run_seed(base: int, run: int) -> int:
    """Independent 32-bit seed for run ``run`` of a track seeded with ``base``."""
    return int(np.random.SeedSequence([base, run]).generate_state(1)[0])


def fit_r2(expr: Optional[Expr], train: Dataset) -> float:
    try:
        return model_r2(expr, train)
    except DegenerateTarget:
        return math.nan


def execute_run(job: RunJob) -> RunOutcome:
    """Fit, time and score one job; failures are recorded, never raised."""
    spec = job.algorithm
    expr: Optional[Expr] = None
    status = RunStatus.OK
    error: Optional[str] = None
    wall = 0.0
    over_budget = False
    try:
        regressor = build_regressor(
            spec, job.budget_seconds, seed=job.seed, ground_truth=job.train.ground_truth
        )
        timed = enforce_budget(
            lambda: regressor.fit(job.train.features, job.train.target), job.budget_seconds
        )
        wall, over_budget = timed.wall_seconds, timed.over_budget
        regressor.reselect(job.selection or spec.selection, job.test, spec.epsilon)
        expr = regressor.expr_
    except BudgetExceeded as exc:
        status, error, wall = RunStatus.BUDGET_EXCEEDED, str(exc), exc.wall_seconds
    except Exception as exc:  # isolation: one broken run never aborts the track
        status, error = RunStatus.FAILED, f"{type(exc).__name__}: {exc}"
    if status is not RunStatus.OK:
        logger.warning("%s on %s run %d: %s", spec.name, job.test.dataset_id, job.run, error)

    score = score_record(spec.name, job.test, job.run, expr, task=job.task, wall_seconds=wall, status=status)
    model = ModelRecord(
        algorithm=spec.name,
        dataset=job.test.dataset_id,
        seed=job.seed,
        run=job.run,
        expression=None if expr is None else print_infix(expr),
        train_r2=fit_r2(expr, job.train) if status is RunStatus.OK else -math.inf,
        test_r2=score.r2_test,
        nodes_raw=None if expr is None else node_count(expr),
        nodes_simplified=None if expr is None else simplified_node_count(expr),
        wall_seconds=wall,
        over_budget=over_budget,
        status=status,
        error=error,
    )
    logger.info(
        "%s on %s run %d: r2=%.4g simplicity=%.1f (%.1fs)",
        spec.name, job.test.dataset_id, job.run, score.r2_test, score.simplicity, wall,
    )
    return RunOutcome(model=model, score=score, expr=expr)


def run_jobs(jobs: Sequence[RunJob], workers: int = 1) -> List[RunOutcome]:
    """Results come back in job order whatever the worker count."""
    if workers <= 1 or len(jobs) < 2:
        return [execute_run(job) for job in jobs]
    return list(Parallel(n_jobs=workers, prefer="threads")(delayed(execute_run)(job) for job in jobs))


# --- shared helpers --------------------------------------------------------------------


def _budget(cfg: TrackConfig, n_samples: int, default: float) -> float:
    desk = cfg.budget_seconds if cfg.budget_seconds is not None else default
    return budget_for(cfg.budget_policy, n_samples, desk)


def _workers(cfg: TrackConfig) -> int:
    return max(cfg.workers, 1)


def _names(cfg: TrackConfig) -> List[str]:
    return [a.name for a in cfg.algorithms]


def _jobs_for(
    cfg: TrackConfig,
    train: Dataset,
    test: Dataset,
    base_seed: int,
    budget: float,
    task: Optional[TaskKind] = None,
    selection: Optional[SelectionPolicy] = None,
) -> List[RunJob]:
    return [
        RunJob(
            algorithm=spec,
            train=train,
            test=test,
            run=r,
            seed=run_seed(base_seed, r),
            budget_seconds=budget,
            task=task,
            selection=selection,
        )
        for r in range(cfg.runs)
        for spec in cfg.algorithms
    ]


def _common_assumptions(cfg: TrackConfig, budget_note: str) -> List[str]:
    return [
        f"runs per dataset: {cfg.runs}",
        f"seeds: {cfg.seeds}",
        f"budget: {budget_note} ({cfg.budget_policy.value} policy), hard stop at +10%",
        "failed or over-budget runs score R2 = -inf",
        f"ranking: {'median over runs, then rank' if cfg.median_first else 'rank per run, then median'}; "
        f"Nemenyi alpha = {cfg.alpha}",
    ]


# --- qualification ---------------------------------------------------------------------


def with_baseline(cfg: TrackConfig) -> Tuple[TrackConfig, str]:
    """Ensure a least-squares entrant takes part; returns its name."""
    for spec in cfg.algorithms:
        if spec.kind is EngineKind.LINEAR:
            return cfg, spec.name
    if BASELINE_NAME in _names(cfg):
        raise ConfigurationError(f"'{BASELINE_NAME}' is reserved for the least-squares baseline")
    baseline = AlgorithmSpec(name=BASELINE_NAME, kind=EngineKind.LINEAR)
    return cfg.model_copy(update={"algorithms": [*cfg.algorithms, baseline]}), BASELINE_NAME


def qualification_ranks(
    records: Sequence[ScoreRecord], algorithms: Sequence[str], baseline: str
) -> Tuple[Dict[str, Dict[str, float]], Dict[str, float], List[str]]:
    """Median test R² per dataset, ranked across algorithms; median rank decides qualification."""
    per_cell: Dict[str, Dict[str, List[float]]] = {}
    for rec in records:
        per_cell.setdefault(rec.dataset, {}).setdefault(rec.algorithm, []).append(rec.r2_test)
    median_r2 = {
        d: {a: float(np.median(per_cell[d][a])) for a in algorithms} for d in sorted(per_cell)
    }
    rank_rows = {d: rank_criterion([median_r2[d][a] for a in algorithms]) for d in median_r2}
    median_rank = {
        a: float(np.median([rank_rows[d][i] for d in median_r2])) for i, a in enumerate(algorithms)
    }
    disqualified = [a for a in algorithms if a != baseline and median_rank[a] < median_rank[baseline]]
    return median_r2, median_rank, disqualified


def _split(ds: Dataset, seed: int) -> Tuple[Dataset, Dataset]:
    train_idx, test_idx = train_test_split(
        np.arange(ds.n_samples), test_size=QUALIFICATION_TEST_SIZE, random_state=seed, shuffle=True
    )
    return ds.take(np.sort(train_idx), "train"), ds.take(np.sort(test_idx), "test")


def run_qualification(cfg: TrackConfig) -> TrackResult:
    if not cfg.datasets:
        raise ConfigurationError("qualification needs at least one dataset file")
    cfg, baseline = with_baseline(cfg)
    settings = load_settings()
    datasets = [read_dataset(p) for p in cfg.datasets]
    ids = [d.dataset_id for d in datasets]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"dataset names must be unique, got {ids}")

    base_seed = cfg.seeds[0]
    jobs: List[RunJob] = []
    for ds in datasets:
        budget = _budget(cfg, ds.n_samples, settings.qualification_budget_seconds)
        for r in range(cfg.runs):
            seed = run_seed(base_seed, r)
            train, test = _split(ds, seed)
            jobs.extend(
                RunJob(algorithm=spec, train=train, test=test, run=r, seed=seed, budget_seconds=budget)
                for spec in cfg.algorithms
            )
    outcomes = run_jobs(jobs, _workers(cfg))
    scores = [o.score for o in outcomes]
    names = _names(cfg)
    report = aggregate_track(scores, cfg.median_first, cfg.alpha, names, scope="qualification")
    median_r2, median_rank, disqualified = qualification_ranks(scores, names, baseline)
    for name in disqualified:
        logger.info("disqualified %s: median rank %.2f below %s (%.2f)", name, median_rank[name], baseline, median_rank[baseline])
    qualification = QualificationResult(
        report=report,
        median_r2=median_r2,
        median_rank=median_rank,
        baseline=baseline,
        disqualified=disqualified,
    )
    assumptions = _common_assumptions(cfg, f"{cfg.budget_seconds or settings.qualification_budget_seconds:g}s per run")
    assumptions.insert(0, f"split: shuffled 75/25 train/test per run, keyed to the run seed (track seed {base_seed})")
    return TrackResult(
        config=cfg,
        models=[o.model for o in outcomes],
        scores=scores,
        reports={"qualification": report},
        qualification=qualification,
        assumptions=assumptions,
    )


# --- synthetic -------------------------------------------------------------------------


def selected_levels(cfg: TrackConfig):
    if cfg.tasks is None:
        return all_task_levels()
    levels = []
    for sel in cfg.tasks:
        diffs = sel.difficulties or ADMISSIBLE_DIFFICULTIES[sel.task]
        for d in diffs:
            if d not in ADMISSIBLE_DIFFICULTIES[sel.task]:
                raise ConfigurationError(f"{d.value} is not a difficulty of {sel.task.value}")
            levels.append((sel.task, d))
    return levels


def run_synthetic(cfg: TrackConfig) -> TrackResult:
    settings = load_settings()
    jobs: List[RunJob] = []
    task_of: Dict[str, TaskKind] = {}
    for seed in cfg.seeds:
        for task, difficulty in selected_levels(cfg):
            train, test = generate(task, difficulty, seed, cfg.n_train, cfg.n_test)
            task_of[test.dataset_id] = task
            budget = _budget(cfg, train.n_samples, settings.synthetic_budget_seconds)
            jobs.extend(_jobs_for(cfg, train, test, seed, budget, task))
    outcomes = run_jobs(jobs, _workers(cfg))
    scores = [o.score for o in outcomes]
    names = _names(cfg)

    reports: Dict[str, RankReport] = {}
    for task in TaskKind:
        subset = [s for s in scores if task_of[s.dataset] is task]
        if subset:
            reports[task.value] = aggregate_track(subset, cfg.median_first, cfg.alpha, names, scope=task.value)
    reports["overall"] = aggregate_track(scores, cfg.median_first, cfg.alpha, names, scope="overall")

    assumptions = _common_assumptions(cfg, f"{cfg.budget_seconds or settings.synthetic_budget_seconds:g}s per run")
    assumptions.insert(0, f"datasets: {cfg.n_train} train / {cfg.n_test} test rows per (task, difficulty, seed)")
    return TrackResult(
        config=cfg,
        models=[o.model for o in outcomes],
        scores=scores,
        reports=reports,
        recovery=recovery_rates(scores),
        showcase=showcase(scores, names),
        assumptions=assumptions,
    )


# --- real world ------------------------------------------------------------------------


def representative(outcomes: Sequence[RunOutcome]) -> RunOutcome:
    """Best test R² over runs; ties go to the earlier run."""
    return min(outcomes, key=lambda o: (-o.score.r2_test, o.score.run))


def run_realworld(
    cfg: TrackConfig, ratings: RatingProvider, out_dir: Optional[Path] = None
) -> TrackResult:
    if not cfg.series_csv:
        raise ConfigurationError("the real-world track needs series_csv")
    settings = load_settings()
    out_dir = Path(out_dir or cfg.output_dir or settings.output_dir)
    frame = prepare(read_series_csv(cfg.series_csv))

    outcomes: List[RunOutcome] = []
    entries: Dict[str, List[RealworldEntry]] = {}
    screens: Dict[str, Path] = {}
    for target in cfg.targets:
        table = extract_features(frame, target)
        train_t, test_t = chunk_split(table)
        train = to_dataset(train_t, f"covid-{target}", "train")
        test = to_dataset(test_t, f"covid-{target}", "test")
        budget = _budget(cfg, train.n_samples, settings.synthetic_budget_seconds)
        jobs = _jobs_for(cfg, train, test, cfg.seeds[0], budget, selection=SelectionPolicy.BEST_TEST_R2)
        done = run_jobs(jobs, _workers(cfg))
        outcomes.extend(done)
        full = to_dataset(table, f"covid-{target}")
        for spec in cfg.algorithms:
            best = representative([o for o in done if o.score.algorithm == spec.name])
            entry = RealworldEntry(
                algorithm=spec.name,
                model_id=f"{target}-{spec.name}",
                r2_test=best.score.r2_test,
                simplicity=best.score.simplicity,
            )
            entries.setdefault(target, []).append(entry)
            if best.expr is not None:
                _, md = write_screen(
                    out_dir / "screens", entry, target, best.model.expression or "",
                    table.index, full.target, predict(best.expr, full.features),
                )
                screens[entry.model_id] = md

    flat = [e for target in cfg.targets for e in entries[target]]
    trust = ratings.ratings_for(flat, screens)
    final = {target: realworld_score(entries[target], trust) for target in cfg.targets}
    scores = [o.score for o in outcomes]
    report = aggregate_track(scores, cfg.median_first, cfg.alpha, _names(cfg), scope="realworld")

    assumptions = _common_assumptions(cfg, f"{cfg.budget_seconds or settings.synthetic_budget_seconds:g}s per run")
    assumptions[0:0] = [
        "preprocessing: 7-day trailing 4-sigma outlier replacement, then EWMA alpha 0.25",
        "features: lags 1-2, deltas x[t] - x[t-i], running totals; label is the next day",
        "split: alternating 5-week train / 3-week test chunks",
        "final score: harmonic mean of R2, simplicity and trust ranks",
    ]
    return TrackResult(
        config=cfg,
        models=[o.model for o in outcomes],
        scores=scores,
        reports={"realworld": report},
        realworld=final,
        assumptions=assumptions,
    )


# --- orchestrator ----------------------------------------------------------------------


@dataclass(slots=True)
class TrackPipeline:
    """Runs the configured track and hands the result to the writer."""

    run_id: str
    config: TrackConfig
    deps: PipelineDependencies = field(default_factory=PipelineDependencies)

    def output_dir(self) -> Path:
        return Path(self.config.output_dir or load_settings().output_dir)

    def run(self) -> TrackResult:
        cfg = self.config
        out_dir = self.output_dir()
        logger.info("track %s (%s): %d algorithms, %d runs", cfg.track.value, self.run_id, len(cfg.algorithms), cfg.runs)
        if cfg.track is TrackKind.QUALIFICATION:
            result = run_qualification(cfg)
        elif cfg.track is TrackKind.SYNTHETIC:
            result = run_synthetic(cfg)
        else:
            if self.deps.rating_provider is None:
                raise ConfigurationError("the real-world track needs a rating provider")
            result = run_realworld(cfg, self.deps.rating_provider, out_dir)
        if self.deps.writer is not None:
            result.outputs = self.deps.writer.write(result, out_dir)
        return result


__all__ = [
    "BASELINE_NAME",
    "PipelineDependencies",
    "RatingProvider",
    "ReportWriter",
    "RunJob",
    "RunOutcome",
    "TrackPipeline",
    "TrackResult",
    "execute_run",
    "qualification_ranks",
    "representative",
    "run_jobs",
    "run_qualification",
    "run_realworld",
    "run_seed",
    "run_synthetic",
    "selected_levels",
    "with_baseline",
]
