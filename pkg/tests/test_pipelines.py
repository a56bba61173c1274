import json
import math
import time
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from engines.pareto import FrontEntry, ParetoFront
from engines.regressors import LinearRegressor
from engines.selection import select_model
from errors import BudgetExceeded, ConfigurationError, MissingTrust
from export.track_writer import FileReportWriter
from expr.nodes import Constant, x
from expr.parser import print_infix
from generators.dataset_io import write_dataset
from generators.tasks import gen_exact, gen_feature_selection
from models.configs import (
    AlgorithmSpec,
    BudgetPolicy,
    EngineKind,
    GpConfig,
    SelectionPolicy,
    TaskSelection,
    TrackConfig,
    TrackKind,
)
from models.dataset import Dataset
from models.records import RealworldEntry, RunStatus, ScoreRecord, TrustRating
from models.tasks import Difficulty, TaskKind
from pipelines.budget import budget_for, enforce_budget
from pipelines.rating_providers import CLIRatingProvider, CsvRatingProvider, StaticRatingProvider
from pipelines.runtime import build_pipeline
from pipelines.track_pipeline import (
    PipelineDependencies,
    RunJob,
    TrackPipeline,
    execute_run,
    qualification_ranks,
    run_qualification,
    run_realworld,
    run_seed,
    run_synthetic,
    selected_levels,
    with_baseline,
)
from realworld.trust import read_ratings, write_ratings

TINY_GP = GpConfig(population_size=30, generations=2, max_depth=5, max_nodes=20, init_max_depth=3, tune_every=1)
LINEAR = AlgorithmSpec(name="ols", kind=EngineKind.LINEAR)


def _series_csv(path, days: int = 120):
    t = np.arange(days, dtype=float)
    rng = np.random.default_rng(7)
    cases = 1000 + 5 * t + 200 * np.sin(2 * np.pi * t / 30) + rng.normal(0, 20, days)
    frame = pd.DataFrame(
        {
            "date": pd.date_range("2021-01-01", periods=days, freq="D").strftime("%Y-%m-%d"),
            "cases": np.round(cases),
            "hospitalizations": np.round(cases / 10),
            "deaths": np.round(cases / 100),
        }
    )
    frame.to_csv(path, index=False)
    return str(path)


def _exact_files(tmp_path, seeds=(0, 1)):
    paths = []
    for seed in seeds:
        train, _ = gen_exact(Difficulty.EASIER, seed, n_train=120, n_test=10)
        paths.append(str(write_dataset(train, tmp_path / f"exact{seed}.tsv")))
    return paths


# --- budgets -----------------------------------------------------------------------------


def test_enforce_budget_returns_value_and_wall_time():
    timed = enforce_budget(lambda: 42, 5.0)
    assert timed.value == 42
    assert 0.0 <= timed.wall_seconds < 5.0


def test_enforce_budget_hard_stops_overruns():
    started = time.monotonic()
    with pytest.raises(BudgetExceeded) as info:
        enforce_budget(lambda: time.sleep(2.0), 0.2)
    assert time.monotonic() - started < 1.0
    assert 0.2 <= info.value.wall_seconds < 1.0
    assert info.value.budget_seconds == 0.2


def test_enforce_budget_flags_grace_period_finish():
    timed = enforce_budget(lambda: time.sleep(0.3) or "done", 0.2, grace=2.0)
    assert timed.value == "done"
    assert timed.over_budget
    assert timed.wall_seconds > 0.2
    assert not enforce_budget(lambda: 1, 5.0).over_budget


def test_enforce_budget_refuses_zero_and_propagates_errors():
    with pytest.raises(ConfigurationError):
        enforce_budget(lambda: 1, 0)

    def broken():
        raise KeyError("boom")

    with pytest.raises(KeyError):
        enforce_budget(broken, 5.0)


def test_budget_policies():
    assert budget_for(BudgetPolicy.DESK, 10_000, 30.0) == 30.0
    assert budget_for(BudgetPolicy.FULL_SCALE, 1000, 30.0) == 3600.0
    assert budget_for(BudgetPolicy.FULL_SCALE, 1001, 30.0) == 36000.0


# --- single runs -------------------------------------------------------------------------


def test_run_seed_is_stable_and_distinct():
    seeds = [run_seed(0, r) for r in range(10)]
    assert seeds == [run_seed(0, r) for r in range(10)]
    assert len(set(seeds)) == 10
    assert run_seed(1, 0) != run_seed(0, 0)


def test_failed_run_is_recorded_not_raised():
    X = np.linspace(0, 1, 20).reshape(-1, 1)
    ds = Dataset(features=X, target=X[:, 0], feature_names=["x1"], name="plain")
    job = RunJob(
        algorithm=AlgorithmSpec(name="oracle", kind=EngineKind.ORACLE),
        train=ds, test=ds, run=0, seed=1, budget_seconds=5.0,
    )
    outcome = execute_run(job)
    assert outcome.model.status is RunStatus.FAILED
    assert "ConfigurationError" in outcome.model.error
    assert outcome.score.r2_test == -math.inf
    assert outcome.expr is None


# --- qualification -----------------------------------------------------------------------


def test_with_baseline():
    cfg = TrackConfig(track=TrackKind.QUALIFICATION, algorithms=[AlgorithmSpec(name="gp")])
    extended, name = with_baseline(cfg)
    assert name == "linear"
    assert [a.name for a in extended.algorithms] == ["gp", "linear"]
    assert with_baseline(TrackConfig(track=TrackKind.QUALIFICATION, algorithms=[LINEAR]))[1] == "ols"
    clash = TrackConfig(track=TrackKind.QUALIFICATION, algorithms=[AlgorithmSpec(name="linear", kind=EngineKind.GP)])
    with pytest.raises(ConfigurationError):
        with_baseline(clash)


def test_qualification_ranks_by_median_r2():
    records = [
        ScoreRecord(algorithm=a, dataset=d, run=r, r2_test=v, simplicity=-1.0)
        for a, d, r, v in [
            ("A", "d1", 0, 0.9), ("A", "d1", 1, 0.7), ("linear", "d1", 0, 0.5), ("linear", "d1", 1, 0.6),
            ("A", "d2", 0, 0.1), ("A", "d2", 1, 0.2), ("linear", "d2", 0, 0.4), ("linear", "d2", 1, 0.3),
            ("A", "d3", 0, 0.0), ("A", "d3", 1, 0.0), ("linear", "d3", 0, 0.4), ("linear", "d3", 1, 0.4),
        ]
    ]
    median_r2, median_rank, disqualified = qualification_ranks(records, ["A", "linear"], "linear")
    assert median_r2["d1"] == {"A": pytest.approx(0.8), "linear": pytest.approx(0.55)}
    assert median_rank == {"A": 1.0, "linear": 2.0}
    assert disqualified == ["A"]


def test_qualification_linear_only(tmp_path):
    cfg = TrackConfig(
        track=TrackKind.QUALIFICATION, algorithms=[LINEAR], runs=2, budget_seconds=30, datasets=_exact_files(tmp_path)
    )
    result = run_qualification(cfg)
    assert result.qualification.baseline == "ols"
    assert result.qualification.disqualified == []
    assert len(result.scores) == 2 * 2


def test_qualification_disqualifies_constant_zero(tmp_path):
    zero = AlgorithmSpec(name="zero", kind=EngineKind.CONSTANT, constant_value=0.0)
    cfg = TrackConfig(
        track=TrackKind.QUALIFICATION, algorithms=[zero], runs=2, budget_seconds=30, datasets=_exact_files(tmp_path)
    )
    result = run_qualification(cfg)
    q = result.qualification
    assert q.baseline == "linear"
    assert q.disqualified == ["zero"]
    for per_algo in q.median_r2.values():
        assert per_algo["zero"] <= 0.0 < per_algo["linear"]
    assert "75/25" in result.assumptions[0]


def test_qualification_needs_datasets():
    with pytest.raises(ConfigurationError):
        run_qualification(TrackConfig(track=TrackKind.QUALIFICATION, algorithms=[LINEAR]))


@pytest.mark.slow
def test_gp_beats_linear_on_exact_rediscovery(tmp_path):
    gp = AlgorithmSpec(name="gp", gp=GpConfig(population_size=200, generations=30))
    cfg = TrackConfig(
        track=TrackKind.QUALIFICATION, algorithms=[gp, LINEAR], runs=3, budget_seconds=60,
        datasets=_exact_files(tmp_path, seeds=(0,)),
    )
    q = run_qualification(cfg).qualification
    (per_algo,) = q.median_r2.values()
    assert per_algo["gp"] >= per_algo["ols"]
    assert q.disqualified == []


ARITHMETIC_GP = GpConfig(
    population_size=500,
    generations=40,
    primitives=["add", "sub", "mul"],
    tune_every=2,
    tune_fraction=0.2,
    lm_iterations=50,
)


@pytest.mark.slow
def test_gp_baseline_passes_qualification_on_feature_selection_data(tmp_path):
    train, _ = gen_feature_selection(Difficulty.EASY, 0, n_train=1000, n_test=10)
    path = str(write_dataset(train, tmp_path / "eq1.tsv"))
    gp = AlgorithmSpec(name="gp", gp=ARITHMETIC_GP, selection=SelectionPolicy.SMALLEST_WITHIN_EPS)
    dummy = AlgorithmSpec(name="mean", kind=EngineKind.CONSTANT)
    cfg = TrackConfig(
        track=TrackKind.QUALIFICATION, algorithms=[gp, dummy], runs=10, budget_seconds=120, datasets=[path],
    )
    q = run_qualification(cfg).qualification
    (per_algo,) = q.median_r2.values()
    assert per_algo["gp"] >= per_algo["linear"] + 0.05
    assert q.disqualified == ["mean"]


# --- synthetic ---------------------------------------------------------------------------


def _synthetic_config(**extra) -> TrackConfig:
    base = dict(
        track=TrackKind.SYNTHETIC,
        algorithms=[AlgorithmSpec(name="gp", gp=TINY_GP), LINEAR],
        runs=2,
        budget_seconds=60,
        seeds=[0],
        tasks=[TaskSelection(task=TaskKind.EXACT, difficulties=[Difficulty.EASIER])],
        n_train=60,
        n_test=60,
    )
    base.update(extra)
    return TrackConfig(**base)


def test_selected_levels():
    cfg = _synthetic_config(tasks=[TaskSelection(task=TaskKind.NOISE)])
    assert selected_levels(cfg) == [
        (TaskKind.NOISE, Difficulty.EASY), (TaskKind.NOISE, Difficulty.MEDIUM), (TaskKind.NOISE, Difficulty.HARD)
    ]
    assert len(selected_levels(_synthetic_config(tasks=None))) == 16
    bad = _synthetic_config(tasks=[TaskSelection(task=TaskKind.FEATURE_SELECTION, difficulties=[Difficulty.EASIER])])
    with pytest.raises(ConfigurationError):
        selected_levels(bad)


def test_synthetic_rerun_is_byte_identical(tmp_path):
    cfg = _synthetic_config()
    writer = FileReportWriter()
    writer.write(run_synthetic(cfg), tmp_path / "a")
    writer.write(run_synthetic(cfg), tmp_path / "b")
    first = (tmp_path / "a" / "report.json").read_bytes()
    assert first == (tmp_path / "b" / "report.json").read_bytes()
    assert (tmp_path / "a" / "scores.csv").read_bytes() == (tmp_path / "b" / "scores.csv").read_bytes()
    payload = json.loads(first)
    assert "wall_seconds" not in json.dumps(payload)
    assert set(payload["reports"]) == {"ExactRediscovery", "overall"}


def test_oracle_tops_and_constant_cannot_game_the_aggregate():
    cfg = _synthetic_config(
        algorithms=[
            AlgorithmSpec(name="oracle", kind=EngineKind.ORACLE),
            AlgorithmSpec(name="mean", kind=EngineKind.CONSTANT),
            LINEAR,
        ],
        runs=1,
        seeds=[0, 1],
        tasks=[
            TaskSelection(task=TaskKind.EXACT, difficulties=[Difficulty.EASIER]),
            TaskSelection(task=TaskKind.FEATURE_SELECTION, difficulties=[Difficulty.EASY]),
        ],
        n_train=200,
        n_test=200,
    )
    result = run_synthetic(cfg)
    oracle = [s for s in result.scores if s.algorithm == "oracle"]
    assert all(s.r2_test == pytest.approx(1.0) for s in oracle)
    assert all(s.exact.exact for s in oracle if s.exact is not None)

    constant_fs = [s for s in result.scores if s.algorithm == "mean" and s.dataset.startswith("FeatureSelection")]
    assert constant_fs and all(s.task_score == 1.0 for s in constant_fs)

    overall = result.reports["overall"]
    assert overall.winner == "oracle"
    assert overall.summary_for("mean").median < overall.summary_for("oracle").median
    fs = result.reports["FeatureSelection"]
    for d in fs.datasets:
        assert fs.ranks[d]["r2_test"]["oracle"] == 3.0

    (rate,) = [r for r in result.recovery if r.algorithm == "oracle"]
    assert rate.any_run == 1.0 and rate.per_run == 1.0
    assert {s.level for s in result.showcase} == {"ExactRediscovery-Easier", "FeatureSelection-Easy"}


@pytest.mark.slow
def test_gp_baseline_recovers_easier_exact_rediscovery():
    gp = AlgorithmSpec(name="gp", gp=ARITHMETIC_GP, selection=SelectionPolicy.BEST_TEST_R2)
    cfg = _synthetic_config(algorithms=[gp], runs=10, budget_seconds=120, n_train=1000, n_test=1000)
    result = run_synthetic(cfg)
    assert len(result.scores) == 10
    hits = sum(1 for s in result.scores if s.exact is not None and s.exact.exact)
    assert hits >= 3


@pytest.mark.slow
def test_constant_entrant_never_wins_against_gp_and_oracle():
    cfg = _synthetic_config(
        algorithms=[
            AlgorithmSpec(name="oracle", kind=EngineKind.ORACLE),
            AlgorithmSpec(name="mean", kind=EngineKind.CONSTANT),
            AlgorithmSpec(name="gp", gp=GpConfig(population_size=200, generations=20)),
        ],
        runs=3,
        seeds=[0, 1],
        tasks=[
            TaskSelection(task=TaskKind.EXACT, difficulties=[Difficulty.EASIER]),
            TaskSelection(task=TaskKind.FEATURE_SELECTION, difficulties=[Difficulty.EASY]),
        ],
        n_train=300,
        n_test=300,
    )
    result = run_synthetic(cfg)
    overall = result.reports["overall"]
    assert overall.winner != "mean"
    assert overall.summary_for("mean").median < overall.summary_for("oracle").median


# --- real world --------------------------------------------------------------------------


def _realworld_config(tmp_path, algorithms) -> TrackConfig:
    return TrackConfig(
        track=TrackKind.REALWORLD,
        algorithms=algorithms,
        runs=1,
        budget_seconds=30,
        series_csv=_series_csv(tmp_path / "series.csv"),
        targets=["cases"],
        output_dir=str(tmp_path / "out"),
    )


def test_realworld_trust_orders_identical_models(tmp_path):
    cfg = _realworld_config(
        tmp_path, [AlgorithmSpec(name="lin_a", kind=EngineKind.LINEAR), AlgorithmSpec(name="lin_b", kind=EngineKind.LINEAR)]
    )
    provider = StaticRatingProvider({"cases-lin_a": 5, "cases-lin_b": 1})
    result = run_realworld(cfg, provider, tmp_path / "out")
    first, second = result.realworld["cases"]
    assert (first.algorithm, second.algorithm) == ("lin_a", "lin_b")
    assert first.r2_test == second.r2_test
    assert first.score > second.score
    assert (tmp_path / "out" / "screens" / "cases-lin_a.md").exists()
    assert (tmp_path / "out" / "screens" / "cases-lin_a.csv").exists()


def test_realworld_single_algorithm_and_missing_trust(tmp_path):
    cfg = _realworld_config(tmp_path, [LINEAR])
    result = run_realworld(cfg, StaticRatingProvider({"cases-ols": 3}), tmp_path / "out")
    (only,) = result.realworld["cases"]
    assert only.score == 1.0
    assert only.model_id == "cases-ols"
    with pytest.raises(MissingTrust):
        run_realworld(cfg, StaticRatingProvider({}), tmp_path / "out")


def test_realworld_pipeline_needs_a_rating_provider(tmp_path):
    cfg = _realworld_config(tmp_path, [LINEAR])
    with pytest.raises(ConfigurationError):
        TrackPipeline(run_id="t", config=cfg, deps=PipelineDependencies()).run()



FLAT = Constant(0.0) * x(0)


class _KneeDisagrees(LinearRegressor):
    """Front whose knee member is a flat line while the widest member is the OLS fit."""

    def fit(self, X, y):
        ols = LinearRegressor().fit(X, y).expr_
        self.front_ = ParetoFront([
            FrontEntry(Constant(-1e6), 10.0, 1, "-1e6"),
            FrontEntry(FLAT, 2.0, 3, "flat"),
            FrontEntry(ols, 1.9, 30, "ols"),
        ])
        self.expr_ = select_model(self.front_, SelectionPolicy.KNEE)
        return self


def test_run_selection_override_uses_test_split(monkeypatch):
    monkeypatch.setattr("pipelines.track_pipeline.build_regressor", lambda *a, **k: _KneeDisagrees())
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(60, 2))
    ds = Dataset(features=X, target=3 * X[:, 0] - X[:, 1] + 5, feature_names=["x1", "x2"], name="plane")
    job = RunJob(algorithm=LINEAR, train=ds, test=ds, run=0, seed=1, budget_seconds=5.0)
    assert execute_run(job).expr == FLAT
    job = replace(job, selection=SelectionPolicy.BEST_TEST_R2)
    outcome = execute_run(job)
    assert outcome.expr != FLAT
    assert outcome.score.r2_test == pytest.approx(1.0)


def test_realworld_scores_best_test_member_of_front(monkeypatch, tmp_path):
    monkeypatch.setattr("pipelines.track_pipeline.build_regressor", lambda *a, **k: _KneeDisagrees())
    cfg = _realworld_config(tmp_path, [LINEAR])
    assert LINEAR.selection is SelectionPolicy.KNEE
    result = run_realworld(cfg, StaticRatingProvider({"cases-ols": 3}), tmp_path / "out")
    (model,) = result.models
    assert model.expression != print_infix(FLAT)
    (entry,) = result.realworld["cases"]
    assert entry.r2_test == model.test_r2 > 0.5

# --- rating providers --------------------------------------------------------------------


def _entries():
    return [
        RealworldEntry(algorithm="A", model_id="cases-A", r2_test=0.8, simplicity=-1.0),
        RealworldEntry(algorithm="B", model_id="cases-B", r2_test=0.6, simplicity=-2.0),
    ]


def test_csv_rating_provider_averages(tmp_path):
    path = write_ratings(
        [
            TrustRating(model_id="cases-A", rating=4, rater="r1"),
            TrustRating(model_id="cases-A", rating=5, rater="r2"),
            TrustRating(model_id="cases-B", rating=2, rater="r1"),
            TrustRating(model_id="deaths-A", rating=1, rater="r1"),
        ],
        tmp_path / "ratings.csv",
    )
    assert CsvRatingProvider(str(path)).ratings_for(_entries(), {}) == {"cases-A": 4.5, "cases-B": 2.0}


def test_cli_rating_provider_prompts_until_valid(tmp_path):
    answers = iter(["seven", "4", ""])
    shown = []
    card = tmp_path / "cases-A.md"
    card.write_text("# Model cases-A\n", encoding="utf-8")
    provider = CLIRatingProvider(
        rater="tester",
        save_path=str(tmp_path / "saved.csv"),
        ask=lambda prompt: next(answers),
        show=shown.append,
    )
    trust = provider.ratings_for(_entries(), {"cases-A": card})
    assert trust == {"cases-A": 4.0}
    assert shown[0] == "# Model cases-A\n"
    assert any("whole number" in line for line in shown)
    saved = read_ratings(tmp_path / "saved.csv")
    assert [(r.model_id, r.rating, r.rater) for r in saved] == [("cases-A", 4, "tester")]


# --- orchestration and files -------------------------------------------------------------


def test_build_pipeline_writes_all_outputs(tmp_path):
    cfg = _synthetic_config(
        algorithms=[AlgorithmSpec(name="mean", kind=EngineKind.CONSTANT), LINEAR],
        runs=1,
        seeds=[0, 1],
        output_dir=str(tmp_path / "out"),
    )
    result = build_pipeline(cfg, run_id="test-run").run()
    out = tmp_path / "out"
    for name in ("report.json", "report.md", "scores.csv", "timings.csv", "cd_overall.csv", "cd_ExactRediscovery.csv"):
        assert (out / name).exists(), name
    assert result.outputs["json"].endswith("report.json")
    scores = pd.read_csv(out / "scores.csv")
    assert len(scores) == 2 * 2
    assert "wall_seconds" not in scores.columns
    timings = pd.read_csv(out / "timings.csv")
    assert sorted(timings["algorithm"]) == ["mean", "ols"]
    assert (timings["in_grace"] == 0).all() and (timings["budget_exceeded"] == 0).all()
    text = (out / "report.md").read_text(encoding="utf-8")
    assert "# Track report: synthetic" in text and "**(winner)**" in text
