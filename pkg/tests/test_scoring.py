import math

import numpy as np
import pytest

from errors import ConfigurationError, DegenerateTarget, MissingRecords, NonPositiveRank, UnsupportedK
from eval.critical_difference import (
    critical_difference,
    friedman_nemenyi,
    friedman_statistic,
    nemenyi_groups,
    q_alpha,
)
from eval.metrics import feature_select_score, r2, simplicity_from_nodes, simplicity_score, task_score
from eval.rubric import (
    aggregate_track,
    harmonic_rank,
    level_of,
    rank_criterion,
    record_aggregates,
    recovery_rates,
    score_record,
    showcase,
)
from eval.runner import collect_scores, evaluate, write_report
from export.json_writer import write_json
from expr.nodes import Constant, x
from generators.tasks import gen_exact
from models.records import EquivalenceVerdict, ModelRecord, RunStatus, ScoreRecord, VerdictKind
from models.tasks import Difficulty, TaskKind

RELEVANT = frozenset(range(0, 20, 2))
IRRELEVANT = frozenset(range(1, 20, 2))


def _rec(algorithm, dataset="d", run=0, r2_test=0.5, simplicity=-1.0, task=None, exact=None):
    return ScoreRecord(
        algorithm=algorithm,
        dataset=dataset,
        run=run,
        r2_test=r2_test,
        simplicity=simplicity,
        task_score=task,
        exact=exact,
    )


def _verdict(hit: bool) -> EquivalenceVerdict:
    if hit:
        return EquivalenceVerdict(kind=VerdictKind.EXACT_ADDITIVE, constant=0.0, evidence=256)
    return EquivalenceVerdict(kind=VerdictKind.NOT_EQUIVALENT, evidence=256)


# --- per-model metrics -------------------------------------------------------------------


def test_r2_examples():
    y = np.array([0.0, 1.0, 2.0])
    assert r2(y, y) == 1.0
    assert r2(y, np.full(3, y.mean())) == pytest.approx(0.0)
    assert r2(y, np.zeros(3)) == pytest.approx(-1.5)
    assert r2(y, np.array([0.0, np.nan, 1.0])) == -math.inf


def test_r2_errors():
    with pytest.raises(DegenerateTarget):
        r2(np.ones(4), np.zeros(4))
    with pytest.raises(ValueError):
        r2(np.arange(3.0), np.arange(4.0))


@pytest.mark.parametrize("nodes, expected", [(1, 0.0), (5, -1.0), (25, -2.0), (125, -3.0), (10, -1.4)])
def test_simplicity_table(nodes, expected):
    assert simplicity_from_nodes(nodes) == expected


def test_simplicity_uses_simplified_size():
    assert simplicity_score(x(0) * 1 + 0) == 0.0
    assert simplicity_score(x(0) + x(1) * x(2)) == -1.0


def test_feature_select_score_examples():
    assert feature_select_score(x(0) + x(2) * x(18), RELEVANT, IRRELEVANT) == 1.0
    every_irrelevant = sum((x(i) for i in sorted(IRRELEVANT)[1:]), x(1))
    assert feature_select_score(every_irrelevant, RELEVANT, IRRELEVANT) == 0.0
    assert feature_select_score(Constant(1.0), RELEVANT, IRRELEVANT) == 1.0
    # x1 cancels before variable use is judged
    assert feature_select_score(x(1) - x(1) + x(0), RELEVANT, IRRELEVANT) == 1.0
    with pytest.raises(ValueError):
        feature_select_score(x(0), RELEVANT, frozenset())


def test_feature_select_score_is_clamped():
    assert feature_select_score(x(0), frozenset({0, 1, 2}), frozenset({3})) == 1.0
    assert feature_select_score(x(3) + x(4), frozenset(), frozenset({3, 4})) == 0.0


def test_task_score_by_kind():
    _, test = gen_exact(Difficulty.EASIER, 0, n_train=10, n_test=50)
    assert task_score(TaskKind.NOISE, x(0), test) is None
    assert task_score(TaskKind.EXACT, x(0), test, None) == 0.0
    assert task_score(TaskKind.EXACT, x(0), test, _verdict(True)) == 1.0
    assert task_score(None, x(0), test) is None


def test_score_record_for_oracle_and_failures():
    _, test = gen_exact(Difficulty.EASIER, 0, n_train=10, n_test=200)
    oracle = score_record("oracle", test, 0, test.ground_truth, task=TaskKind.EXACT)
    assert oracle.r2_test == pytest.approx(1.0)
    assert oracle.exact is not None and oracle.exact.exact
    assert oracle.task_score == 1.0
    assert oracle.dataset == test.dataset_id

    crashed = score_record("gp", test, 1, None, task=TaskKind.EXACT, status=RunStatus.FAILED)
    assert crashed.r2_test == -math.inf and crashed.simplicity == -math.inf
    assert crashed.task_score == 0.0

    late = score_record("gp", test, 2, test.ground_truth, task=TaskKind.EXACT, status=RunStatus.BUDGET_EXCEEDED)
    assert late.r2_test == -math.inf
    assert math.isfinite(late.simplicity)
    assert not late.exact.exact


# --- ranks and aggregation ---------------------------------------------------------------


def test_harmonic_rank_examples():
    assert harmonic_rank([1, 1, 1]) == 1.0
    assert harmonic_rank([10, 10, 10]) == pytest.approx(10.0)
    assert harmonic_rank([10, 1, 1]) == pytest.approx(1.428571428571, abs=1e-12)
    with pytest.raises(NonPositiveRank):
        harmonic_rank([1, 0, 2])
    with pytest.raises(NonPositiveRank):
        harmonic_rank([])


def test_harmonic_rank_lies_between_min_and_mean():
    rng = np.random.default_rng(0)
    for _ in range(200):
        ranks = rng.uniform(1, 10, size=3)
        h = harmonic_rank(ranks)
        assert ranks.min() - 1e-12 <= h <= ranks.mean() + 1e-12


def test_rank_criterion_examples():
    assert rank_criterion([0.2, 0.9]).tolist() == [1.0, 2.0]
    assert rank_criterion([0.9, 0.9, 0.5]).tolist() == [2.5, 2.5, 1.0]
    assert rank_criterion([3.0, 1.0], higher_better=False).tolist() == [1.0, 2.0]
    assert rank_criterion([np.nan, -np.inf, 0.0]).tolist()[2] == 3.0


def test_rank_criterion_is_permutation_equivariant_and_scale_invariant():
    values = np.array([0.3, -1.0, 2.5, 0.3, 7.0])
    perm = np.array([4, 2, 0, 1, 3])
    base = rank_criterion(values)
    assert rank_criterion(values[perm]).tolist() == base[perm].tolist()
    assert rank_criterion(values * 3.5).tolist() == base.tolist()


def test_aggregate_two_algorithms_opposite_profiles():
    records = [
        _rec("A", r2_test=0.9, simplicity=-1.0, task=0.1),
        _rec("B", r2_test=0.5, simplicity=-2.0, task=0.8),
    ]
    report = aggregate_track(records)
    assert report.aggregate["d"]["A"] == pytest.approx(1.5)
    assert report.aggregate["d"]["B"] == pytest.approx(1.2)
    assert report.criteria == ["r2_test", "simplicity", "task_score"]
    assert report.winner == "A"
    assert report.friedman_stat is None


def test_aggregate_single_algorithm():
    records = [_rec("solo", dataset=d, run=r) for d in ("a", "b") for r in range(3)]
    report = aggregate_track(records)
    assert report.summary_for("solo").median == 1.0
    assert report.winner == "solo"
    assert report.criteria == ["r2_test", "simplicity"]


def test_aggregate_best_everywhere_gets_k():
    records = []
    for d in ("a", "b", "c"):
        records.append(_rec("top", dataset=d, r2_test=0.99, simplicity=-0.5))
        records.append(_rec("mid", dataset=d, r2_test=0.8, simplicity=-1.0))
        records.append(_rec("low", dataset=d, r2_test=0.1, simplicity=-2.0))
    report = aggregate_track(records)
    assert report.summary_for("top").aggregates == pytest.approx([3.0, 3.0, 3.0])
    assert report.summary_for("low").median == 1.0
    assert report.friedman_stat is not None and report.friedman_stat > 0
    assert report.critical_difference == pytest.approx(critical_difference(3, 3))


def test_aggregate_uses_median_over_runs():
    records = [
        _rec("A", run=0, r2_test=0.9),
        _rec("A", run=1, r2_test=0.1),
        _rec("A", run=2, r2_test=0.8),
        _rec("B", run=0, r2_test=0.7),
        _rec("B", run=1, r2_test=0.7),
        _rec("B", run=2, r2_test=0.7),
    ]
    report = aggregate_track(records)
    assert report.ranks["d"]["r2_test"] == {"A": 2.0, "B": 1.0}
    per_run = aggregate_track(records, median_first=False)
    assert per_run.median_first is False
    assert per_run.aggregate["d"]["A"] == pytest.approx(harmonic_rank([2.0, 1.5]))


def test_aggregate_reports_holes():
    records = [_rec("A", run=0), _rec("A", run=1), _rec("B", run=0)]
    with pytest.raises(MissingRecords) as info:
        aggregate_track(records)
    assert info.value.holes == ["B/d/1"]
    with pytest.raises(MissingRecords):
        aggregate_track([_rec("A")], algorithms=["A", "C"])
    with pytest.raises(MissingRecords):
        aggregate_track([])


def test_duplicate_records_are_rejected():
    with pytest.raises(ConfigurationError):
        aggregate_track([_rec("A"), _rec("A")])


def test_winner_ties_break_on_mean_then_name():
    records = [
        _rec("B", dataset="a", r2_test=0.5),
        _rec("A", dataset="a", r2_test=0.5),
    ]
    assert aggregate_track(records).winner == "A"


# --- critical difference -----------------------------------------------------------------


def test_critical_difference_constants():
    assert critical_difference(8, 10) == pytest.approx(3.320, abs=0.01)
    assert q_alpha(8) == pytest.approx(3.031, abs=1e-3)
    assert critical_difference(2, 9) == pytest.approx(q_alpha(2) / 3.0)
    assert critical_difference(5, 10, 0.10) < critical_difference(5, 10, 0.05)


def test_critical_difference_limits():
    assert q_alpha(20) > q_alpha(19)
    with pytest.raises(UnsupportedK):
        q_alpha(21)
    with pytest.raises(ConfigurationError):
        q_alpha(1)
    with pytest.raises(ConfigurationError):
        q_alpha(5, alpha=0.01)


def test_friedman_identical_ranks_is_zero():
    same = np.full((5, 4), 2.5)
    assert friedman_statistic(same) == 0.0
    stats = friedman_nemenyi(same)
    assert stats.statistic == 0.0
    assert stats.p_value == pytest.approx(1.0)
    assert stats.groups == [[0, 1, 2, 3]]


def test_friedman_detects_consistent_ordering():
    matrix = np.tile([1.0, 2.0, 3.0, 4.0], (12, 1))
    stats = friedman_nemenyi(matrix)
    assert stats.statistic == pytest.approx(36.0)
    assert stats.p_value < 1e-6
    assert stats.groups == [[0, 1], [1, 2], [2, 3]]
    with pytest.raises(ConfigurationError):
        friedman_nemenyi(np.ones((1, 3)))


def test_nemenyi_groups():
    assert nemenyi_groups([1.0, 1.5, 4.0], 1.0) == [[0, 1], [2]]
    assert nemenyi_groups([3.0, 1.0, 2.0], 5.0) == [[1, 2, 0]]


# --- level summaries ---------------------------------------------------------------------


def test_level_of():
    assert level_of("ExactRediscovery-Easy-s3") == "ExactRediscovery-Easy"
    assert level_of("plain") == "plain"
    assert level_of("a-sb") == "a-sb"


def test_recovery_rates_any_best_and_per_run():
    lvl = "ExactRediscovery-Easy"
    records = [
        _rec("A", f"{lvl}-s0", 0, r2_test=0.9, exact=_verdict(True)),
        _rec("A", f"{lvl}-s0", 1, r2_test=0.95, exact=_verdict(False)),
        _rec("A", f"{lvl}-s1", 0, r2_test=0.5, exact=_verdict(False)),
        _rec("A", f"{lvl}-s1", 1, r2_test=0.4, exact=_verdict(False)),
        _rec("A", "FeatureSelection-Easy-s0", 0),
    ]
    (rate,) = recovery_rates(records)
    assert rate.level == lvl
    assert rate.datasets == 2 and rate.runs == 4
    assert rate.any_run == 0.5
    assert rate.best_run == 0.0
    assert rate.per_run == 0.25


def test_showcase_picks_highest_aggregate_per_level():
    records = [
        _rec("A", "T-Easy-s0", 0, r2_test=0.9, simplicity=-1.0),
        _rec("B", "T-Easy-s0", 0, r2_test=0.2, simplicity=-2.0),
        _rec("A", "T-Hard-s0", 0, r2_test=0.1, simplicity=-2.0),
        _rec("B", "T-Hard-s0", 0, r2_test=0.3, simplicity=-1.0),
    ]
    aggregates = record_aggregates(records)
    assert aggregates[("A", "T-Easy-s0", 0)] == 2.0
    picks = {s.level: s for s in showcase(records)}
    assert picks["T-Easy"].algorithm == "A"
    assert picks["T-Hard"].algorithm == "B"
    assert picks["T-Hard"].record.r2_test == 0.3


# --- runner ------------------------------------------------------------------------------


def test_evaluate_model_record():
    _, test = gen_exact(Difficulty.EASIER, 1, n_train=10, n_test=100)
    good = ModelRecord(algorithm="gp", dataset=test.dataset_id, seed=1, expression="x0 + x1")
    scored = evaluate(good, test)
    assert scored.r2_test < 1.0
    assert scored.exact is not None and not scored.exact.exact
    assert scored.nodes_simplified == 3

    broken = ModelRecord(algorithm="gp", dataset=test.dataset_id, seed=1, expression="x0 +")
    scored = evaluate(broken, test)
    assert scored.status is RunStatus.FAILED
    assert scored.r2_test == -math.inf


def test_collect_scores_and_report(tmp_path):
    records = [
        _rec("A", r2_test=0.9),
        _rec("B", r2_test=-math.inf, simplicity=-math.inf),
    ]
    for rec in records:
        write_json(rec, tmp_path / "runs" / f"{rec.algorithm}.score.json", drop=())
    back = collect_scores(tmp_path / "runs")
    assert [r.algorithm for r in back] == ["A", "B"]
    assert back[1].r2_test == -math.inf

    out = write_report(back, tmp_path / "report.md")
    text = (tmp_path / "report.md").read_text(encoding="utf-8")
    assert out.endswith("report.md")
    assert "| A | d | 0 | 0.9 |" in text
    assert "Records: 2 (0 failed)" in text
