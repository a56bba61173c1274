"""Deterministic generators for the five synthetic competition tasks.

Each (seed, task) owns independent random streams per purpose (train inputs, test
inputs, noise, meta-feature noise). Streams do not depend on the difficulty, so two
difficulties of one task share feature matrices and differ only where the recipe differs.
Task definitions name features 1-based (x1, x2, ...); expression variables are 0-based.
"""

from __future__ import annotations

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError
from expr.evaluate import predict
from expr.nodes import Expr, erf, log, sin, variables, x
from generators.noise import add_noise
from models.dataset import Dataset
from models.tasks import ADMISSIBLE_DIFFICULTIES, Difficulty, Interval, TaskKind, TaskSpec

logger = logging.getLogger(__name__)

DEFAULT_N = 1000
DEFAULT_INTERVAL: Interval = (-3.0, 3.0)
EXTRAPOLATION_TRAIN: Interval = (-15.0, 15.0)
EXTRAPOLATION_TEST: Interval = (15.0, 40.0)
NOISE_TASK_INTERVAL: Interval = (-10.0, 10.0)
F2_MIN_ABS_X3 = 0.05
META_NOISE_RATIO = 0.1

_TASK_CODES = {kind: i for i, kind in enumerate(TaskKind)}
_PURPOSE_CODES = {"train": 0, "test": 1, "noise": 2, "meta-train": 3, "meta-test": 4}

FEATURE_SELECTION_RATIOS = {Difficulty.EASY: 0.025, Difficulty.MEDIUM: 0.05, Difficulty.HARD: 0.1}
LOCAL_OPTIMA_SIZES = {Difficulty.EASY: 3, Difficulty.MEDIUM: 4, Difficulty.HARD: 5}
EXTRAPOLATION_RATIOS = {Difficulty.EASY: 0.05, Difficulty.MEDIUM: 0.1, Difficulty.HARD: 0.2}
NOISE_TASK_RATIOS = {Difficulty.EASY: 0.05, Difficulty.MEDIUM: 0.1, Difficulty.HARD: 0.15}

DOMAIN_ASSUMPTIONS = [
    "sample counts default to 1000 train / 1000 test",
    "inputs uniform on the task interval",
    "noise standard deviation uses the noiseless sample sigma (n-1)",
    "noise applied to the train target only",
]


def stream(seed: int, task: TaskKind, purpose: str) -> np.random.Generator:
    """Independent generator for one (seed, task, purpose) triple."""
    seq = np.random.SeedSequence([int(seed), _TASK_CODES[task], _PURPOSE_CODES[purpose]])
    return np.random.default_rng(seq)


# --- ground truths -------------------------------------------------------------------------


def _radial() -> Expr:
    return 0.2 * (x(0) ** 2 + x(1) ** 2) + 1


def f1() -> Expr:
    return 0.4 * x(0) * x(1) - 1.5 * x(0) + 2.5 * x(1) + 1


def f2() -> Expr:
    return f1() + log(30 * x(2) ** 2)


def f3() -> Expr:
    return f1() / _radial()


def f4() -> Expr:
    return (f1() + 5.5 * sin(x(0) + x(1))) / _radial()


EXACT_FUNCTIONS: Dict[Difficulty, Tuple[Callable[[], Expr], int]] = {
    Difficulty.EASIER: (f1, 2),
    Difficulty.EASY: (f2, 3),
    Difficulty.MEDIUM: (f3, 2),
    Difficulty.HARD: (f4, 2),
}


def feature_selection_truth() -> Expr:
    x1, x3, x5, x7, x9 = x(0), x(2), x(4), x(6), x(8)
    x11, x13, x15, x17, x19 = x(10), x(12), x(14), x(16), x(18)
    return (
        0.11 * x1**3
        + 0.91 * x3 * x5
        + 0.68 * x7 * x9
        + 0.26 * x11**2 * x13
        + 0.16 * x15 * x17 * x19
    )


def meta_features() -> List[Expr]:
    x1, x2, x3, x4, x5 = (x(i) for i in range(5))
    return [
        0.77 * x1 * x2,
        1.52 * x2 * x3,
        1.2 * x4**2,
        0.31 * x1 * x4 * x5,
        0.23 * x3 * x4 * x5,
    ]


def local_optima_truth(n: int) -> Expr:
    terms = meta_features()[:n]
    out = terms[0]
    for term in terms[1:]:
        out = out + term
    return out


def extrapolation_truth(include_sine: bool = True) -> Expr:
    base = erf(0.22 * x(0))
    return base + 0.17 * sin(5.5 * x(0)) if include_sine else base


def noise_task_truth() -> Expr:
    return (0.11 * x(0) ** 4 - 1.4 * x(0) ** 3) / (0.68 * x(0) ** 2 + 1)


# --- helpers -------------------------------------------------------------------------------


def _check(task: TaskKind, difficulty: Difficulty) -> Difficulty:
    difficulty = Difficulty(difficulty)
    if difficulty not in ADMISSIBLE_DIFFICULTIES[task]:
        raise ConfigurationError(f"{difficulty.value} is not a difficulty of {task.value}")
    return difficulty


def _uniform(rng: np.random.Generator, n: int, domain: Sequence[Interval]) -> np.ndarray:
    lo = np.array([a for a, _ in domain], dtype=float)
    hi = np.array([b for _, b in domain], dtype=float)
    return lo + rng.random((n, len(domain))) * (hi - lo)


def _names(prefix: str, count: int, start: int = 1) -> List[str]:
    return [f"{prefix}{i}" for i in range(start, start + count)]


def _pair(
    spec: TaskSpec,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_test: np.ndarray,
    y_test: np.ndarray,
    truth: Expr,
    names: List[str],
    relevant: Sequence[int],
    irrelevant: Sequence[int],
) -> Tuple[Dataset, Dataset]:
    common = dict(
        feature_names=names,
        ground_truth=truth,
        relevant_vars=frozenset(relevant),
        irrelevant_vars=frozenset(irrelevant),
        spec=spec,
    )
    train = Dataset(features=X_train, target=y_train, split="train", **common)
    test = Dataset(features=X_test, target=y_test, split="test", **common)
    logger.debug("generated %s (%d train / %d test rows)", spec.dataset_id, len(y_train), len(y_test))
    return train, test


# --- generators ----------------------------------------------------------------------------


def gen_exact(
    difficulty: Difficulty, seed: int, n_train: int = DEFAULT_N, n_test: int = DEFAULT_N
) -> Tuple[Dataset, Dataset]:
    """Noiseless samples of f1..f4 (Easier..Hard)."""
    task = TaskKind.EXACT
    difficulty = _check(task, difficulty)
    make, d = EXACT_FUNCTIONS[difficulty]
    truth = make()
    domain = [DEFAULT_INTERVAL] * d
    assumptions = list(DOMAIN_ASSUMPTIONS)
    if difficulty is Difficulty.EASY:
        assumptions.append(f"x3 resampled until |x3| >= {F2_MIN_ABS_X3}")
    spec = TaskSpec(
        task=task, difficulty=difficulty, n_train=n_train, n_test=n_test,
        domain=domain, seed=seed, assumptions=assumptions,
    )

    def sample(purpose: str, n: int) -> np.ndarray:
        rng = stream(seed, task, purpose)
        X = _uniform(rng, n, domain)
        if d == 3:
            bad = np.abs(X[:, 2]) < F2_MIN_ABS_X3
            while np.any(bad):
                X[bad, 2] = _uniform(rng, int(bad.sum()), [DEFAULT_INTERVAL])[:, 0]
                bad = np.abs(X[:, 2]) < F2_MIN_ABS_X3
        return X

    X_train, X_test = sample("train", n_train), sample("test", n_test)
    return _pair(
        spec, X_train, predict(truth, X_train), X_test, predict(truth, X_test),
        truth, _names("x", d), range(d), (),
    )


def gen_feature_selection(
    difficulty: Difficulty, seed: int, n_train: int = DEFAULT_N, n_test: int = DEFAULT_N
) -> Tuple[Dataset, Dataset]:
    """Twenty uniform features, target over the odd (1-based) ones, noisy train target."""
    task = TaskKind.FEATURE_SELECTION
    difficulty = _check(task, difficulty)
    ratio = FEATURE_SELECTION_RATIOS[difficulty]
    domain = [DEFAULT_INTERVAL] * 20
    spec = TaskSpec(
        task=task, difficulty=difficulty, noise_ratio=ratio, n_train=n_train, n_test=n_test,
        domain=domain, seed=seed, assumptions=list(DOMAIN_ASSUMPTIONS),
    )
    truth = feature_selection_truth()
    X_train = _uniform(stream(seed, task, "train"), n_train, domain)
    X_test = _uniform(stream(seed, task, "test"), n_test, domain)
    y_train = add_noise(predict(truth, X_train), ratio, stream(seed, task, "noise"))
    return _pair(
        spec, X_train, y_train, X_test, predict(truth, X_test), truth,
        _names("x", 20), range(0, 20, 2), range(1, 20, 2),
    )


def gen_local_optima(
    difficulty: Difficulty, seed: int, n_train: int = DEFAULT_N, n_test: int = DEFAULT_N
) -> Tuple[Dataset, Dataset]:
    """x1..x5 followed by n noisy meta-feature columns; the target stays noiseless."""
    task = TaskKind.LOCAL_OPTIMA
    difficulty = _check(task, difficulty)
    n = LOCAL_OPTIMA_SIZES[difficulty]
    domain = [DEFAULT_INTERVAL] * 5
    spec = TaskSpec(
        task=task, difficulty=difficulty, n_train=n_train, n_test=n_test, domain=domain, seed=seed,
        assumptions=list(DOMAIN_ASSUMPTIONS)
        + [f"meta-feature noise ratio {META_NOISE_RATIO} with each column's own sigma"],
    )
    truth = local_optima_truth(n)
    metas = meta_features()[:n]

    def build(purpose: str, count: int) -> Tuple[np.ndarray, np.ndarray]:
        X = _uniform(stream(seed, task, purpose), count, domain)
        rng = stream(seed, task, f"meta-{purpose}")
        columns = [add_noise(predict(g, X), META_NOISE_RATIO, rng) for g in metas]
        return np.column_stack([X] + columns), predict(truth, X)

    X_train, y_train = build("train", n_train)
    X_test, y_test = build("test", n_test)
    used = sorted({v for g in metas for v in variables(g)})
    unused = [i for i in range(5) if i not in used]
    irrelevant = unused + list(range(5, 5 + n))
    return _pair(
        spec, X_train, y_train, X_test, y_test, truth,
        _names("x", 5) + _names("g", n), used, irrelevant,
    )


def gen_extrapolation(
    difficulty: Difficulty,
    seed: int,
    n_train: int = DEFAULT_N,
    n_test: int = DEFAULT_N,
    include_sine: bool = True,
) -> Tuple[Dataset, Dataset]:
    """Train on [-15, 15] with a noisy target, test on (15, 40] noiseless."""
    task = TaskKind.EXTRAPOLATION
    difficulty = _check(task, difficulty)
    ratio = EXTRAPOLATION_RATIOS[difficulty]
    spec = TaskSpec(
        task=task, difficulty=difficulty, noise_ratio=ratio, n_train=n_train, n_test=n_test,
        domain=[EXTRAPOLATION_TRAIN], test_domain=[EXTRAPOLATION_TEST], seed=seed,
        include_sine=include_sine, assumptions=list(DOMAIN_ASSUMPTIONS),
    )
    truth = extrapolation_truth(include_sine)
    X_train = _uniform(stream(seed, task, "train"), n_train, [EXTRAPOLATION_TRAIN])
    lo, hi = EXTRAPOLATION_TEST
    # hi - width * u with u in [0, 1) lands in the half-open (lo, hi].
    X_test = (hi - (hi - lo) * stream(seed, task, "test").random(n_test)).reshape(-1, 1)
    y_train = add_noise(predict(truth, X_train), ratio, stream(seed, task, "noise"))
    return _pair(spec, X_train, y_train, X_test, predict(truth, X_test), truth, ["x1"], [0], ())


def gen_noise_task(
    difficulty: Difficulty, seed: int, n_train: int = DEFAULT_N, n_test: int = DEFAULT_N
) -> Tuple[Dataset, Dataset]:
    task = TaskKind.NOISE
    difficulty = _check(task, difficulty)
    ratio = NOISE_TASK_RATIOS[difficulty]
    domain = [NOISE_TASK_INTERVAL]
    spec = TaskSpec(
        task=task, difficulty=difficulty, noise_ratio=ratio, n_train=n_train, n_test=n_test,
        domain=domain, seed=seed, assumptions=list(DOMAIN_ASSUMPTIONS),
    )
    truth = noise_task_truth()
    X_train = _uniform(stream(seed, task, "train"), n_train, domain)
    X_test = _uniform(stream(seed, task, "test"), n_test, domain)
    y_train = add_noise(predict(truth, X_train), ratio, stream(seed, task, "noise"))
    return _pair(spec, X_train, y_train, X_test, predict(truth, X_test), truth, ["x1"], [0], ())


GENERATORS: Dict[TaskKind, Callable[..., Tuple[Dataset, Dataset]]] = {
    TaskKind.EXACT: gen_exact,
    TaskKind.FEATURE_SELECTION: gen_feature_selection,
    TaskKind.LOCAL_OPTIMA: gen_local_optima,
    TaskKind.EXTRAPOLATION: gen_extrapolation,
    TaskKind.NOISE: gen_noise_task,
}


def generate(
    task: TaskKind,
    difficulty: Difficulty,
    seed: int,
    n_train: int = DEFAULT_N,
    n_test: int = DEFAULT_N,
    include_sine: Optional[bool] = None,
) -> Tuple[Dataset, Dataset]:
    task = TaskKind(task)
    kwargs = {"n_train": n_train, "n_test": n_test}
    if include_sine is not None:
        if task is not TaskKind.EXTRAPOLATION:
            raise ConfigurationError("include_sine only applies to the extrapolation task")
        kwargs["include_sine"] = include_sine
    return GENERATORS[task](difficulty, seed, **kwargs)


def all_task_levels() -> List[Tuple[TaskKind, Difficulty]]:
    return [(task, diff) for task in TaskKind for diff in ADMISSIBLE_DIFFICULTIES[task]]


__all__ = [
    "EXACT_FUNCTIONS",
    "GENERATORS",
    "all_task_levels",
    "extrapolation_truth",
    "f1",
    "f2",
    "f3",
    "f4",
    "feature_selection_truth",
    "gen_exact",
    "gen_extrapolation",
    "gen_feature_selection",
    "gen_local_optima",
    "gen_noise_task",
    "generate",
    "local_optima_truth",
    "meta_features",
    "noise_task_truth",
    "stream",
]
