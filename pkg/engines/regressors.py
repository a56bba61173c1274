"""Participation interface: scikit-learn style entrants that expose their model as an infix string."""

from __future__ import annotations

import logging
from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from engines.gp import fit_gp, sse_of
from engines.linear import fit_linear
from engines.pareto import FrontEntry, ParetoFront
from engines.selection import select_model
from errors import ConfigurationError
from expr.evaluate import RAW_KERNELS, predict
from expr.nodes import Constant, Expr
from expr.parser import parse, print_infix
from models.configs import AlgorithmSpec, EngineKind, GpConfig, SelectionPolicy
from models.dataset import Dataset

logger = logging.getLogger(__name__)


def _as_dataset(X, y) -> Dataset:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return Dataset(features=X, target=np.asarray(y, dtype=float), feature_names=[f"x{i + 1}" for i in range(X.shape[1])])


class _ExprRegressor(BaseEstimator, RegressorMixin):
    """Shared predict/model plumbing; subclasses set ``expr_`` and ``front_`` in ``fit``."""

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        return predict(self.expr_, X)

    def model(self) -> str:
        return print_infix(self.expr_)

    def reselect(self, policy: SelectionPolicy, test: Optional[Dataset] = None, epsilon: float = 0.01) -> Expr:
        self.expr_ = select_model(self.front_, policy, test, epsilon)
        return self.expr_

    def _single(self, expr: Expr, X, y) -> None:
        ds = _as_dataset(X, y)
        self.expr_ = expr
        self.front_ = ParetoFront(entries=[FrontEntry.of(expr, sse_of(expr, ds.features, ds.target, RAW_KERNELS))])


class SymbolicRegressor(_ExprRegressor):
    def __init__(
        self,
        config: Optional[GpConfig] = None,
        budget_seconds: float = 60.0,
        selection: SelectionPolicy = SelectionPolicy.KNEE,
        epsilon: float = 0.01,
    ) -> None:
        self.config = config
        self.budget_seconds = budget_seconds
        self.selection = selection
        self.epsilon = epsilon

    def fit(self, X, y) -> "SymbolicRegressor":
        ds = _as_dataset(X, y)
        self.front_ = fit_gp(ds, self.config or GpConfig(), self.budget_seconds)
        policy = SelectionPolicy(self.selection)
        if policy is SelectionPolicy.BEST_TEST_R2:
            # Needs held-out data; the harness reselects once the test split is known.
            policy = SelectionPolicy.KNEE
        self.expr_ = select_model(self.front_, policy, epsilon=self.epsilon)
        return self


class LinearRegressor(_ExprRegressor):
    def fit(self, X, y) -> "LinearRegressor":
        self._single(fit_linear(_as_dataset(X, y)), X, y)
        return self


class ConstantRegressor(_ExprRegressor):
    """Predicts a fixed value, or the training mean when none is given."""

    def __init__(self, value: Optional[float] = None) -> None:
        self.value = value

    def fit(self, X, y) -> "ConstantRegressor":
        v = float(np.mean(y)) if self.value is None else float(self.value)
        self._single(Constant(v), X, y)
        return self


class OracleRegressor(_ExprRegressor):
    """Returns the known generating expression regardless of the data."""

    def __init__(self, truth: Union[Expr, str, None] = None) -> None:
        self.truth = truth

    def fit(self, X, y) -> "OracleRegressor":
        if self.truth is None:
            raise ConfigurationError("oracle entrant needs a ground-truth expression")
        truth = parse(self.truth) if isinstance(self.truth, str) else self.truth
        self._single(truth, X, y)
        return self


def build_regressor(
    spec: AlgorithmSpec,
    budget_seconds: float,
    seed: int = 0,
    ground_truth: Optional[Expr] = None,
    workers: int = 1,
) -> _ExprRegressor:
    """Instantiate the entrant described by ``spec`` for one run."""
    if spec.kind is EngineKind.GP:
        base = spec.gp or GpConfig()
        cfg = base.model_copy(update={"seed": seed, "workers": max(base.workers, workers)})
        return SymbolicRegressor(cfg, budget_seconds, spec.selection, spec.epsilon)
    if spec.kind is EngineKind.LINEAR:
        return LinearRegressor()
    if spec.kind is EngineKind.CONSTANT:
        return ConstantRegressor(spec.constant_value)
    if spec.kind is EngineKind.ORACLE:
        return OracleRegressor(ground_truth)
    raise ConfigurationError(f"unknown engine kind {spec.kind!r}")


__all__ = [
    "ConstantRegressor",
    "LinearRegressor",
    "OracleRegressor",
    "SymbolicRegressor",
    "build_regressor",
]
