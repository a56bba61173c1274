"""Baseline entrants: tree GP, least squares, constant and oracle models."""

from engines.constants import optimize_constants
from engines.gp import fit_gp
from engines.linear import fit_linear
from engines.pareto import FrontEntry, ParetoFront
from engines.regressors import (
    ConstantRegressor,
    LinearRegressor,
    OracleRegressor,
    SymbolicRegressor,
    build_regressor,
)
from engines.selection import select_model

__all__ = [
    "ConstantRegressor",
    "FrontEntry",
    "LinearRegressor",
    "OracleRegressor",
    "ParetoFront",
    "SymbolicRegressor",
    "build_regressor",
    "fit_gp",
    "fit_linear",
    "optimize_constants",
    "select_model",
]
