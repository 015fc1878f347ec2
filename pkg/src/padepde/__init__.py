"""
padepde - rational solutions of nonlinear PDEs via Padé ansätze

This package provides:
- Exact polynomial and rational-function arithmetic with rewrite rules
- Taylor series solutions of equations in exponential-wave variables
- Homogeneous multivariate Padé approximants
- Exactness conditions, factor checks and a numeric oracle
- A scenario corpus for the lambda phi^4 equation

Quick Start:
    from padepde import PadeToolkit

    toolkit = PadeToolkit()
    toolkit.load("corpus/one_wave_massshell.problem")
    result = toolkit.verify(L=2, M=2)
"""

__version__ = "1.0.0"

from .algebra import (
    Monomial,
    Polynomial,
    RationalFunction,
    RewriteRule,
    RewriteSystem,
    Symbol,
    SymbolTable,
    poly_arith,
    poly_divide_exact,
    ratfun_arith,
    rewrite_fixpoint,
)
from .config import Settings, get_settings
from .errors import MathematicalFailure, PadePDEError, UsageError
from .pade import RationalAnsatz, collapse, grade, order_condition, pade_ansatz, pade_solve, pade_table
from .parser import parse_expression
from .phi4corpus import SCENARIOS, run_corpus
from .pipeline import RunReport, run_pipeline
from .problem import Problem, load_problem, parse_problem
from .residual import ConditionSet, ExactnessVerdict, conditions, factor_check, verify
from .series import AnsatzDefinition, EulerEquation, PowerSeries, seed_roots, solve_series, transform
from .toolkit import PadeToolkit

__all__ = [
    "PadeToolkit",
    # algebra
    "Symbol",
    "SymbolTable",
    "Monomial",
    "Polynomial",
    "RationalFunction",
    "RewriteRule",
    "RewriteSystem",
    "poly_arith",
    "poly_divide_exact",
    "ratfun_arith",
    "rewrite_fixpoint",
    # series
    "AnsatzDefinition",
    "EulerEquation",
    "PowerSeries",
    "transform",
    "seed_roots",
    "solve_series",
    # pade
    "RationalAnsatz",
    "grade",
    "pade_solve",
    "order_condition",
    "collapse",
    "pade_ansatz",
    "pade_table",
    # residual
    "ConditionSet",
    "ExactnessVerdict",
    "conditions",
    "verify",
    "factor_check",
    # frontend
    "parse_expression",
    "Problem",
    "parse_problem",
    "load_problem",
    "RunReport",
    "run_pipeline",
    # corpus
    "SCENARIOS",
    "run_corpus",
    # configuration and errors
    "Settings",
    "get_settings",
    "PadePDEError",
    "MathematicalFailure",
    "UsageError",
]
