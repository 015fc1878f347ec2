"""
End-to-end runs: expand -> pade -> conditions -> verify.
"""

import logging
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel

from .algebra import RewriteSystem
from .config import Settings, get_settings
from .errors import UsageError
from .pade import RationalAnsatz, pade_ansatz
from .problem import Problem
from .residual import ConditionSet, conditions, verify
from .series import EulerEquation, PowerSeries, SeedRoot, format_index, seed_roots, solve_series

logger = logging.getLogger(__name__)

COMMANDS = ("expand", "pade", "conditions", "verify")
DEFAULT_ORDER = 6


class SeriesReport(BaseModel):
    equation: str
    seeds: List[str]
    seed: str
    order: int
    coefficients: Dict[str, str]


class PadeReport(BaseModel):
    L: int
    M: int
    ansatz: str
    numerator: str
    denominator: str


class ConditionReport(BaseModel):
    conditions: Dict[str, str]
    denominator: str
    max_degree: int


class VerdictReport(BaseModel):
    exact: bool
    denominator_ok: bool
    rules: List[str]
    conditions: Dict[str, str]


class RunReport(BaseModel):
    """Structured result of one pipeline run."""

    problem: str
    command: str
    series: Optional[SeriesReport] = None
    pade: Optional[PadeReport] = None
    conditions: Optional[ConditionReport] = None
    verdict: Optional[VerdictReport] = None

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)

    def to_text(self) -> str:
        lines = [f"problem: {self.problem}", f"command: {self.command}"]
        if self.series is not None:
            lines.append(f"equation: {self.series.equation}")
            lines.append(f"seed = {self.series.seed}")
            lines.extend(f"series[{index}] = {value}" for index, value in self.series.coefficients.items())
        if self.pade is not None:
            lines.append(f"[{self.pade.L}/{self.pade.M}]")
            lines.append(f"ansatz = {self.pade.ansatz}")
        if self.conditions is not None:
            lines.extend(f"E[{index}] = {value}" for index, value in self.conditions.conditions.items())
            lines.append(f"D = {self.conditions.denominator}")
        if self.verdict is not None:
            if self.verdict.rules:
                lines.append(f"rules = {', '.join(self.verdict.rules)}")
            if self.conditions is None:
                lines.extend(f"E[{index}] = {value}" for index, value in self.verdict.conditions.items())
            lines.append(f"denominator_ok = {str(self.verdict.denominator_ok).lower()}")
            lines.append(f"exact = {str(self.verdict.exact).lower()}")
        return "\n".join(lines) + "\n"


def _condition_map(cs: ConditionSet) -> Dict[str, str]:
    return {format_index(j): cs.conditions[j].to_string() for j in cs.indices()}


def choose_seed(problem: Problem, eq: EulerEquation, rs: RewriteSystem) -> List[SeedRoot]:
    """Verified seeds with the preferred one first."""
    roots = seed_roots(eq, problem.seed_candidates, rs)
    if problem.seed_choice is not None:
        wanted = rs.reduce_ratfun(problem.seed_choice)
        chosen = [root for root in roots if root.value.equals(wanted, rs)]
        if not chosen:
            raise UsageError(f"Seed {problem.seed_choice} does not solve the equation")
        return chosen + [root for root in roots if root not in chosen]
    zero = [root for root in roots if root.value.is_zero()]
    return zero + [root for root in roots if not root.value.is_zero()]


class Pipeline:
    """Shared state of one run over a problem."""

    def __init__(self, problem: Problem, settings: Optional[Settings] = None):
        self.problem = problem
        self.settings = settings or get_settings()
        budget = self.settings.rewrite_budget
        self.rs = problem.extension_rules(budget)
        self.equation = problem.euler_equation(budget)
        self._series: Dict[int, PowerSeries] = {}
        self._seeds: Optional[List[SeedRoot]] = None

    def seeds(self) -> List[SeedRoot]:
        if self._seeds is None:
            self._seeds = choose_seed(self.problem, self.equation, self.rs)
        return self._seeds

    def series(self, order: int) -> PowerSeries:
        if order not in self._series:
            seed = self.seeds()[0]
            self._series[order] = solve_series(self.equation, seed, self.problem.frees, order, self.rs)
        return self._series[order]

    def ansatz(self, L: Optional[int], M: Optional[int]) -> RationalAnsatz:
        if self.problem.fixed_ansatz is not None and L is None and M is None:
            return self.problem.fixed_ansatz
        L, M = self.degrees(L, M)
        return pade_ansatz(self.series(L + M), L, M, self.rs)

    def degrees(self, L: Optional[int], M: Optional[int]):
        L = self.problem.L if L is None else L
        M = self.problem.M if M is None else M
        if L is None or M is None:
            raise UsageError("Padé degrees L and M are required (problem [run] or --L/--M)")
        return L, M

    def series_report(self, order: int) -> SeriesReport:
        series = self.series(order)
        return SeriesReport(
            equation=self.equation.to_string(),
            seeds=[seed.value.to_string() for seed in self.seeds()],
            seed=self.seeds()[0].value.to_string(),
            order=order,
            coefficients={format_index(j): series.coefficients[j].to_string() for j in series.indices()},
        )


def run_pipeline(
    problem: Problem,
    command: str,
    order: Optional[int] = None,
    L: Optional[int] = None,
    M: Optional[int] = None,
    rules: Optional[Sequence[str]] = None,
    settings: Optional[Settings] = None,
) -> RunReport:
    """
    Run one command on a resolved problem.

    Args:
        problem: resolved problem file
        command: one of expand, pade, conditions, verify
        order: series truncation degree (expand)
        L, M: Padé degrees, overriding the problem's [run] values
        rules: extra rule names for verify, overriding [run] rules
        settings: configuration (defaults to the environment)

    Returns:
        RunReport: deterministic structured report

    Raises:
        UsageError: for invalid input
        MathematicalFailure: when the mathematics has no result
    """
    if command not in COMMANDS:
        raise UsageError(f"Unknown command '{command}' (expected one of {', '.join(COMMANDS)})")
    pipeline = Pipeline(problem, settings)
    report = RunReport(problem=problem.name, command=command)
    logger.info(f"Running {command} on {problem.name}")

    if command == "expand":
        if order is None:
            order = problem.order
        if order is None:
            order = DEFAULT_ORDER if problem.L is None or problem.M is None else problem.L + problem.M
        report.series = pipeline.series_report(order)
        return report

    explicit = L is not None or M is not None
    if command == "pade" or problem.fixed_ansatz is None or explicit:
        L, M = pipeline.degrees(L, M)
        report.series = pipeline.series_report(L + M)
        ansatz = pipeline.ansatz(L, M)
        report.pade = PadeReport(
            L=L, M=M, ansatz=ansatz.to_string(), numerator=ansatz.num.to_string(), denominator=ansatz.den.to_string()
        )
    else:
        ansatz = problem.fixed_ansatz
    if command == "pade":
        return report

    if command == "conditions":
        found = conditions(ansatz, pipeline.equation, pipeline.rs)
        report.conditions = ConditionReport(
            conditions=_condition_map(found),
            denominator=found.denominator.to_string(),
            max_degree=found.max_degree,
        )
        return report

    names = list(problem.run_rules if rules is None else rules)
    extra = problem.extra_rules(names, pipeline.settings.rewrite_budget)
    verdict = verify(ansatz, pipeline.equation, pipeline.rs, extra)
    report.verdict = VerdictReport(
        exact=verdict.exact,
        denominator_ok=verdict.denominator_ok,
        rules=names,
        conditions=_condition_map(verdict.residual_conditions),
    )
    return report
