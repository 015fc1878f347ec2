"""
Scenario corpus for the lambda phi^4 equation.

Each scenario names a problem file under the corpus directory, a Padé entry
and a golden file. Golden files hold ``key = value`` lines whose values are
expressions in the problem grammar; they are compared by exact symbolic
equality under the problem's extension rules.

    let X = ...                  textual abbreviation used by later values
    seeds = a, b                 accepted seed roots
    series[i,j] = ...            series coefficient
    ansatz = ...                 the [L/M] ansatz (cross-multiplication)
    numerator = ..., denominator = ...   the ansatz kept exactly as written
    indices = 4,1; 3,2           exact index set of the conditions
    E[i,j] = ...                 condition polynomial
    D = ...                      cleared denominator
    factors = f1, f2             candidate factors
    factor[i,j] = 2,1 | cofactor multiplicities and cofactor
    exact = true | false         verdict under the scenario's extra rules
    numeric = exact | inexact    oracle outcome over three seeds
"""

import fnmatch
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from .algebra import RewriteSystem
from .config import Settings, get_settings
from .errors import PadePDEError, UsageError
from .numeric import sampled_residuals
from .pade import RationalAnsatz, pade_table, stable_entries
from .parser import parse_ansatz, parse_list, parse_polynomial, parse_rational
from .pipeline import Pipeline
from .problem import Problem, load_problem
from .residual import ConditionSet, conditions, factor_check, verify
from .series import MultiIndex, format_index

logger = logging.getLogger(__name__)

EXACT_BOUND = 1e-8
INEXACT_BOUND = 1e-3
NUMERIC_SEEDS = 3
_INDEXED = re.compile(r"^(series|E|factor)\[([0-9, ]+)\]$")


@dataclass(frozen=True)
class Scenario:
    name: str
    problem: str
    golden: str
    L: int
    M: int
    rules: Tuple[str, ...] = ()
    order: Optional[int] = None
    stability: Tuple[Tuple[int, int], ...] = ()
    note: str = ""


def _scenario(*args, **kwargs) -> Tuple[str, Scenario]:
    scenario = Scenario(*args, **kwargs)
    return scenario.name, scenario


SCENARIOS: Dict[str, Scenario] = dict(
    [
        _scenario(
            "one-wave/massshell/[1/1]", "one_wave_massshell.problem", "one_wave_massshell_11.txt", 1, 1,
            order=7, note="linear ansatz leaves the single condition c1^3*lambda",
        ),
        _scenario(
            "one-wave/massshell/[2/2]", "one_wave_massshell.problem", "one_wave_massshell_22.txt", 2, 2,
            note="exact kink-type solution",
        ),
        _scenario(
            "one-wave/massshell/[3/3..5/5]==[2/2]", "one_wave_massshell.problem", "one_wave_massshell_stable.txt", 2, 2,
            stability=((3, 3), (4, 4), (5, 5)), note="higher diagonal entries reproduce [2/2]",
        ),
        _scenario(
            "one-wave/secondbranch/[1/1]", "one_wave_secondbranch.problem", "one_wave_secondbranch_11.txt", 1, 1,
            order=4, note="nonzero seed, exact without extra rules",
        ),
        _scenario(
            "one-wave/secondbranch/[2/2]", "one_wave_secondbranch.problem", "one_wave_secondbranch_22.txt", 2, 2,
            note="equals [1/1] as a rational function",
        ),
        _scenario(
            "one-wave/secondbranch/[3/3..5/5]==[2/2]", "one_wave_secondbranch.problem",
            "one_wave_secondbranch_stable.txt", 2, 2,
            stability=((3, 3), (4, 4), (5, 5)), note="higher diagonal entries reproduce [2/2]",
        ),
        _scenario(
            "two-wave/massshell/[1/1]", "two_wave_massshell.problem", "two_wave_massshell_11.txt", 1, 1,
            note="superposition leaves the cubic conditions",
        ),
        _scenario(
            "two-wave/massshell/[1/1]+kleingordon", "two_wave_massshell.problem",
            "two_wave_massshell_11_kleingordon.txt", 1, 1,
            rules=("kleingordon",), note="exact in the free limit",
        ),
        _scenario(
            "two-wave/massshell/[2/2]", "two_wave_massshell.problem", "two_wave_massshell_22.txt", 2, 2,
            order=3, note="four conditions with the X factor structure",
        ),
        _scenario(
            "two-wave/massshell/[2/2]+condN2", "two_wave_massshell.problem", "two_wave_massshell_22_condN2.txt", 2, 2,
            rules=("condN2",), note="exact once X = -m^2",
        ),
        _scenario(
            "two-wave/secondbranch/[1/1]", "two_wave_secondbranch.problem", "two_wave_secondbranch_11.txt", 1, 1,
            note="five conditions on the second branch",
        ),
        _scenario(
            "two-wave/secondbranch/[1/1]+condN2v2", "two_wave_secondbranch.problem",
            "two_wave_secondbranch_11_condN2v2.txt", 1, 1,
            rules=("condN2v2",), note="exact once X = 2*m^2",
        ),
    ]
)


def read_golden(text: str) -> Dict[str, Tuple[str, int]]:
    """``key = value`` lines with ``#`` comments and indented continuations."""
    out: Dict[str, Tuple[str, int]] = {}
    abbreviations: List[Tuple[str, str]] = []
    last: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), 1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if raw[:1] in (" ", "\t") and last is not None:
            value, start = out[last]
            out[last] = (f"{value} {stripped}", start)
            continue
        if "=" not in stripped:
            raise UsageError(f"Golden line {number}: expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in out:
            raise UsageError(f"Golden line {number}: duplicate key '{key}'")
        out[key] = (value, number)
        last = key
    for key in [k for k in out if k.startswith("let ")]:
        abbreviations.append((key[4:].strip(), out.pop(key)[0]))
    # each abbreviation may use the ones defined before it
    for position, (name, expansion) in enumerate(abbreviations):
        pattern = re.compile(rf"\b{re.escape(name)}\b")
        replacement = f"({expansion})"
        abbreviations[position + 1:] = [(n, pattern.sub(replacement, e)) for n, e in abbreviations[position + 1:]]
        out = {key: (pattern.sub(replacement, value), line) for key, (value, line) in out.items()}
    return out


def _index(text: str) -> MultiIndex:
    return tuple(int(part) for part in text.split(","))


@dataclass
class ScenarioResult:
    name: str
    checks: List[Tuple[str, bool, str]] = field(default_factory=list)
    error: Optional[str] = None
    exact: Optional[bool] = None
    condition_count: Optional[int] = None
    note: str = ""

    def check(self, label: str, ok: bool, detail: str = "") -> None:
        self.checks.append((label, bool(ok), detail))
        if not ok:
            logger.warning(f"{self.name}: {label} failed {detail}")

    @property
    def passed(self) -> bool:
        return self.error is None and all(ok for _, ok, _ in self.checks)

    def to_row(self) -> Dict[str, Any]:
        status = "ERROR" if self.error is not None else ("PASS" if self.passed else "FAIL")
        row: Dict[str, Any] = {
            "scenario": self.name,
            "status": status,
            "checks": len(self.checks),
            "failed": [f"{label}: {detail}" if detail else label for label, ok, detail in self.checks if not ok],
            "exact": self.exact,
            "conditions": self.condition_count,
            "note": self.note,
        }
        if self.error is not None:
            row["error"] = self.error
        return row


class _Runner:
    """Evaluates one scenario against its golden values."""

    def __init__(self, scenario: Scenario, settings: Settings):
        self.scenario = scenario
        self.settings = settings
        self.result = ScenarioResult(scenario.name, note=scenario.note)

    def run(self) -> ScenarioResult:
        corpus = Path(self.settings.corpus_dir)
        try:
            problem = load_problem(corpus / self.scenario.problem)
            golden = read_golden((corpus / "golden" / self.scenario.golden).read_text(encoding="utf-8"))
            self.evaluate(problem, golden)
        except (PadePDEError, OSError) as error:
            self.result.error = f"{type(error).__name__}: {error}"
            logger.warning(f"{self.scenario.name}: {self.result.error}")
        return self.result

    def evaluate(self, problem: Problem, golden: Dict[str, Tuple[str, int]]) -> None:
        scenario = self.scenario
        pipeline = Pipeline(problem, self.settings)
        rs = pipeline.rs
        symtab = problem.symtab
        L, M = scenario.L, scenario.M

        if "seeds" in golden:
            expected = [parse_rational(text, symtab) for text in parse_list(golden["seeds"][0])]
            found = [root.value for root in pipeline.seeds()]
            same = len(expected) == len(found) and all(any(e.equals(f, rs) for f in found) for e in expected)
            self.result.check("seeds", same, ", ".join(f.to_string() for f in found))

        series_keys = [key for key in golden if key.startswith("series[")]
        if series_keys:
            series = pipeline.series(scenario.order or L + M)
            for key in series_keys:
                index = _index(_INDEXED.match(key).group(2))
                expected = parse_rational(golden[key][0], symtab)
                actual = series.coefficient(index)
                self.result.check(key, actual.equals(expected, rs), actual.to_string())

        ours = pipeline.ansatz(L, M)
        subject = ours
        expected_ansatz = None
        if "numerator" in golden and "denominator" in golden:
            expected_ansatz = RationalAnsatz(
                parse_polynomial(golden["numerator"][0], symtab),
                parse_polynomial(golden["denominator"][0], symtab),
                problem.rho_symbols,
            )
        elif "ansatz" in golden:
            expected_ansatz = parse_ansatz(golden["ansatz"][0], symtab, problem.rho_symbols)
        if expected_ansatz is not None:
            self.result.check("ansatz", ours.equals(expected_ansatz, rs), ours.to_string())
            subject = expected_ansatz

        if scenario.stability:
            top = max(l + m for l, m in scenario.stability)
            entries = [(L, M)] + list(scenario.stability)
            table = pade_table(pipeline.series(top), entries, rs)
            stable = stable_entries(table, (L, M), rs)
            for entry in scenario.stability:
                self.result.check(f"stable[{entry[0]}/{entry[1]}]", entry in stable)

        if any(key in golden for key in ("indices", "D", "factors")) or any(key.startswith("E[") for key in golden):
            self.check_conditions(conditions(subject, pipeline.equation, rs), golden, symtab, rs)

        if "exact" in golden:
            extra = problem.extra_rules(scenario.rules, self.settings.rewrite_budget)
            verdict = verify(subject, pipeline.equation, rs, extra)
            self.result.exact = verdict.exact
            expected_exact = golden["exact"][0].lower() == "true"
            self.result.check("exact", verdict.exact == expected_exact, str(verdict.exact).lower())

        if "numeric" in golden:
            rules = list(problem.constraints.values()) + list(problem.extra_rules(scenario.rules).rules)
            seeds = [self.settings.seed + k for k in range(NUMERIC_SEEDS)]
            residuals = sampled_residuals(subject, problem, rules, seeds, self.settings.numeric_points)
            worst = max(residuals)
            if golden["numeric"][0] == "exact":
                self.result.check("numeric", worst <= EXACT_BOUND, f"{worst:.3g}")
            else:
                self.result.check("numeric", worst >= INEXACT_BOUND, f"{worst:.3g}")

    def check_conditions(self, cs: ConditionSet, golden, symtab, rs: RewriteSystem) -> None:
        self.result.condition_count = len(cs)
        if "indices" in golden:
            text = golden["indices"][0].strip()
            expected = sorted(_index(part) for part in text.split(";") if part.strip()) if text != "none" else []
            self.result.check("indices", sorted(cs.conditions) == expected, "; ".join(map(format_index, cs.indices())))
        for key, (value, _) in golden.items():
            match = _INDEXED.match(key)
            if match and match.group(1) == "E":
                index = _index(match.group(2))
                actual = cs.conditions.get(index)
                expected = parse_polynomial(value, symtab)
                ok = actual is not None and rs.reduce(actual - expected).is_zero()
                self.result.check(key, ok, actual.to_string() if actual is not None else "missing")
        if "D" in golden:
            expected = parse_polynomial(golden["D"][0], symtab)
            self.result.check("D", rs.reduce(cs.denominator - expected).is_zero(), cs.denominator.to_string())
        if "factors" in golden:
            candidates = [parse_polynomial(text, symtab) for text in parse_list(golden["factors"][0])]
            reports = factor_check(cs, candidates)
            for key, (value, _) in golden.items():
                match = _INDEXED.match(key)
                if not (match and match.group(1) == "factor"):
                    continue
                index = _index(match.group(2))
                counts, cofactor = (part.strip() for part in value.split("|", 1))
                report = reports.get(index)
                if report is None:
                    self.result.check(key, False, "missing")
                    continue
                ok = report.multiplicities == _index(counts)
                ok = ok and rs.reduce(report.cofactor - parse_polynomial(cofactor, symtab)).is_zero()
                self.result.check(key, ok, report.to_string())


@dataclass
class CorpusResult:
    """Per-scenario rows in catalog order plus the oracle seed."""

    rows: List[Dict[str, Any]]
    seed: int

    @property
    def passed(self) -> bool:
        return all(row["status"] == "PASS" for row in self.rows)

    @property
    def table(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["scenario", "status", "checks", "exact", "conditions", "note"])

    def to_dict(self) -> Dict[str, Any]:
        return {"success": self.passed, "seed": self.seed, "scenarios": self.rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [self.table.to_string(index=False)]
        for row in self.rows:
            for failure in row["failed"]:
                lines.append(f"{row['scenario']}: {failure}")
            if "error" in row:
                lines.append(f"{row['scenario']}: {row['error']}")
        passed = sum(row["status"] == "PASS" for row in self.rows)
        lines.append(f"{passed}/{len(self.rows)} scenarios passed (seed {self.seed})")
        return "\n".join(lines) + "\n"


def run_scenario(scenario: Scenario, settings: Optional[Settings] = None) -> ScenarioResult:
    return _Runner(scenario, settings or get_settings()).run()


def run_corpus(pattern: Optional[str] = None, settings: Optional[Settings] = None) -> CorpusResult:
    """
    Run every scenario whose name matches the glob ``pattern``.

    Failures are reported in the rows, never raised.
    """
    settings = settings or get_settings()
    selected = [
        s for name, s in SCENARIOS.items() if pattern is None or name == pattern or fnmatch.fnmatchcase(name, pattern)
    ]
    rows = []
    for scenario in selected:
        result = run_scenario(scenario, settings)
        logger.info(f"{scenario.name}: {'PASS' if result.passed else 'FAIL'}")
        rows.append(result.to_row())
    return CorpusResult(rows, settings.seed)
