"""
Problem files.

A problem file is UTF-8 text made of ``[section]`` headers and
``key = value`` lines. ``#`` starts a comment; an indented line continues
the previous value. Every error found is reported with its line number.

    [problem]      name, description
    [symbols]      parameters, extensions (name: square, ...), rho, coordinates
    [ansatz]       <rho> = F for each coordinate, comma separated
    [equation]     spacetime = ...   or   rho = ...
    [constraints]  <name> = pattern -> replacement
    [rules]        <name> = pattern -> replacement
    [seeds]        candidates, use
    [frees]        <rho monomial> = <parameter>
    [run]          order, L, M, rules, ansatz
    [numeric]      solve_for, points
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .algebra import (
    DEFAULT_REWRITE_BUDGET,
    EXTENSION,
    PARAMETER,
    RationalFunction,
    RewriteRule,
    RewriteSystem,
    Symbol,
    SymbolTable,
)
from .errors import ExpressionSyntaxError, ProblemFileError, UsageError
from .pade import RationalAnsatz
from .parser import (
    RESERVED,
    parse_ansatz,
    parse_euler_equation,
    parse_list,
    parse_polynomial,
    parse_rational,
    parse_rule,
    parse_spacetime_equation,
)
from .series import AnsatzDefinition, EulerEquation, MultiIndex, SpacetimeEquation, transform

logger = logging.getLogger(__name__)

SECTIONS = ("problem", "symbols", "ansatz", "equation", "constraints", "rules", "seeds", "frees", "run", "numeric")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

Entry = Tuple[str, int]


@dataclass
class Problem:
    """A fully resolved problem file."""

    name: str
    symtab: SymbolTable
    rho_symbols: Tuple[Symbol, ...]
    coordinates: Tuple[Symbol, ...] = ()
    description: str = ""
    path: str = "<problem>"
    ansatz: Optional[AnsatzDefinition] = None
    spacetime: Optional[SpacetimeEquation] = None
    rho_equation: Optional[EulerEquation] = None
    constraints: Dict[str, RewriteRule] = field(default_factory=dict)
    rules: Dict[str, RewriteRule] = field(default_factory=dict)
    seed_candidates: List[RationalFunction] = field(default_factory=list)
    seed_choice: Optional[RationalFunction] = None
    frees: List[Tuple[MultiIndex, Symbol]] = field(default_factory=list)
    order: Optional[int] = None
    L: Optional[int] = None
    M: Optional[int] = None
    run_rules: List[str] = field(default_factory=list)
    fixed_ansatz: Optional[RationalAnsatz] = None
    solve_for: List[Symbol] = field(default_factory=list)
    numeric_points: Optional[int] = None

    def extension_rules(self, budget: int = DEFAULT_REWRITE_BUDGET) -> RewriteSystem:
        return self.symtab.extension_rules(budget)

    def constraint_rules(self, budget: int = DEFAULT_REWRITE_BUDGET) -> RewriteSystem:
        return self.extension_rules(budget).extend(self.constraints.values())

    def extra_rules(self, names: Sequence[str], budget: int = DEFAULT_REWRITE_BUDGET) -> RewriteSystem:
        """
        Named rules from ``[rules]`` (or ``[constraints]``).

        Raises:
            UsageError: for an unknown rule name
        """
        chosen = []
        for name in names:
            if name in self.rules:
                chosen.append(self.rules[name])
            elif name in self.constraints:
                chosen.append(self.constraints[name])
            else:
                known = ", ".join(list(self.rules) + list(self.constraints)) or "none"
                raise UsageError(f"Unknown rule '{name}' (known: {known})")
        return RewriteSystem(chosen, budget=budget)

    def euler_equation(self, budget: int = DEFAULT_REWRITE_BUDGET) -> EulerEquation:
        """The equation in rho form with constraints applied to its coefficients."""
        if self.rho_equation is not None:
            raw = self.rho_equation
        else:
            raw = transform(self.spacetime, self.ansatz, self.extension_rules(budget))
        return raw.reduce(self.constraint_rules(budget))


def read_sections(text: str) -> Tuple[Dict[str, Dict[str, Entry]], List[Tuple[int, str]]]:
    """Split problem text into sections of (value, line) entries."""
    sections: Dict[str, Dict[str, Entry]] = {}
    errors: List[Tuple[int, str]] = []
    current: Optional[str] = None
    last_key: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        if raw[:1] in (" ", "\t") and current is not None and last_key is not None:
            value, start = sections[current][last_key]
            sections[current][last_key] = (f"{value} {stripped}", start)
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip().lower()
            last_key = None
            if current not in SECTIONS:
                errors.append((number, f"Unknown section [{current}]"))
            if current in sections:
                errors.append((number, f"Duplicate section [{current}]"))
            sections.setdefault(current, {})
            continue
        if "=" not in stripped or current is None:
            errors.append((number, "Expected '[section]' or 'key = value'"))
            continue
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key in sections[current]:
            errors.append((number, f"Duplicate key '{key}' in [{current}]"))
        sections[current][key] = (value.strip(), number)
        last_key = key
    return sections, errors


class _Resolver:
    """Builds a Problem section by section, collecting located errors."""

    def __init__(self, sections: Dict[str, Dict[str, Entry]], path: str):
        self.sections = sections
        self.path = path
        self.errors: List[Tuple[int, str]] = []
        self.symtab = SymbolTable()

    def fail(self, line: int, error: Exception) -> None:
        if isinstance(error, ExpressionSyntaxError):
            self.errors.append((line, f"{error} in value"))
        else:
            self.errors.append((line, str(error)))

    def section(self, name: str) -> Dict[str, Entry]:
        return self.sections.get(name, {})

    def names(self, text: str, line: int) -> List[str]:
        found = []
        for name in parse_list(text):
            if not _NAME.match(name):
                self.errors.append((line, f"Invalid symbol name '{name}'"))
            elif name in RESERVED:
                self.errors.append((line, f"'{name}' is reserved"))
            else:
                found.append(name)
        return found

    def declare(self, names: List[str], kind: str, line: int) -> List[Symbol]:
        out = []
        for name in names:
            try:
                out.append(self.symtab.symbol(name, kind))
            except UsageError as error:
                self.fail(line, error)
        return out

    def integer(self, entry: Optional[Entry], label: str) -> Optional[int]:
        if entry is None:
            return None
        value, line = entry
        try:
            number = int(value)
        except ValueError:
            self.errors.append((line, f"{label} must be an integer, got '{value}'"))
            return None
        if number < 0:
            self.errors.append((line, f"{label} must be nonnegative"))
            return None
        return number

    def resolve(self) -> Problem:
        info = self.section("problem")
        name = info.get("name", (Path(self.path).stem, 0))[0]
        description = info.get("description", ("", 0))[0]

        symbols = self.section("symbols")
        for key, (value, line) in symbols.items():
            if key not in ("parameters", "extensions", "rho", "coordinates"):
                self.errors.append((line, f"Unknown key '{key}' in [symbols]"))
        if "parameters" in symbols:
            value, line = symbols["parameters"]
            self.declare(self.names(value, line), PARAMETER, line)
        rhos: List[Symbol] = []
        if "rho" in symbols:
            value, line = symbols["rho"]
            rhos = self.declare(self.names(value, line), "rho", line)
        else:
            self.errors.append((0, "[symbols] needs 'rho'"))
        coordinates: List[Symbol] = []
        if "coordinates" in symbols:
            value, line = symbols["coordinates"]
            coordinates = self.declare(self.names(value, line), "coordinate", line)
        if "extensions" in symbols:
            value, line = symbols["extensions"]
            for item in parse_list(value):
                if ":" not in item:
                    self.errors.append((line, f"Extension '{item}' needs 'name: square'"))
                    continue
                ext_name, square = (part.strip() for part in item.split(":", 1))
                if not _NAME.match(ext_name) or ext_name in RESERVED:
                    self.errors.append((line, f"Invalid extension name '{ext_name}'"))
                    continue
                try:
                    self.symtab.symbol(ext_name, EXTENSION)
                    self.symtab.extension(ext_name, parse_polynomial(square, self.symtab))
                except UsageError as error:
                    self.fail(line, error)

        problem = Problem(
            name=name,
            symtab=self.symtab,
            rho_symbols=tuple(rhos),
            coordinates=tuple(coordinates),
            description=description,
            path=self.path,
        )
        self.resolve_equation(problem)
        self.resolve_rules(problem)
        self.resolve_seeds(problem)
        self.resolve_run(problem)
        return problem

    def resolve_equation(self, problem: Problem) -> None:
        ansatz_section = self.section("ansatz")
        table = {}
        for key, (value, line) in ansatz_section.items():
            rho = self.symtab.get(key)
            if rho is None or rho not in problem.rho_symbols:
                self.errors.append((line, f"'{key}' is not a rho variable"))
                continue
            entries = parse_list(value)
            if len(entries) != len(problem.coordinates):
                self.errors.append((line, f"'{key}' needs {len(problem.coordinates)} entries, got {len(entries)}"))
                continue
            k = problem.rho_symbols.index(rho)
            for mu, text in enumerate(entries):
                try:
                    table[(mu, k)] = parse_rational(text, self.symtab)
                except UsageError as error:
                    self.fail(line, error)
        equation = self.section("equation")
        if "spacetime" in equation:
            value, line = equation["spacetime"]
            if len(ansatz_section) != len(problem.rho_symbols):
                self.errors.append((line, "A spacetime equation needs an [ansatz] entry for every rho variable"))
            try:
                problem.spacetime = parse_spacetime_equation(value, self.symtab, problem.coordinates)
                problem.ansatz = AnsatzDefinition(problem.rho_symbols, problem.coordinates, table)
            except UsageError as error:
                self.fail(line, error)
        elif "rho" in equation:
            value, line = equation["rho"]
            try:
                problem.rho_equation = parse_euler_equation(value, self.symtab, problem.rho_symbols)
            except UsageError as error:
                self.fail(line, error)
        else:
            self.errors.append((0, "[equation] needs 'spacetime' or 'rho'"))

    def rule_section(self, name: str) -> Dict[str, RewriteRule]:
        out = {}
        for key, (value, line) in self.section(name).items():
            try:
                pattern, replacement = parse_rule(value, self.symtab)
                out[key] = RewriteRule(pattern, replacement, name=key)
            except UsageError as error:
                self.fail(line, error)
        return out

    def resolve_rules(self, problem: Problem) -> None:
        problem.constraints = self.rule_section("constraints")
        problem.rules = self.rule_section("rules")
        for key in problem.rules:
            if key in problem.constraints:
                line = self.section("rules")[key][1]
                self.errors.append((line, f"Rule name '{key}' is also a constraint name"))

    def resolve_seeds(self, problem: Problem) -> None:
        seeds = self.section("seeds")
        if "candidates" in seeds:
            value, line = seeds["candidates"]
            for text in parse_list(value):
                try:
                    problem.seed_candidates.append(parse_rational(text, self.symtab))
                except UsageError as error:
                    self.fail(line, error)
        if "use" in seeds:
            value, line = seeds["use"]
            try:
                problem.seed_choice = parse_rational(value, self.symtab)
            except UsageError as error:
                self.fail(line, error)

        for key, (value, line) in self.section("frees").items():
            try:
                mono = parse_polynomial(key, self.symtab)
                symbol = self.symtab.get(value.strip())
                if symbol is None or symbol.kind != PARAMETER:
                    raise UsageError(f"Free coefficient '{value.strip()}' must be a declared parameter")
                if len(mono.terms) != 1 or any(s not in problem.rho_symbols for s in mono.symbols()):
                    raise UsageError(f"'{key}' must be a monomial in the rho variables")
                (monomial, coef), = mono.terms.items()
                if coef != 1:
                    raise UsageError(f"'{key}' must have coefficient 1")
                problem.frees.append((monomial.exponents(problem.rho_symbols), symbol))
            except UsageError as error:
                self.fail(line, error)

    def resolve_run(self, problem: Problem) -> None:
        run = self.section("run")
        problem.order = self.integer(run.get("order"), "order")
        problem.L = self.integer(run.get("L"), "L")
        problem.M = self.integer(run.get("M"), "M")
        if "rules" in run:
            value, line = run["rules"]
            problem.run_rules = parse_list(value)
            for rule_name in problem.run_rules:
                if rule_name not in problem.rules and rule_name not in problem.constraints:
                    self.errors.append((line, f"Unknown rule '{rule_name}'"))
        if "ansatz" in run:
            value, line = run["ansatz"]
            try:
                problem.fixed_ansatz = parse_ansatz(value, self.symtab, problem.rho_symbols)
            except UsageError as error:
                self.fail(line, error)

        numeric = self.section("numeric")
        if "solve_for" in numeric:
            value, line = numeric["solve_for"]
            for sym_name in parse_list(value):
                symbol = self.symtab.get(sym_name)
                if symbol is None or symbol.kind != PARAMETER:
                    self.errors.append((line, f"'{sym_name}' is not a declared parameter"))
                else:
                    problem.solve_for.append(symbol)
        problem.numeric_points = self.integer(numeric.get("points"), "points")


def parse_problem(text: str, path: str = "<problem>") -> Problem:
    """
    Resolve problem text.

    Raises:
        ProblemFileError: with every located error
    """
    sections, errors = read_sections(text)
    resolver = _Resolver(sections, path)
    resolver.errors.extend(errors)
    problem = resolver.resolve()
    if resolver.errors:
        raise ProblemFileError(sorted(resolver.errors), path)
    logger.debug(f"Loaded problem {problem.name} from {path}")
    return problem


def load_problem(path: Union[str, Path]) -> Problem:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as error:
        raise UsageError(f"Cannot read problem file {path}: {error}") from error
    return parse_problem(text, str(path))
