"""
Floating-point oracle for claimed solutions.

Parameters are sampled at random, constraint rules are solved numerically
for a few designated symbols, and the original spacetime equation is then
evaluated on phi(x) = num(rho(x)) / den(rho(x)) at random points with
rho_k(x) = exp(sum_mu rate[k, mu] x_mu).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import EXTENSION, PARAMETER, Polynomial, RewriteRule, Symbol
from .errors import NearPole, NoNumericSolution, UsageError
from .pade import RationalAnsatz
from .problem import Problem
from .residual import derivative_numerators
from .series import EulerEquation, MultiIndex, transform

logger = logging.getLogger(__name__)

CONSTRAINT_TOLERANCE = 1e-12
POLE_BOUND = 1e-6
PARAMETER_RANGE = (0.5, 1.5)
POINT_RANGE = (-1.0, 1.0)
NEWTON_STEPS = 60
NEWTON_ATTEMPTS = 25
POINT_ATTEMPTS = 5

_FIRST = ((-2, 1.0 / 12), (-1, -8.0 / 12), (1, 8.0 / 12), (2, -1.0 / 12))
_SECOND = ((-2, -1.0 / 12), (-1, 16.0 / 12), (0, -30.0 / 12), (1, 16.0 / 12), (2, -1.0 / 12))


def solved_symbols(rules: Sequence[RewriteRule], preferred: Sequence[Symbol] = ()) -> List[Symbol]:
    """
    One unknown per rule: the first unused parameter of its pattern, else
    the next unused symbol of ``preferred``.

    Raises:
        UsageError: if a rule has no symbol left to solve for
    """
    chosen: List[Symbol] = []
    for rule in rules:
        pick = next((s for s in rule.pattern.symbols() if s.kind == PARAMETER and s not in chosen), None)
        if pick is None:
            pick = next((s for s in preferred if s not in chosen), None)
        if pick is None:
            raise UsageError(f"No symbol left to solve rule {rule.name}; list one under [numeric] solve_for")
        chosen.append(pick)
    return chosen


def _extension_value(square: complex, rng: np.random.Generator) -> complex:
    if abs(square - 1) < CONSTRAINT_TOLERANCE:
        return complex(rng.choice([-1.0, 1.0]))
    return complex(np.sqrt(complex(square)))


def _newton(
    equations: Sequence[Polynomial],
    unknowns: Sequence[Symbol],
    values: Dict[Symbol, complex],
    rng: np.random.Generator,
) -> Dict[Symbol, complex]:
    jacobian = [[eq.diff(u) for u in unknowns] for eq in equations]
    for attempt in range(NEWTON_ATTEMPTS):
        x = rng.uniform(*PARAMETER_RANGE, len(unknowns)) + 1j * rng.uniform(-0.5, 0.5, len(unknowns))
        for _ in range(NEWTON_STEPS):
            current = dict(values)
            current.update(zip(unknowns, x))
            residual = np.array([eq.evaluate(current) for eq in equations])
            if np.max(np.abs(residual)) <= CONSTRAINT_TOLERANCE:
                return current
            matrix = np.array([[entry.evaluate(current) for entry in row] for row in jacobian])
            try:
                x = x - np.linalg.solve(matrix, residual)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(x)):
                break
        logger.debug(f"Newton attempt {attempt} did not converge")
    raise NoNumericSolution(f"Could not solve for {', '.join(u.name for u in unknowns)}")


@dataclass
class NumericAssignment:
    """Complex values for every symbol and random evaluation points."""

    values: Dict[Symbol, complex]
    points: List[Tuple[float, ...]] = field(default_factory=list)
    seed: Optional[int] = None

    @classmethod
    def sample(
        cls,
        problem: Problem,
        rng: np.random.Generator,
        rules: Sequence[RewriteRule] = (),
        points: int = 20,
        seed: Optional[int] = None,
    ) -> "NumericAssignment":
        """
        Draw parameters in [0.5, 1.5] and solve ``rules`` for their unknowns.

        Extension symbols follow their squares: a square of 1 gives a random
        sign, anything else its principal root (i -> 1j).

        Raises:
            NoNumericSolution: if Newton iteration fails on every restart
            UsageError: if a rule has no unknown to solve for
        """
        unknowns = solved_symbols(rules, problem.solve_for)
        values: Dict[Symbol, complex] = {}
        for symbol in problem.symtab.symbols(PARAMETER):
            if symbol not in unknowns:
                values[symbol] = complex(rng.uniform(*PARAMETER_RANGE))

        pending = problem.symtab.symbols(EXTENSION)
        for _ in range(2):
            for symbol in list(pending):
                square = problem.symtab.square_of(symbol)
                if all(s in values for s in square.symbols()):
                    values[symbol] = _extension_value(square.evaluate(values), rng)
                    pending.remove(symbol)
            if unknowns and not all(u in values for u in unknowns):
                equations = [Polynomial.monomial(rule.pattern) - rule.replacement for rule in rules]
                values = _newton(equations, unknowns, values, rng)
        if pending:
            raise UsageError(f"Cannot assign extension symbols: {', '.join(s.name for s in pending)}")

        assignment = cls(values, seed=seed)
        return assignment.with_points(problem, rng, points)

    def with_points(self, problem: Problem, rng: np.random.Generator, count: int) -> "NumericAssignment":
        size = len(problem.coordinates) or len(problem.rho_symbols)
        points = [tuple(float(v) for v in rng.uniform(*POINT_RANGE, size)) for _ in range(count)]
        return replace(self, points=points)

    def rule_residual(self, rules: Sequence[RewriteRule]) -> float:
        worst = 0.0
        for rule in rules:
            value = Polynomial.monomial(rule.pattern).evaluate(self.values) - rule.replacement.evaluate(self.values)
            worst = max(worst, abs(value))
        return worst


def raw_equation(problem: Problem) -> EulerEquation:
    """The equation in rho form under extension rules only."""
    if problem.rho_equation is not None:
        return problem.rho_equation
    return transform(problem.spacetime, problem.ansatz, problem.extension_rules())


def rho_values(problem: Problem, values: Dict[Symbol, complex], point: Sequence[float]) -> Dict[Symbol, complex]:
    if problem.ansatz is None:
        return {rho: complex(np.exp(1j * np.pi * x)) for rho, x in zip(problem.rho_symbols, point)}
    out = {}
    for k, rho in enumerate(problem.rho_symbols):
        exponent = sum(rate.evaluate(values) * x for rate, x in zip(problem.ansatz.rates(k), point))
        out[rho] = complex(np.exp(exponent))
    return out


def _euler_terms(
    ansatz: RationalAnsatz,
    eq: EulerEquation,
    numerators: Dict[MultiIndex, Polynomial],
    values: Dict[Symbol, complex],
) -> List[complex]:
    den = ansatz.den.evaluate(values)
    if abs(den) < POLE_BOUND:
        raise NearPole(f"|den| = {abs(den):.3g} at sample point")
    derivatives = {beta: num.evaluate(values) / den ** (sum(beta) + 1) for beta, num in numerators.items()}
    out = []
    for term in eq.terms:
        value = term.coef.evaluate(values) * Polynomial.monomial(term.rho).evaluate(values)
        for beta in term.derivatives:
            value *= derivatives[beta]
        out.append(value)
    return out


def spacetime_numerators(ansatz: RationalAnsatz, problem: Problem) -> Dict[MultiIndex, Polynomial]:
    """
    P[alpha] with d^alpha phi = P[alpha] / den^(|alpha| + 1) along the coordinates.

    Uses the chain rule d_mu Q = sum_k F[mu, k] dQ/drho_k on the derivative
    table directly, independently of the rho-form equation.
    """
    if problem.spacetime is None or problem.ansatz is None:
        raise UsageError("Spacetime derivatives need a spacetime equation and an ansatz")
    definition = problem.ansatz
    size = definition.dimension

    def along(poly: Polynomial, mu: int) -> Polynomial:
        out = Polynomial()
        for k, rho in enumerate(definition.rho_symbols):
            entry = definition.entry(mu, k)
            if not entry.is_zero():
                out = out + entry * poly.diff(rho)
        return out

    den_steps = [along(ansatz.den, mu) for mu in range(size)]
    out: Dict[MultiIndex, Polynomial] = {(0,) * size: ansatz.num}

    def numerator(alpha: MultiIndex) -> Polynomial:
        if alpha not in out:
            mu = next(position for position, a in enumerate(alpha) if a)
            lower = tuple(a - 1 if position == mu else a for position, a in enumerate(alpha))
            below = numerator(lower)
            out[alpha] = ansatz.den * along(below, mu) - below.scale(sum(lower) + 1) * den_steps[mu]
        return out[alpha]

    for term in problem.spacetime.terms:
        for alpha in term.factors:
            numerator(alpha)
    return out


def _spacetime_terms(
    ansatz: RationalAnsatz,
    problem: Problem,
    numerators: Dict[MultiIndex, Polynomial],
    values: Dict[Symbol, complex],
) -> List[complex]:
    den = ansatz.den.evaluate(values)
    if abs(den) < POLE_BOUND:
        raise NearPole(f"|den| = {abs(den):.3g} at sample point")
    derivatives = {alpha: num.evaluate(values) / den ** (sum(alpha) + 1) for alpha, num in numerators.items()}
    out = []
    for term in problem.spacetime.terms:
        value = term.coef.evaluate(values)
        for alpha in term.factors:
            value *= derivatives[alpha]
        out.append(value)
    return out


def numeric_residual(
    ansatz: RationalAnsatz,
    problem: Problem,
    assign: NumericAssignment,
    numerators: Optional[Dict[MultiIndex, Polynomial]] = None,
) -> float:
    """
    Largest scaled residual |E| / max(1, largest |term|) over the points.

    Problems with a spacetime equation are checked on that equation; problems
    given directly in rho form are checked on their rho equation.

    Raises:
        NearPole: if |den| < 1e-6 at some point
    """
    if problem.spacetime is not None:
        numerators = numerators if numerators is not None else spacetime_numerators(ansatz, problem)
    else:
        eq = problem.rho_equation
        orders = sorted({beta for term in eq.terms for beta in term.derivatives})
        rho_numerators = derivative_numerators(ansatz.num, ansatz.den, eq.rho_symbols, orders)
    worst = 0.0
    for point in assign.points:
        values = dict(assign.values)
        values.update(rho_values(problem, assign.values, point))
        if problem.spacetime is not None:
            terms = _spacetime_terms(ansatz, problem, numerators, values)
        else:
            terms = _euler_terms(ansatz, eq, rho_numerators, values)
        largest = max((abs(t) for t in terms), default=0.0)
        worst = max(worst, abs(sum(terms)) / max(1.0, largest))
    return worst


def _shift(x: Tuple[float, ...], mu: int, delta: float) -> Tuple[float, ...]:
    return tuple(v + delta if position == mu else v for position, v in enumerate(x))


def _derivative(f: Callable[[Tuple[float, ...]], complex], x: Tuple[float, ...], alpha: MultiIndex, h: float) -> complex:
    mu = next((position for position, a in enumerate(alpha) if a), None)
    if mu is None:
        return f(x)
    lower = list(alpha)
    if alpha[mu] >= 2:
        lower[mu] -= 2
        stencil, scale = _SECOND, h * h
    else:
        lower[mu] -= 1
        stencil, scale = _FIRST, h
    rest = tuple(lower)
    return sum(w * _derivative(f, _shift(x, mu, s * h), rest, h) for s, w in stencil) / scale


def finite_difference_residual(
    ansatz: RationalAnsatz,
    problem: Problem,
    assign: NumericAssignment,
    step: float = 1e-3,
) -> float:
    """
    Compare the spacetime equation by finite differences with its rho form.

    Returns the largest |fd - euler| / max(1, largest |term|) over the points.
    """
    if problem.spacetime is None:
        raise UsageError("Finite differences need a spacetime equation")
    eq = raw_equation(problem)
    orders = sorted({beta for term in eq.terms for beta in term.derivatives})
    numerators = derivative_numerators(ansatz.num, ansatz.den, eq.rho_symbols, orders)

    def phi(x: Tuple[float, ...]) -> complex:
        values = dict(assign.values)
        values.update(rho_values(problem, assign.values, x))
        return ansatz.num.evaluate(values) / ansatz.den.evaluate(values)

    worst = 0.0
    for point in assign.points:
        values = dict(assign.values)
        values.update(rho_values(problem, assign.values, point))
        euler = _euler_terms(ansatz, eq, numerators, values)
        direct = 0j
        for term in problem.spacetime.terms:
            value = term.coef.evaluate(assign.values)
            for alpha in term.factors:
                value *= _derivative(phi, point, alpha, step)
            direct += value
        largest = max((abs(t) for t in euler), default=0.0)
        worst = max(worst, abs(direct - sum(euler)) / max(1.0, largest))
    return worst


def sampled_residuals(
    ansatz: RationalAnsatz,
    problem: Problem,
    rules: Sequence[RewriteRule],
    seeds: Sequence[int],
    points: int = 20,
) -> List[float]:
    """
    numeric_residual for one assignment per seed, re-drawing points near poles.

    The spacetime derivatives of the ansatz are expanded once and shared.

    Raises:
        NearPole: if every redraw hits a pole
    """
    numerators = spacetime_numerators(ansatz, problem) if problem.spacetime is not None else None
    out = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        assign = NumericAssignment.sample(problem, rng, rules, points, seed=seed)
        for attempt in range(POINT_ATTEMPTS):
            try:
                out.append(numeric_residual(ansatz, problem, assign, numerators))
                break
            except NearPole:
                if attempt == POINT_ATTEMPTS - 1:
                    raise
                assign = assign.with_points(problem, rng, points)
        logger.debug(f"Seed {seed}: residual {out[-1]:.3g}")
    return out
