"""
Exactness conditions of a rational ansatz.

Substituting phi = N / D into an Euler-form equation and multiplying by a
power of D leaves a polynomial numerator; its coefficients per rho monomial
are the conditions that must all vanish for the ansatz to be exact.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import ONE_POLY, Polynomial, RewriteSystem, Symbol, as_polynomial
from .errors import ZeroDenominator
from .pade import RationalAnsatz
from .series import EulerEquation, MultiIndex, format_index

logger = logging.getLogger(__name__)

MAX_MULTIPLICITY = 64


@dataclass(frozen=True)
class ConditionSet:
    """Nonvanishing numerator coefficients E[J] and the cleared denominator D."""

    conditions: Dict[MultiIndex, Polynomial]
    denominator: Polynomial
    max_degree: int
    rho_symbols: Tuple[Symbol, ...] = ()

    def indices(self) -> List[MultiIndex]:
        return sorted(self.conditions, key=lambda j: (sum(j), tuple(-x for x in j)))

    def is_empty(self) -> bool:
        return not self.conditions

    def __len__(self) -> int:
        return len(self.conditions)

    def to_lines(self) -> List[str]:
        lines = [f"E[{format_index(j)}] = {self.conditions[j].to_string()}" for j in self.indices()]
        lines.append(f"D = {self.denominator.to_string()}")
        return lines


@dataclass(frozen=True)
class ExactnessVerdict:
    exact: bool
    residual_conditions: ConditionSet
    denominator_ok: bool
    rules: Tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class FactorReport:
    multiplicities: Tuple[int, ...]
    cofactor: Polynomial

    def to_string(self) -> str:
        return f"{','.join(str(m) for m in self.multiplicities)} | {self.cofactor.to_string()}"


def derivative_numerators(num: Polynomial, den: Polynomial, rhos: Sequence[Symbol], orders: Sequence[MultiIndex]) -> Dict[MultiIndex, Polynomial]:
    """N_beta with d^beta (num/den) = N_beta / den^(|beta|+1)."""
    size = len(rhos)
    table: Dict[MultiIndex, Polynomial] = {(0,) * size: num}
    den_diffs = [den.diff(rho) for rho in rhos]

    def get(beta: MultiIndex) -> Polynomial:
        if beta in table:
            return table[beta]
        k = next(position for position, b in enumerate(beta) if b)
        lower = tuple(b - 1 if position == k else b for position, b in enumerate(beta))
        base = get(lower)
        power = sum(lower) + 1
        value = base.diff(rhos[k]) * den - base * den_diffs[k] * power
        table[beta] = value
        return value

    for beta in orders:
        get(beta)
    return table


def clearing_power(eq: EulerEquation) -> int:
    """Largest sum over factors of (|beta| + 1) in any term."""
    return max((sum(sum(beta) + 1 for beta in term.derivatives) for term in eq.terms), default=0)


def _degree_bound(ansatz: RationalAnsatz, eq: EulerEquation, power: int) -> int:
    rhos = eq.rho_symbols
    num_degree = ansatz.num.degree_in(rhos)
    den_degree = ansatz.den.degree_in(rhos)
    bound = 0
    for term in eq.terms:
        used = sum(sum(beta) + 1 for beta in term.derivatives)
        degree = term.rho.degree + (power - used) * den_degree
        for beta in term.derivatives:
            degree += num_degree + sum(beta) * (den_degree - 1)
        bound = max(bound, degree)
    return bound


def _collect(ansatz: RationalAnsatz, eq: EulerEquation, rs: RewriteSystem) -> ConditionSet:
    rhos = eq.rho_symbols
    power = clearing_power(eq)
    orders = sorted({beta for term in eq.terms for beta in term.derivatives})
    numerators = derivative_numerators(ansatz.num, ansatz.den, rhos, orders)
    den_powers = [ONE_POLY]
    for _ in range(power):
        den_powers.append(den_powers[-1] * ansatz.den)

    # coefficients of the equation may carry parameter denominators
    lcm: Dict[Polynomial, int] = {}
    for term in eq.terms:
        for factor, exp in term.coef.den_factors:
            lcm[factor] = max(lcm.get(factor, 0), exp)

    total = Polynomial()
    for term in eq.terms:
        coef = term.coef.num
        own = dict(term.coef.den_factors)
        for factor, exp in lcm.items():
            if exp - own.get(factor, 0):
                coef = coef * factor ** (exp - own.get(factor, 0))
        piece = coef.mul_monomial(term.rho)
        used = 0
        for beta in term.derivatives:
            piece = piece * numerators[beta]
            used += sum(beta) + 1
        piece = piece * den_powers[power - used]
        total = total + piece
    total = rs.reduce(total)

    conditions = {}
    for mono, coef in total.coefficients_in(rhos).items():
        coef = rs.reduce(coef)
        if not coef.is_zero():
            conditions[mono.exponents(rhos)] = coef
    return ConditionSet(
        conditions,
        rs.reduce(den_powers[power]),
        _degree_bound(ansatz, eq, power),
        tuple(rhos),
    )


def conditions(ansatz: RationalAnsatz, eq: EulerEquation, rs: Optional[RewriteSystem] = None) -> ConditionSet:
    """
    Condition polynomials of ``ansatz`` in ``eq``.

    Args:
        ansatz: candidate solution num / den
        eq: Euler-form equation
        rs: rules applied before collecting coefficients

    Returns:
        ConditionSet: nonvanishing conditions in graded order and D = den^w

    Raises:
        ZeroDenominator: if den reduces to zero under ``rs``
    """
    rs = rs or RewriteSystem()
    if rs.reduce(ansatz.den).is_zero():
        raise ZeroDenominator(f"Denominator {ansatz.den} vanishes under the active rules")
    result = _collect(ansatz, eq, rs)
    logger.info(f"Ansatz leaves {len(result)} nonvanishing conditions")
    return result


def verify(
    ansatz: RationalAnsatz,
    eq: EulerEquation,
    rs_base: Optional[RewriteSystem] = None,
    extra_rules: Optional[RewriteSystem] = None,
) -> ExactnessVerdict:
    """
    Decide exactness under ``rs_base`` plus ``extra_rules``.

    A denominator that vanishes under the combined rules gives
    ``denominator_ok=False`` rather than an error.
    """
    rs = (rs_base or RewriteSystem()).extend(extra_rules or RewriteSystem())
    denominator_ok = not rs.reduce(ansatz.den).is_zero()
    found = _collect(ansatz, eq, rs)
    exact = denominator_ok and found.is_empty()
    names = tuple(rule.name for rule in (extra_rules or ()))
    logger.info(f"Verdict exact={exact} ({len(found)} conditions, denominator_ok={denominator_ok})")
    return ExactnessVerdict(exact, found, denominator_ok, names)


def factor_check(
    cs: ConditionSet,
    candidates: Sequence[Polynomial],
) -> Dict[MultiIndex, FactorReport]:
    """
    Divide every condition by each candidate as often as possible.

    Raises:
        ValueError: if a candidate is constant
    """
    divisors = [as_polynomial(c) for c in candidates]
    for divisor in divisors:
        if divisor.is_constant():
            raise ValueError(f"Candidate factor must not be constant: {divisor}")
    reports = {}
    for index in cs.indices():
        rest = cs.conditions[index]
        counts = []
        for divisor in divisors:
            count = 0
            while count < MAX_MULTIPLICITY:
                quotient = rest.try_divide(divisor)
                if quotient is None:
                    break
                rest = quotient
                count += 1
            counts.append(count)
        reports[index] = FactorReport(tuple(counts), rest)
    return reports
