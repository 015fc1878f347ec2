"""
Equations in rho variables and their Taylor solutions.

A spacetime equation is turned into an Euler-form equation by the chain rule
D_mu = sum_k F[mu, k](rho) d/d rho_k. The Taylor coefficients of a solution
phi(rho) = sum_J c_J rho^J are then fixed degree by degree: at each index J
the graded equation coefficient is affine in c_J.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    ONE_POLY,
    Monomial,
    Polynomial,
    RationalFunction,
    RewriteSystem,
    Symbol,
    as_polynomial,
    as_ratfun,
)
from .errors import NoCandidates, Obstruction, UnsupportedAnsatz, UsageError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]

_ZERO = RationalFunction()


def unit_index(size: int, position: int) -> MultiIndex:
    return tuple(1 if k == position else 0 for k in range(size))


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def indices_of_degree(size: int, degree: int) -> List[MultiIndex]:
    """All multi-indices of ``size`` entries and total ``degree``, descending lex."""
    if size == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in indices_of_degree(size - 1, degree - first):
            out.append((first,) + rest)
    return out


def falling_factorial(index: MultiIndex, order: MultiIndex) -> int:
    """prod_k J_k (J_k - 1) ... (J_k - beta_k + 1)."""
    value = 1
    for j, b in zip(index, order):
        for step in range(b):
            value *= j - step
            if not value:
                return 0
    return value


def format_index(index: MultiIndex) -> str:
    return ",".join(str(j) for j in index)


def derivative_text(order: MultiIndex, symbols: Sequence[Symbol]) -> str:
    """``phi`` or ``d(phi; rho1^2 rho2)``."""
    parts = [s.name if e == 1 else f"{s.name}^{e}" for s, e in zip(symbols, order) if e]
    if not parts:
        return "phi"
    return f"d(phi; {' '.join(parts)})"


def _coef_text(coef: RationalFunction) -> Tuple[bool, str]:
    """(negative, magnitude text) for a term coefficient."""
    if coef.is_polynomial() and len(coef.num.terms) == 1:
        text = coef.num.to_string()
        if text.startswith("-"):
            return True, text[1:]
        return False, text
    return False, f"({coef.to_string()})" if coef.is_polynomial() else coef.to_string()


def _join_terms(pieces: List[Tuple[bool, str]]) -> str:
    if not pieces:
        return "0"
    out = []
    for position, (negative, body) in enumerate(pieces):
        if position == 0:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def _term_body(coef_body: str, rest: List[str]) -> str:
    if coef_body == "1" and rest:
        return "*".join(rest)
    return "*".join([coef_body] + rest)


@dataclass(frozen=True)
class AnsatzDefinition:
    """
    Functional ansatz phi(x) = phi_hat(rho_1, ..., rho_n).

    ``table[(mu, k)]`` is F[mu, k], the derivative of rho_k along
    coordinate mu, a polynomial in the rho symbols and parameters.
    """

    rho_symbols: Tuple[Symbol, ...]
    coordinates: Tuple[Symbol, ...]
    table: Mapping[Tuple[int, int], Polynomial]

    def __post_init__(self):
        cleaned = {}
        for key, entry in self.table.items():
            mu, k = key
            if not (0 <= mu < len(self.coordinates) and 0 <= k < len(self.rho_symbols)):
                raise UsageError(f"Derivative table entry {key} out of range")
            if isinstance(entry, RationalFunction):
                if not entry.is_polynomial():
                    raise UnsupportedAnsatz(
                        f"d {self.rho_symbols[k].name} / d {self.coordinates[mu].name} is not polynomial: {entry}"
                    )
                entry = entry.num
            cleaned[(mu, k)] = Polynomial.constant(entry) if isinstance(entry, int) else entry
        object.__setattr__(self, "rho_symbols", tuple(self.rho_symbols))
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "table", cleaned)

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def entry(self, mu: int, k: int) -> Polynomial:
        return self.table.get((mu, k), Polynomial())

    def rates(self, k: int) -> List[Polynomial]:
        """
        F[mu, k] / rho_k for every coordinate (the exponential ansatz rates).

        Raises:
            UnsupportedAnsatz: if some entry is not rho_k times a rho-free factor
        """
        rho = self.rho_symbols[k]
        step = Monomial.of(rho)
        rates = []
        for mu in range(self.dimension):
            entry = self.entry(mu, k)
            if entry.is_zero():
                rates.append(entry)
                continue
            if not all(step.divides(m) for m in entry.terms):
                raise UnsupportedAnsatz(f"Ansatz for {rho.name} is not exponential")
            rate = entry.divide_monomial(step)
            if any(m.touches(frozenset(self.rho_symbols)) for m in rate.terms):
                raise UnsupportedAnsatz(f"Ansatz for {rho.name} is not exponential")
            rates.append(rate)
        return rates

    @classmethod
    def exponential(
        cls,
        rho_symbols: Sequence[Symbol],
        coordinates: Sequence[Symbol],
        rates: Sequence[Sequence[Polynomial]],
    ) -> "AnsatzDefinition":
        """rho_k = exp(sum_mu rates[k][mu] * x_mu), i.e. F[mu, k] = rates[k][mu] * rho_k."""
        table = {}
        for k, rho in enumerate(rho_symbols):
            for mu, rate in enumerate(rates[k]):
                rate = as_polynomial(rate)
                if not rate.is_zero():
                    table[(mu, k)] = rate * Polynomial.symbol(rho)
        return cls(tuple(rho_symbols), tuple(coordinates), table)


@dataclass(frozen=True)
class SpacetimeTerm:
    """coef * prod_f d^{alpha_f} phi over the spacetime coordinates."""

    coef: RationalFunction
    factors: Tuple[MultiIndex, ...]


@dataclass(frozen=True)
class SpacetimeEquation:
    terms: Tuple[SpacetimeTerm, ...]
    coordinates: Tuple[Symbol, ...]

    def __post_init__(self):
        if not self.terms:
            raise UsageError("An equation needs at least one term")
        for term in self.terms:
            for alpha in term.factors:
                if len(alpha) != len(self.coordinates):
                    raise UsageError(f"Derivative {alpha} does not match {len(self.coordinates)} coordinates")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def to_string(self) -> str:
        pieces = []
        for term in self.terms:
            negative, body = _coef_text(term.coef)
            rest = [derivative_text(alpha, self.coordinates) for alpha in term.factors]
            pieces.append((negative, _term_body(body, rest)))
        return _join_terms(pieces)


@dataclass(frozen=True)
class EulerTerm:
    """coef * rho^r * prod_f d^{beta_f} phi_hat."""

    coef: RationalFunction
    rho: Monomial
    derivatives: Tuple[MultiIndex, ...]

    @property
    def phi_degree(self) -> int:
        return len(self.derivatives)


def _term_order(term: EulerTerm) -> tuple:
    orders = [sum(beta) for beta in term.derivatives]
    return (
        -sum(orders),
        -len(term.derivatives),
        tuple(tuple(-b for b in beta) for beta in term.derivatives),
        term.rho.heap_key,
    )


@dataclass(frozen=True)
class EulerEquation:
    """A PDE in rho variables: a sum of EulerTerms, kept merged and ordered."""

    terms: Tuple[EulerTerm, ...]
    rho_symbols: Tuple[Symbol, ...]

    @classmethod
    def build(
        cls,
        terms: Iterable[EulerTerm],
        rho_symbols: Sequence[Symbol],
        rs: Optional[RewriteSystem] = None,
    ) -> "EulerEquation":
        """Merge like terms, reduce coefficients by ``rs`` and drop zeros."""
        merged: Dict[Tuple[Monomial, Tuple[MultiIndex, ...]], RationalFunction] = {}
        for term in terms:
            key = (term.rho, tuple(sorted(term.derivatives, reverse=True)))
            merged[key] = merged[key] + term.coef if key in merged else as_ratfun(term.coef)
        out = []
        for (rho, derivatives), coef in merged.items():
            if rs is not None:
                coef = rs.reduce_ratfun(coef)
            if not coef.is_zero():
                out.append(EulerTerm(coef, rho, derivatives))
        out.sort(key=_term_order)
        return cls(tuple(out), tuple(rho_symbols))

    @property
    def size(self) -> int:
        return len(self.rho_symbols)

    def reduce(self, rs: RewriteSystem) -> "EulerEquation":
        """Apply a rule set (constraints, extensions) to every coefficient."""
        return EulerEquation.build(self.terms, self.rho_symbols, rs)

    def __add__(self, other: "EulerEquation") -> "EulerEquation":
        return EulerEquation.build(self.terms + other.terms, self.rho_symbols)

    def scale(self, factor) -> "EulerEquation":
        factor = as_ratfun(factor)
        return EulerEquation.build(
            (EulerTerm(t.coef * factor, t.rho, t.derivatives) for t in self.terms), self.rho_symbols
        )

    def equals(self, other: "EulerEquation", rs: Optional[RewriteSystem] = None) -> bool:
        difference = self + other.scale(-1)
        if rs is not None:
            difference = difference.reduce(rs)
        return not difference.terms

    def max_phi_degree(self) -> int:
        return max((t.phi_degree for t in self.terms), default=0)

    def is_euler_homogeneous(self) -> bool:
        """Every term's rho monomial equals the sum of its derivative orders."""
        for term in self.terms:
            total = tuple(sum(col) for col in zip(*term.derivatives)) if term.derivatives else (0,) * self.size
            if term.rho.exponents(self.rho_symbols) != total:
                return False
        return True

    def constant_part(self, value: RationalFunction) -> RationalFunction:
        """The equation evaluated on the constant function ``value``."""
        total = _ZERO
        for term in self.terms:
            if any(any(beta) for beta in term.derivatives) or not term.rho.is_one():
                continue
            total = total + term.coef * value ** term.phi_degree
        return total

    def to_string(self) -> str:
        pieces = []
        for term in self.terms:
            negative, body = _coef_text(term.coef)
            rest = [] if term.rho.is_one() else [term.rho.to_string()]
            rest += [derivative_text(beta, self.rho_symbols) for beta in term.derivatives]
            pieces.append((negative, _term_body(body, rest)))
        return _join_terms(pieces)


@dataclass(frozen=True)
class SeedRoot:
    value: RationalFunction


@dataclass(frozen=True)
class PowerSeries:
    """Truncated Taylor series; only nonzero coefficients are stored."""

    coefficients: Mapping[MultiIndex, RationalFunction]
    truncation_degree: int
    rho_symbols: Tuple[Symbol, ...]
    free: Tuple[Tuple[MultiIndex, Symbol], ...] = field(default=())

    def coefficient(self, index: Sequence[int]) -> RationalFunction:
        index = tuple(index)
        if sum(index) > self.truncation_degree:
            raise ValueError(f"Index {list(index)} beyond truncation degree {self.truncation_degree}")
        return self.coefficients.get(index, _ZERO)

    def indices(self) -> List[MultiIndex]:
        """Stored indices in graded order (degree, then descending lex)."""
        return sorted(self.coefficients, key=lambda j: (sum(j), tuple(-x for x in j)))

    def to_lines(self) -> List[str]:
        return [f"series[{format_index(j)}] = {self.coefficients[j].to_string()}" for j in self.indices()]


def transform(
    eq: SpacetimeEquation,
    ansatz: AnsatzDefinition,
    rs: Optional[RewriteSystem] = None,
) -> EulerEquation:
    """
    Rewrite a spacetime equation in the ansatz variables.

    Args:
        eq: equation over the spacetime coordinates
        ansatz: derivative table F[mu, k]
        rs: rules applied to the resulting coefficients (usually the extensions)

    Returns:
        EulerEquation: the transformed equation, merged and ordered

    Raises:
        UnsupportedAnsatz: if the ansatz does not cover the equation's coordinates
    """
    if ansatz.dimension != eq.dimension:
        raise UnsupportedAnsatz(
            f"Ansatz covers {ansatz.dimension} coordinates, equation has {eq.dimension}"
        )
    rhos = ansatz.rho_symbols
    size = len(rhos)
    zero = (0,) * size

    def derive(expr: Dict[MultiIndex, Polynomial], mu: int) -> Dict[MultiIndex, Polynomial]:
        out: Dict[MultiIndex, Polynomial] = {}
        for beta, coef in expr.items():
            for k, rho in enumerate(rhos):
                entry = ansatz.entry(mu, k)
                if entry.is_zero():
                    continue
                chain = entry * coef.diff(rho)
                if not chain.is_zero():
                    out[beta] = out.get(beta, Polynomial()) + chain
                raised = add_index(beta, unit_index(size, k))
                out[raised] = out.get(raised, Polynomial()) + entry * coef
        return {beta: coef for beta, coef in out.items() if not coef.is_zero()}

    cache: Dict[MultiIndex, Dict[MultiIndex, Polynomial]] = {}

    def expand_factor(alpha: MultiIndex) -> Dict[MultiIndex, Polynomial]:
        if alpha not in cache:
            expr = {zero: ONE_POLY}
            for mu, count in enumerate(alpha):
                for _ in range(count):
                    expr = derive(expr, mu)
            cache[alpha] = expr
        return cache[alpha]

    terms: List[EulerTerm] = []
    for term in eq.terms:
        combos: List[Tuple[Polynomial, Tuple[MultiIndex, ...]]] = [(ONE_POLY, ())]
        for alpha in term.factors:
            expanded = expand_factor(alpha)
            combos = [
                (poly * coef, betas + (beta,))
                for poly, betas in combos
                for beta, coef in expanded.items()
            ]
        for poly, betas in combos:
            for rho_mono, rest in poly.coefficients_in(rhos).items():
                terms.append(EulerTerm(term.coef * rest, rho_mono, betas))
    result = EulerEquation.build(terms, rhos, rs)
    logger.debug(f"Transformed equation has {len(result.terms)} terms")
    return result


def seed_roots(
    eq: EulerEquation,
    candidates: Sequence = (),
    rs: Optional[RewriteSystem] = None,
) -> List[SeedRoot]:
    """
    Constant solutions among ``candidates`` (and 0), verified by substitution.

    Raises:
        NoCandidates: if nothing verifies
    """
    rs = rs or RewriteSystem()
    accepted: List[SeedRoot] = []
    for candidate in list(candidates) + [0]:
        value = rs.reduce_ratfun(as_ratfun(candidate))
        if any(seed.value.equals(value, rs) for seed in accepted):
            continue
        if rs.is_zero(eq.constant_part(value)):
            accepted.append(SeedRoot(value))
        else:
            logger.debug(f"Rejected seed candidate {value}")
    if not accepted:
        raise NoCandidates("No constant seed solves the equation")
    return accepted


def _check_homogeneous(eq: EulerEquation) -> None:
    if not eq.is_euler_homogeneous():
        raise UnsupportedAnsatz("Series solving needs every rho power to match its derivative orders")


def _convolve(weights: Sequence[Mapping[MultiIndex, RationalFunction]], target: MultiIndex) -> RationalFunction:
    if not weights:
        return RationalFunction(1) if not any(target) else _ZERO
    if len(weights) == 1:
        return weights[0].get(target, _ZERO)
    total = _ZERO
    for index, weight in weights[0].items():
        rest = tuple(t - j for t, j in zip(target, index))
        if min(rest) < 0:
            continue
        tail = _convolve(weights[1:], rest)
        if not tail.is_zero():
            total = total + weight * tail
    return total


def graded_coefficient(
    eq: EulerEquation,
    coefficients: Mapping[MultiIndex, RationalFunction],
    index: MultiIndex,
) -> RationalFunction:
    """Coefficient of rho^index after substituting the series into ``eq``."""
    total = _ZERO
    for term in eq.terms:
        weights = []
        for beta in term.derivatives:
            weight = {}
            for j, c in coefficients.items():
                ff = falling_factorial(j, beta)
                if ff and all(a <= b for a, b in zip(j, index)):
                    weight[j] = c.scale(ff)
            weights.append(weight)
        value = _convolve(weights, index)
        if not value.is_zero():
            total = total + term.coef * value
    return total


def linear_part(eq: EulerEquation, index: MultiIndex, seed_powers: Sequence[RationalFunction]) -> RationalFunction:
    """Coefficient of c_index in the graded coefficient at ``index``."""
    total = _ZERO
    for term in eq.terms:
        count = 0
        for position, beta in enumerate(term.derivatives):
            others_constant = all(
                not any(other) for other_pos, other in enumerate(term.derivatives) if other_pos != position
            )
            if others_constant:
                count += falling_factorial(index, beta)
        if count:
            total = total + (term.coef * seed_powers[term.phi_degree - 1]).scale(count)
    return total


def solve_series(
    eq: EulerEquation,
    seed: SeedRoot,
    free_coeffs: Sequence[Tuple[Sequence[int], Symbol]],
    N: int,
    rs: Optional[RewriteSystem] = None,
    reverse_within_degree: bool = False,
) -> PowerSeries:
    """
    Solve for the Taylor coefficients up to total degree ``N``.

    Args:
        eq: Euler-homogeneous equation
        seed: constant term c_0
        free_coeffs: (index, symbol) pairs left as fresh parameters
        N: truncation degree
        rs: rules for zero tests and coefficient reduction
        reverse_within_degree: process same-degree indices in the opposite order

    Returns:
        PowerSeries: coefficients with nonzero value

    Raises:
        Obstruction: if some c_J has zero linear part and nonzero inhomogeneity,
            or a free coefficient is forced
    """
    _check_homogeneous(eq)
    rs = rs or RewriteSystem()
    size = eq.size
    zero = (0,) * size
    frees: Dict[MultiIndex, Symbol] = {}
    for index, symbol in free_coeffs:
        index = tuple(index)
        if len(index) != size or sum(index) == 0 or min(index) < 0:
            raise UsageError(f"Invalid free coefficient index {list(index)}")
        frees[index] = symbol

    c0 = rs.reduce_ratfun(seed.value)
    seed_powers = [RationalFunction(1)]
    for _ in range(max(eq.max_phi_degree() - 1, 0)):
        seed_powers.append(rs.reduce_ratfun(seed_powers[-1] * c0))

    coefficients: Dict[MultiIndex, RationalFunction] = {}
    if not c0.is_zero():
        coefficients[zero] = c0

    for degree in range(1, N + 1):
        layer = indices_of_degree(size, degree)
        if reverse_within_degree:
            layer = layer[::-1]
        solved: Dict[MultiIndex, RationalFunction] = {}
        for index in layer:
            a = rs.reduce_ratfun(linear_part(eq, index, seed_powers))
            b = rs.reduce_ratfun(graded_coefficient(eq, coefficients, index))
            if index in frees:
                value = RationalFunction(Polynomial.symbol(frees[index]))
                if not rs.is_zero(a * value + b):
                    raise Obstruction(index, f"Coefficient at {list(index)} cannot be free")
            elif a.is_zero():
                if not b.is_zero():
                    raise Obstruction(index)
                value = _ZERO
            else:
                value = rs.reduce_ratfun(-b / a)
            if not value.is_zero():
                solved[index] = value
        # same-degree coefficients never feed each other
        coefficients.update(solved)
        logger.debug(f"Series degree {degree}: {len(solved)} nonzero coefficients")

    logger.info(f"Solved series to degree {N} ({len(coefficients)} nonzero coefficients)")
    return PowerSeries(
        coefficients,
        N,
        eq.rho_symbols,
        tuple(sorted(frees.items())),
    )


def series_residual(
    eq: EulerEquation,
    series: PowerSeries,
    rs: Optional[RewriteSystem] = None,
) -> Dict[MultiIndex, RationalFunction]:
    """Nonzero graded coefficients of eq(series) up to the truncation degree."""
    rs = rs or RewriteSystem()
    out = {}
    for degree in range(series.truncation_degree + 1):
        for index in indices_of_degree(eq.size, degree):
            value = rs.reduce_ratfun(graded_coefficient(eq, series.coefficients, index))
            if not value.is_zero():
                out[index] = value
    return out
