"""
Homogeneous multivariate Padé approximants.

The multivariate series is graded along rho -> xi * rho, a univariate [L/M]
approximant in xi is computed with fraction-free elimination, and xi = 1
collapses it back to a rational function of the rho variables.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import (
    ONE_POLY,
    Polynomial,
    RationalFunction,
    RewriteSystem,
    Symbol,
    as_ratfun,
)
from .errors import (
    DegenerateDenominator,
    InsufficientOrder,
    MathematicalFailure,
    SingularSystem,
)
from .series import PowerSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedSeries:
    """a[n] = sum over |J| = n of c_J rho^J."""

    a: Tuple[RationalFunction, ...]
    rho_symbols: Tuple[Symbol, ...]

    @property
    def order(self) -> int:
        return len(self.a) - 1

    def term(self, n: int) -> RationalFunction:
        return self.a[n] if 0 <= n < len(self.a) else RationalFunction()


@dataclass(frozen=True)
class PadeApproximant:
    p: Tuple[RationalFunction, ...]
    q: Tuple[RationalFunction, ...]
    L: int
    M: int


@dataclass(frozen=True)
class RationalAnsatz:
    """Candidate solution num / den in the rho variables and parameters."""

    num: Polynomial
    den: Polynomial
    rho_symbols: Tuple[Symbol, ...] = ()

    @classmethod
    def from_ratfun(cls, value, rho_symbols: Sequence[Symbol] = ()) -> "RationalAnsatz":
        value = as_ratfun(value)
        return cls(value.num, value.den, tuple(rho_symbols))

    def as_ratfun(self) -> RationalFunction:
        return RationalFunction(self.num, self.den)

    def equals(self, other: "RationalAnsatz", rs: Optional[RewriteSystem] = None) -> bool:
        difference = self.num * other.den - other.num * self.den
        if rs is not None:
            difference = rs.reduce(difference)
        return difference.is_zero()

    def to_string(self) -> str:
        if self.den == 1:
            return self.num.to_string()
        return f"({self.num.to_string()})/({self.den.to_string()})"

    __str__ = to_string


@dataclass(frozen=True)
class PadeTableEntry:
    L: int
    M: int
    ansatz: Optional[RationalAnsatz] = None
    error: Optional[str] = None


def grade(series: PowerSeries, upto: int) -> GradedSeries:
    """
    Regroup the series by total rho degree.

    Raises:
        InsufficientOrder: if the series is truncated below ``upto``
    """
    if series.truncation_degree < upto:
        raise InsufficientOrder(
            f"Series known to degree {series.truncation_degree}, degree {upto} needed"
        )
    layers: List[RationalFunction] = [RationalFunction() for _ in range(upto + 1)]
    for index, coef in series.coefficients.items():
        degree = sum(index)
        if degree > upto:
            continue
        rho_power = ONE_POLY
        for symbol, exp in zip(series.rho_symbols, index):
            if exp:
                rho_power = rho_power * Polynomial.symbol(symbol) ** exp
        layers[degree] = layers[degree] + coef * rho_power
    return GradedSeries(tuple(layers), series.rho_symbols)


def _normal_factor(poly: Polynomial) -> Optional[Polynomial]:
    """Primitive part without monomial content, or None for monomials."""
    if len(poly.terms) < 2:
        return None
    _, part = poly.primitive()
    mono = part.monomial_content()
    if not mono.is_one():
        part = part.divide_monomial(mono)
    return part if len(part.terms) >= 2 else None


def _clear_row(entries: Sequence[RationalFunction]) -> List[Polynomial]:
    """Multiply a row by the LCM of its denominators."""
    lcm: Dict[Polynomial, int] = {}
    for entry in entries:
        for factor, exp in entry.den_factors:
            lcm[factor] = max(lcm.get(factor, 0), exp)
    cleared = []
    for entry in entries:
        own = dict(entry.den_factors)
        scale = ONE_POLY
        for factor, exp in lcm.items():
            missing = exp - own.get(factor, 0)
            if missing:
                scale = scale * factor ** missing
        cleared.append(entry.num * scale)
    return cleared


def _bareiss(rows: List[List[Polynomial]], unknowns: int, rs: RewriteSystem) -> Tuple[List[List[Polynomial]], List[int]]:
    """
    Fraction-free row echelon form of the augmented matrix ``rows``.

    Returns the reduced rows and the pivot column of each leading row.
    Columns without a nonzero pivot are skipped.
    """
    rows = [[rs.reduce(entry) for entry in row] for row in rows]
    previous = ONE_POLY
    pivot_columns: List[int] = []
    top = 0
    for col in range(unknowns):
        found = next((i for i in range(top, len(rows)) if not rows[i][col].is_zero()), None)
        if found is None:
            logger.debug(f"Column {col} has no pivot")
            continue
        rows[top], rows[found] = rows[found], rows[top]
        pivot_row = rows[top]
        pivot = pivot_row[col]
        for i in range(top + 1, len(rows)):
            row = rows[i]
            lead = row[col]
            updated = [
                rs.reduce(pivot * row[j] - lead * pivot_row[j]) if j > col else Polynomial()
                for j in range(len(row))
            ]
            divided = []
            for entry in updated:
                quotient = entry.try_divide(previous)
                if quotient is None:
                    break
                divided.append(quotient)
            # keep the row undivided when the quotient ring spoils exactness
            rows[i] = divided if len(divided) == len(updated) else updated
        previous = pivot
        pivot_columns.append(col)
        top += 1
    return rows, pivot_columns


def pade_solve(g: GradedSeries, L: int, M: int, rs: Optional[RewriteSystem] = None) -> PadeApproximant:
    """
    Solve sum_{s=1..M} a_{j-s} q_s = -a_j for j = L+1..L+M and form p.

    A column without a pivot in a consistent system gets q_s = 0.

    Args:
        g: graded series covering degrees 0..L+M
        L: numerator degree in xi
        M: denominator degree in xi
        rs: rules used in zero tests and reductions

    Returns:
        PadeApproximant: q[0] = 1

    Raises:
        InsufficientOrder: if g is too short
        SingularSystem: if the linear system is inconsistent
    """
    if L < 0 or M < 0:
        raise ValueError("Padé degrees must be nonnegative")
    if g.order < L + M:
        raise InsufficientOrder(f"[{L}/{M}] needs degree {L + M}, series has {g.order}")
    rs = rs or RewriteSystem()

    q: List[RationalFunction] = [RationalFunction(1)] + [RationalFunction() for _ in range(M)]
    if M:
        raw_rows = []
        for j in range(L + 1, L + M + 1):
            raw_rows.append([g.term(j - s) for s in range(1, M + 1)] + [-g.term(j)])
        rows = [_clear_row(row) for row in raw_rows]

        pool: List[Polynomial] = []
        for row in raw_rows:
            for entry in row:
                for factor, _ in entry.den_factors:
                    if factor not in pool:
                        pool.append(factor)
        for row in rows:
            for entry in row:
                factor = _normal_factor(rs.reduce(entry))
                if factor is not None and factor not in pool:
                    pool.append(factor)

        echelon, pivots = _bareiss(rows, M, rs)
        for row in echelon[len(pivots):]:
            if not row[M].is_zero():
                raise SingularSystem(f"[{L}/{M}] system is inconsistent")

        for position in reversed(range(len(pivots))):
            col = pivots[position]
            row = echelon[position]
            total = RationalFunction(row[M])
            for other in range(col + 1, M):
                if not row[other].is_zero() and not q[other + 1].is_zero():
                    total = total - q[other + 1] * row[other]
            pivot = RationalFunction(row[col])
            pivot_inverse = pivot.inverse(pool)
            q[col + 1] = rs.reduce_ratfun(total * pivot_inverse)

    p: List[RationalFunction] = []
    for j in range(L + 1):
        total = RationalFunction()
        for s in range(min(j, M) + 1):
            if not q[s].is_zero():
                total = total + g.term(j - s) * q[s]
        p.append(rs.reduce_ratfun(total))

    logger.debug(f"Solved [{L}/{M}] Padé system")
    return PadeApproximant(tuple(p), tuple(q), L, M)


def order_condition(g: GradedSeries, pa: PadeApproximant, rs: Optional[RewriteSystem] = None) -> Dict[int, RationalFunction]:
    """Nonzero graded components of Q*A - P for n = 0..L+M."""
    rs = rs or RewriteSystem()
    out = {}
    for n in range(pa.L + pa.M + 1):
        total = RationalFunction()
        for s in range(min(n, pa.M) + 1):
            total = total + pa.q[s] * g.term(n - s)
        if n <= pa.L:
            total = total - pa.p[n]
        total = rs.reduce_ratfun(total)
        if not total.is_zero():
            out[n] = total
    return out


def collapse(pa: PadeApproximant, rs: Optional[RewriteSystem] = None, rho_symbols: Sequence[Symbol] = ()) -> RationalAnsatz:
    """
    Set xi = 1: num = sum p_j, den = sum q_j.

    Raises:
        DegenerateDenominator: if the denominator reduces to zero
    """
    rs = rs or RewriteSystem()
    num = RationalFunction()
    for term in pa.p:
        num = num + term
    den = RationalFunction()
    for term in pa.q:
        den = den + term
    den = rs.reduce_ratfun(den)
    if den.is_zero():
        raise DegenerateDenominator(f"[{pa.L}/{pa.M}] denominator vanishes")
    value = rs.reduce_ratfun(rs.reduce_ratfun(num) / den)
    return RationalAnsatz.from_ratfun(value, rho_symbols)


def pade_ansatz(series: PowerSeries, L: int, M: int, rs: Optional[RewriteSystem] = None) -> RationalAnsatz:
    """grade, pade_solve and collapse in one step."""
    graded = grade(series, L + M)
    approximant = pade_solve(graded, L, M, rs)
    ansatz = collapse(approximant, rs, series.rho_symbols)
    logger.info(f"[{L}/{M}] ansatz: {ansatz.to_string()}")
    return ansatz


def pade_table(
    series: PowerSeries,
    entries: Iterable[Tuple[int, int]],
    rs: Optional[RewriteSystem] = None,
) -> List[PadeTableEntry]:
    """Collapse several [L/M] entries; failures are recorded, not raised."""
    table = []
    for L, M in entries:
        try:
            table.append(PadeTableEntry(L, M, pade_ansatz(series, L, M, rs)))
        except MathematicalFailure as error:
            logger.warning(f"[{L}/{M}] failed: {error}")
            table.append(PadeTableEntry(L, M, error=str(error)))
    return table


def stable_entries(
    table: Sequence[PadeTableEntry],
    reference: Tuple[int, int],
    rs: Optional[RewriteSystem] = None,
) -> List[Tuple[int, int]]:
    """Entries whose ansatz equals the ``reference`` entry by cross-multiplication."""
    base = next((e for e in table if (e.L, e.M) == tuple(reference)), None)
    if base is None or base.ansatz is None:
        return []
    return [
        (entry.L, entry.M)
        for entry in table
        if entry.ansatz is not None and (entry.L, entry.M) != tuple(reference) and entry.ansatz.equals(base.ansatz, rs)
    ]
