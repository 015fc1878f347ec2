"""
Exact arithmetic foundation.

Rationals are ``fractions.Fraction``. Polynomials are sparse maps from
monomials to rationals, kept canonical (no zero coefficients). Rational
functions keep their denominator as a product of primitive factors, which
makes sums cheap and lets cancellation work by trial division without a
multivariate GCD. Rewrite systems reduce polynomials modulo algebraic
extensions (i^2 = -1, slam^2 = lambda, ...) and parameter constraints.

Term order: graded lexicographic, symbols ordered by creation.
"""

import heapq
import logging
import threading
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import DivisionByZero, NonTerminating, NotDivisible, UnknownSymbol, UsageError, ZeroDivisor

logger = logging.getLogger(__name__)

Rational = Fraction

PARAMETER = "parameter"
RHO = "rho"
EXTENSION = "extension"
COORDINATE = "coordinate"
SYMBOL_KINDS = (PARAMETER, RHO, EXTENSION, COORDINATE)

DEFAULT_REWRITE_BUDGET = 100_000
_MAX_REWRITE_DEPTH = 400


class Symbol:
    """An interned symbol. Compare by identity; order by creation index."""

    __slots__ = ("name", "kind", "index")

    def __init__(self, name: str, kind: str, index: int):
        self.name = name
        self.kind = kind
        self.index = index

    def __repr__(self) -> str:
        return f"Symbol({self.name!r}, {self.kind})"

    def __str__(self) -> str:
        return self.name


class SymbolTable:
    """
    Interner for symbols of one problem.

    Creation is serialized by a lock; everything built from the symbols is
    immutable. Extension symbols carry their defining square rule.
    """

    def __init__(self):
        self._symbols: Dict[str, Symbol] = {}
        self._squares: Dict[Symbol, "Polynomial"] = {}
        self._lock = threading.Lock()

    def symbol(self, name: str, kind: str = PARAMETER) -> Symbol:
        """
        Return the symbol called ``name``, creating it on first use.

        Raises:
            UsageError: if ``name`` already exists with another kind
        """
        if kind not in SYMBOL_KINDS:
            raise UsageError(f"Unknown symbol kind: {kind}")
        with self._lock:
            existing = self._symbols.get(name)
            if existing is not None:
                if existing.kind != kind:
                    raise UsageError(f"Symbol '{name}' already declared as {existing.kind}")
                return existing
            created = Symbol(name, kind, len(self._symbols))
            self._symbols[name] = created
            return created

    def parameter(self, name: str) -> Symbol:
        return self.symbol(name, PARAMETER)

    def rho(self, name: str) -> Symbol:
        return self.symbol(name, RHO)

    def coordinate(self, name: str) -> Symbol:
        return self.symbol(name, COORDINATE)

    def extension(self, name: str, square: "PolynomialLike") -> Symbol:
        """Declare an extension symbol ``name`` with ``name^2 = square``."""
        created = self.symbol(name, EXTENSION)
        with self._lock:
            self._squares[created] = as_polynomial(square)
        return created

    def square_of(self, symbol: Symbol) -> Optional["Polynomial"]:
        return self._squares.get(symbol)

    def extension_rules(self, budget: int = DEFAULT_REWRITE_BUDGET) -> "RewriteSystem":
        """The rewrite system ``s^2 -> square`` for every extension symbol."""
        rules = [
            RewriteRule(Monomial.of(sym, 2), square, name=f"{sym.name}^2")
            for sym, square in self._squares.items()
        ]
        return RewriteSystem(rules, budget=budget)

    def get(self, name: str) -> Optional[Symbol]:
        return self._symbols.get(name)

    def __getitem__(self, name: str) -> Symbol:
        found = self._symbols.get(name)
        if found is None:
            raise UnknownSymbol(name)
        return found

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def symbols(self, kind: Optional[str] = None) -> List[Symbol]:
        """Symbols in creation order, optionally filtered by kind."""
        return [s for s in self._symbols.values() if kind is None or s.kind == kind]


class Monomial:
    """Power product of symbols, stored sorted by symbol creation index."""

    __slots__ = ("_vars", "_hash", "_degree", "_key")

    def __init__(self, vars: Union[Mapping[Symbol, int], Iterable[Tuple[Symbol, int]]] = ()):
        items = vars.items() if isinstance(vars, Mapping) else vars
        merged: Dict[Symbol, int] = {}
        for sym, exp in items:
            if exp < 0:
                raise ValueError(f"Negative exponent for {sym.name}")
            if exp:
                merged[sym] = merged.get(sym, 0) + exp
        self._set(tuple(sorted(merged.items(), key=lambda item: item[0].index)))

    def _set(self, vars: Tuple[Tuple[Symbol, int], ...]) -> None:
        self._vars = vars
        self._hash = hash(vars)
        self._degree = sum(exp for _, exp in vars)
        self._key = None

    @classmethod
    def _from_sorted(cls, vars: Tuple[Tuple[Symbol, int], ...]) -> "Monomial":
        made = cls.__new__(cls)
        made._set(vars)
        return made

    @classmethod
    def of(cls, symbol: Symbol, exp: int = 1) -> "Monomial":
        return cls._from_sorted(((symbol, exp),) if exp else ())

    @property
    def vars(self) -> Tuple[Tuple[Symbol, int], ...]:
        return self._vars

    @property
    def degree(self) -> int:
        return self._degree

    def is_one(self) -> bool:
        return not self._vars

    def exponent(self, symbol: Symbol) -> int:
        for sym, exp in self._vars:
            if sym is symbol:
                return exp
        return 0

    def degree_in(self, symbols: Iterable[Symbol]) -> int:
        wanted = set(symbols)
        return sum(exp for sym, exp in self._vars if sym in wanted)

    def exponents(self, symbols: Sequence[Symbol]) -> Tuple[int, ...]:
        table = dict(self._vars)
        return tuple(table.get(sym, 0) for sym in symbols)

    def symbols(self) -> Tuple[Symbol, ...]:
        return tuple(sym for sym, _ in self._vars)

    def touches(self, symbols: "frozenset") -> bool:
        return any(sym in symbols for sym, _ in self._vars)

    def split(self, symbols: Iterable[Symbol]) -> Tuple["Monomial", "Monomial"]:
        """Split into (part over ``symbols``, remaining part)."""
        wanted = set(symbols)
        inside = tuple(item for item in self._vars if item[0] in wanted)
        outside = tuple(item for item in self._vars if item[0] not in wanted)
        return Monomial._from_sorted(inside), Monomial._from_sorted(outside)

    def __mul__(self, other: "Monomial") -> "Monomial":
        a, b = self._vars, other._vars
        if not a:
            return other
        if not b:
            return self
        out = []
        i = j = 0
        while i < len(a) and j < len(b):
            sa, ea = a[i]
            sb, eb = b[j]
            if sa is sb:
                out.append((sa, ea + eb))
                i += 1
                j += 1
            elif sa.index < sb.index:
                out.append(a[i])
                i += 1
            else:
                out.append(b[j])
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return Monomial._from_sorted(tuple(out))

    def __pow__(self, exp: int) -> "Monomial":
        return Monomial._from_sorted(tuple((sym, e * exp) for sym, e in self._vars) if exp else ())

    def divides(self, other: "Monomial") -> bool:
        if self._degree > other._degree:
            return False
        table = dict(other._vars)
        return all(table.get(sym, 0) >= exp for sym, exp in self._vars)

    def __truediv__(self, other: "Monomial") -> "Monomial":
        """Exact quotient; raises NotDivisible."""
        remaining = dict(other._vars)
        out = []
        for sym, exp in self._vars:
            left = exp - remaining.pop(sym, 0)
            if left < 0:
                raise NotDivisible(f"{other} does not divide {self}")
            if left:
                out.append((sym, left))
        if remaining:
            raise NotDivisible(f"{other} does not divide {self}")
        return Monomial._from_sorted(tuple(out))

    def gcd(self, other: "Monomial") -> "Monomial":
        table = dict(other._vars)
        return Monomial._from_sorted(
            tuple((sym, min(exp, table[sym])) for sym, exp in self._vars if sym in table)
        )

    def lcm(self, other: "Monomial") -> "Monomial":
        table = dict(self._vars)
        for sym, exp in other._vars:
            table[sym] = max(table.get(sym, 0), exp)
        return Monomial(table)

    @property
    def key(self) -> tuple:
        """Ascending graded-lex sort key."""
        if self._key is None:
            self._key = (self._degree, tuple((-sym.index, exp) for sym, exp in self._vars))
        return self._key

    @property
    def heap_key(self) -> tuple:
        """Key whose ascending order is descending term order."""
        return (-self._degree, tuple((sym.index, -exp) for sym, exp in self._vars))

    def __lt__(self, other: "Monomial") -> bool:
        return self.key < other.key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Monomial) and self._vars == other._vars

    def __hash__(self) -> int:
        return self._hash

    def to_string(self) -> str:
        if not self._vars:
            return "1"
        return "*".join(sym.name if exp == 1 else f"{sym.name}^{exp}" for sym, exp in self._vars)

    __str__ = to_string

    def __repr__(self) -> str:
        return f"Monomial({self.to_string()})"


ONE = Monomial()

Number = Union[int, Fraction]
PolynomialLike = Union["Polynomial", Number, Symbol, Monomial]


def _format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class Polynomial:
    """
    Canonical sparse multivariate polynomial over the rationals.

    Instances are immutable; two polynomials are equal iff their term maps
    are identical.

    >>> table = SymbolTable()
    >>> x = Polynomial.symbol(table.parameter("x"))
    >>> str((x + 1) * (x - 1))
    'x^2 - 1'
    """

    __slots__ = ("_terms", "_hash", "_str")

    def __init__(self, terms: Union[Mapping[Monomial, Number], Iterable[Tuple[Monomial, Number]], None] = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for mono, coef in items:
                clean[mono] = clean.get(mono, 0) + Fraction(coef)
        self._terms = {mono: coef for mono, coef in clean.items() if coef}
        self._hash = None
        self._str = None

    @classmethod
    def _make(cls, terms: Dict[Monomial, Fraction]) -> "Polynomial":
        made = cls.__new__(cls)
        made._terms = terms
        made._hash = None
        made._str = None
        return made

    @classmethod
    def constant(cls, value: Number) -> "Polynomial":
        value = Fraction(value)
        return cls._make({ONE: value} if value else {})

    @classmethod
    def symbol(cls, symbol: Symbol) -> "Polynomial":
        return cls._make({Monomial.of(symbol): Fraction(1)})

    @classmethod
    def monomial(cls, mono: Monomial, coef: Number = 1) -> "Polynomial":
        coef = Fraction(coef)
        return cls._make({mono: coef} if coef else {})

    # Inspection

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms in descending term order."""
        return sorted(self._terms.items(), key=lambda item: item[0].key, reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE in self._terms)

    def constant_value(self) -> Fraction:
        """Coefficient of the monomial 1."""
        return self._terms.get(ONE, Fraction(0))

    def as_symbol(self) -> Optional[Symbol]:
        """The symbol if this polynomial is exactly one symbol, else None."""
        if len(self._terms) != 1:
            return None
        (mono, coef), = self._terms.items()
        if coef == 1 and len(mono.vars) == 1 and mono.vars[0][1] == 1:
            return mono.vars[0][0]
        return None

    def leading_term(self) -> Tuple[Monomial, Fraction]:
        if not self._terms:
            raise ValueError("The zero polynomial has no leading term")
        mono = max(self._terms, key=lambda m: m.key)
        return mono, self._terms[mono]

    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    def degree_in(self, symbols: Iterable[Symbol]) -> int:
        wanted = list(symbols)
        return max((m.degree_in(wanted) for m in self._terms), default=0)

    def symbols(self) -> List[Symbol]:
        found = {sym for m in self._terms for sym in m.symbols()}
        return sorted(found, key=lambda s: s.index)

    def _max_exponents(self) -> Dict[Symbol, int]:
        exps: Dict[Symbol, int] = {}
        for mono in self._terms:
            for sym, exp in mono.vars:
                if exp > exps.get(sym, 0):
                    exps[sym] = exp
        return exps

    # Arithmetic

    def __add__(self, other: PolynomialLike) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for mono, coef in other._terms.items():
            current = out.get(mono)
            if current is None:
                out[mono] = coef
            else:
                total = current + coef
                if total:
                    out[mono] = total
                else:
                    del out[mono]
        return Polynomial._make(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._make({mono: -coef for mono, coef in self._terms.items()})

    def __sub__(self, other: PolynomialLike) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: PolynomialLike) -> "Polynomial":
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, factor: Number) -> "Polynomial":
        factor = Fraction(factor)
        if not factor:
            return ZERO
        if factor == 1:
            return self
        return Polynomial._make({mono: coef * factor for mono, coef in self._terms.items()})

    def mul_monomial(self, mono: Monomial, coef: Number = 1) -> "Polynomial":
        coef = Fraction(coef)
        if not coef:
            return ZERO
        return Polynomial._make({m * mono: c * coef for m, c in self._terms.items()})

    def __mul__(self, other: PolynomialLike) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self._terms or not other._terms:
            return ZERO
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mono, coef), = b.items()
            return self.mul_monomial(mono, coef) if a is self._terms else other.mul_monomial(mono, coef)
        out: Dict[Monomial, Fraction] = {}
        get = out.get
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                mono = m1 * m2
                out[mono] = get(mono, 0) + c1 * c2
        return Polynomial._make({mono: coef for mono, coef in out.items() if coef})

    __rmul__ = __mul__

    def __pow__(self, exp: int) -> "Polynomial":
        if exp < 0:
            raise ValueError("Polynomial powers must be nonnegative")
        result = ONE_POLY
        base = self
        while exp:
            if exp & 1:
                result = result * base
            exp >>= 1
            if exp:
                base = base * base
        return result

    def divide_monomial(self, mono: Monomial) -> "Polynomial":
        return Polynomial._make({m / mono: c for m, c in self._terms.items()})

    def divide_exact(self, divisor: PolynomialLike) -> "Polynomial":
        """
        Exact division.

        Returns:
            Polynomial: q with q * divisor == self

        Raises:
            ZeroDivisor: if divisor is zero
            NotDivisible: if divisor does not divide self
        """
        divisor = as_polynomial(divisor)
        if not divisor._terms:
            raise ZeroDivisor("Division by the zero polynomial")
        if not self._terms:
            return ZERO
        if divisor.is_constant():
            return self.scale(1 / divisor.constant_value())
        if len(divisor._terms) == 1:
            (mono, coef), = divisor._terms.items()
            return self.divide_monomial(mono).scale(1 / coef)

        available = self._max_exponents()
        for sym, exp in divisor._max_exponents().items():
            if available.get(sym, 0) < exp:
                raise NotDivisible("Degree of divisor exceeds dividend")

        lead, lead_coef = divisor.leading_term()
        tail = [(m, c) for m, c in divisor._terms.items() if m != lead]
        remainder = dict(self._terms)
        heap = [(m.heap_key, m) for m in remainder]
        heapq.heapify(heap)
        quotient: Dict[Monomial, Fraction] = {}
        while heap:
            _, mono = heapq.heappop(heap)
            coef = remainder.pop(mono, None)
            if coef is None:
                continue
            q_mono = mono / lead
            q_coef = coef / lead_coef
            quotient[q_mono] = q_coef
            for t_mono, t_coef in tail:
                product = q_mono * t_mono
                current = remainder.get(product)
                value = (current or 0) - q_coef * t_coef
                if value:
                    if current is None:
                        heapq.heappush(heap, (product.heap_key, product))
                    remainder[product] = value
                elif current is not None:
                    del remainder[product]
        return Polynomial._make(quotient)

    def try_divide(self, divisor: PolynomialLike) -> Optional["Polynomial"]:
        """Exact quotient, or None if not divisible."""
        try:
            return self.divide_exact(divisor)
        except NotDivisible:
            return None

    # Structure

    def diff(self, symbol: Symbol) -> "Polynomial":
        out: Dict[Monomial, Fraction] = {}
        step = Monomial.of(symbol)
        for mono, coef in self._terms.items():
            exp = mono.exponent(symbol)
            if exp:
                out[mono / step] = coef * exp
        return Polynomial._make(out)

    def coefficients_in(self, symbols: Iterable[Symbol]) -> Dict[Monomial, "Polynomial"]:
        """Group terms by their monomial over ``symbols``."""
        wanted = list(symbols)
        groups: Dict[Monomial, Dict[Monomial, Fraction]] = {}
        for mono, coef in self._terms.items():
            inside, outside = mono.split(wanted)
            groups.setdefault(inside, {})[outside] = coef
        return {inside: Polynomial._make(part) for inside, part in groups.items()}

    def primitive(self) -> Tuple[Fraction, "Polynomial"]:
        """
        Split into content and primitive part.

        Returns:
            (c, p) with self == c * p, p having coprime integer
            coefficients and a positive leading coefficient
        """
        if not self._terms:
            return Fraction(1), self
        num_gcd = 0
        den_lcm = 1
        for coef in self._terms.values():
            num_gcd = gcd(num_gcd, coef.numerator)
            den_lcm = _lcm(den_lcm, coef.denominator)
        content = Fraction(num_gcd, den_lcm)
        if self.leading_term()[1] < 0:
            content = -content
        return content, self.scale(1 / content)

    def monomial_content(self) -> Monomial:
        result = None
        for mono in self._terms:
            result = mono if result is None else result.gcd(mono)
            if result.is_one():
                break
        return result or ONE

    def substitute(self, mapping: Mapping[Symbol, PolynomialLike]) -> "Polynomial":
        values = {sym: as_polynomial(value) for sym, value in mapping.items()}
        total = ZERO
        for mono, coef in self._terms.items():
            term = Polynomial.constant(coef)
            kept = []
            for sym, exp in mono.vars:
                if sym in values:
                    term = term * values[sym] ** exp
                else:
                    kept.append((sym, exp))
            total = total + term.mul_monomial(Monomial._from_sorted(tuple(kept)))
        return total

    def evaluate(self, values: Mapping[Symbol, complex]) -> complex:
        """Numeric value at ``values`` (complex doubles)."""
        total = 0j
        for mono, coef in self._terms.items():
            term = complex(float(coef))
            for sym, exp in mono.vars:
                if sym not in values:
                    raise UnknownSymbol(sym.name)
                term *= values[sym] ** exp
            total += term
        return total

    # Comparison and text

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    def to_string(self) -> str:
        """Canonical text: descending term order, ``^`` powers, explicit ``*``."""
        if self._str is not None:
            return self._str
        if not self._terms:
            self._str = "0"
            return self._str
        pieces = []
        for position, (mono, coef) in enumerate(self.sorted_terms()):
            magnitude = abs(coef)
            if mono.is_one():
                body = _format_rational(magnitude)
            elif magnitude == 1:
                body = mono.to_string()
            else:
                body = f"{_format_rational(magnitude)}*{mono.to_string()}"
            if position == 0:
                pieces.append(f"-{body}" if coef < 0 else body)
            else:
                pieces.append(f" - {body}" if coef < 0 else f" + {body}")
        self._str = "".join(pieces)
        return self._str

    __str__ = to_string

    def __repr__(self) -> str:
        return f"Polynomial({self.to_string()})"


ZERO = Polynomial._make({})
ONE_POLY = Polynomial._make({ONE: Fraction(1)})


def _coerce(value: object):
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return Polynomial.constant(value)
    if isinstance(value, Symbol):
        return Polynomial.symbol(value)
    if isinstance(value, Monomial):
        return Polynomial.monomial(value)
    return NotImplemented


def as_polynomial(value: PolynomialLike) -> Polynomial:
    coerced = _coerce(value)
    if coerced is NotImplemented:
        if isinstance(value, RationalFunction):
            return value.as_polynomial()
        raise TypeError(f"Cannot use {type(value).__name__} as a polynomial")
    return coerced


def _factor_key(factor: Polynomial) -> tuple:
    return (factor.degree(), len(factor.terms), factor.to_string())


def _product(factors: Mapping[Polynomial, int]) -> Polynomial:
    result = ONE_POLY
    for factor, exp in sorted(factors.items(), key=lambda item: _factor_key(item[0])):
        if exp:
            result = result * factor ** exp
    return result


def factorize(poly: Polynomial, pool: Iterable[Polynomial] = ()) -> Tuple[Fraction, Dict[Polynomial, int]]:
    """
    Split ``poly`` into content, single-symbol factors, factors from
    ``pool`` (found by trial division) and one primitive remainder.

    Returns:
        (content, factors) with poly == content * prod(f**e)

    Raises:
        DivisionByZero: if poly is zero
    """
    if poly.is_zero():
        raise DivisionByZero("Zero denominator")
    content, rest = poly.primitive()
    factors: Dict[Polynomial, int] = {}
    mono = rest.monomial_content()
    if not mono.is_one():
        rest = rest.divide_monomial(mono)
        for sym, exp in mono.vars:
            factors[Polynomial.symbol(sym)] = exp
    for candidate in pool:
        if rest.is_constant():
            break
        if len(candidate.terms) < 2:
            continue
        while not rest.is_constant():
            quotient = rest.try_divide(candidate)
            if quotient is None:
                break
            factors[candidate] = factors.get(candidate, 0) + 1
            rest = quotient
    if rest.is_constant():
        content *= rest.constant_value()
    else:
        extra, rest = rest.primitive()
        content *= extra
        factors[rest] = factors.get(rest, 0) + 1
    return content, factors


def _cancel(num: Polynomial, factors: Mapping[Polynomial, int]) -> Tuple[Polynomial, Dict[Polynomial, int]]:
    remaining: Dict[Polynomial, int] = {}
    for factor, exp in factors.items():
        while exp > 0 and not num.is_zero():
            quotient = num.try_divide(factor)
            if quotient is None:
                break
            num = quotient
            exp -= 1
        if exp:
            remaining[factor] = exp
    return num, remaining


RationalLike = Union["RationalFunction", PolynomialLike]


class RationalFunction:
    """
    Quotient num / den with den kept as a product of primitive factors.

    Lowest terms are not guaranteed; equality is decided by
    cross-multiplication.
    """

    __slots__ = ("_num", "_factors")

    def __init__(self, num: PolynomialLike = 0, den: Optional[PolynomialLike] = None, pool: Iterable[Polynomial] = ()):
        num = as_polynomial(num)
        if den is None:
            self._init(num, {}, cancel=False)
            return
        content, factors = factorize(as_polynomial(den), pool)
        self._init(num.scale(1 / content), factors)

    def _init(self, num: Polynomial, factors: Mapping[Polynomial, int], cancel: bool = True) -> None:
        if num.is_zero():
            self._num = ZERO
            self._factors = ()
            return
        if cancel:
            num, factors = _cancel(num, factors)
        self._num = num
        self._factors = tuple(sorted(((f, e) for f, e in factors.items() if e), key=lambda item: _factor_key(item[0])))

    @classmethod
    def _build(cls, num: Polynomial, factors: Mapping[Polynomial, int], cancel: bool = True) -> "RationalFunction":
        made = cls.__new__(cls)
        made._init(num, factors, cancel)
        return made

    @classmethod
    def from_factors(cls, num: PolynomialLike, factors: Mapping[Polynomial, int]) -> "RationalFunction":
        """Build from a numerator and already primitive denominator factors."""
        return cls._build(as_polynomial(num), dict(factors))

    # Inspection

    @property
    def num(self) -> Polynomial:
        return self._num

    @property
    def den(self) -> Polynomial:
        return _product(dict(self._factors))

    @property
    def den_factors(self) -> Tuple[Tuple[Polynomial, int], ...]:
        return self._factors

    def is_zero(self) -> bool:
        return self._num.is_zero()

    def is_polynomial(self) -> bool:
        return not self._factors

    def as_polynomial(self) -> Polynomial:
        if self._factors:
            raise ValueError(f"Not a polynomial: {self.to_string()}")
        return self._num

    def symbols(self) -> List[Symbol]:
        found = set(self._num.symbols())
        for factor, _ in self._factors:
            found.update(factor.symbols())
        return sorted(found, key=lambda s: s.index)

    # Arithmetic

    def __add__(self, other: RationalLike) -> "RationalFunction":
        other = as_ratfun(other)
        if other._num.is_zero():
            return self
        if self._num.is_zero():
            return other
        mine = dict(self._factors)
        theirs = dict(other._factors)
        if mine == theirs:
            return RationalFunction._build(self._num + other._num, mine)
        lcm = dict(mine)
        for factor, exp in theirs.items():
            lcm[factor] = max(lcm.get(factor, 0), exp)
        left = self._num * _product({f: e - mine.get(f, 0) for f, e in lcm.items()})
        right = other._num * _product({f: e - theirs.get(f, 0) for f, e in lcm.items()})
        return RationalFunction._build(left + right, lcm)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._build(-self._num, dict(self._factors), cancel=False)

    def __sub__(self, other: RationalLike) -> "RationalFunction":
        return self + (-as_ratfun(other))

    def __rsub__(self, other: RationalLike) -> "RationalFunction":
        return as_ratfun(other) + (-self)

    def __mul__(self, other: RationalLike) -> "RationalFunction":
        other = as_ratfun(other)
        if self._num.is_zero() or other._num.is_zero():
            return RationalFunction()
        left, their_rest = _cancel(self._num, dict(other._factors))
        right, my_rest = _cancel(other._num, dict(self._factors))
        merged = dict(my_rest)
        for factor, exp in their_rest.items():
            merged[factor] = merged.get(factor, 0) + exp
        return RationalFunction._build(left * right, merged, cancel=False)

    __rmul__ = __mul__

    def inverse(self, pool: Iterable[Polynomial] = ()) -> "RationalFunction":
        if self._num.is_zero():
            raise DivisionByZero("Inverse of zero")
        known = [f for f, _ in self._factors] + list(pool)
        content, factors = factorize(self._num, known)
        return RationalFunction._build(_product(dict(self._factors)).scale(1 / content), factors)

    def __truediv__(self, other: RationalLike) -> "RationalFunction":
        other = as_ratfun(other)
        if other._num.is_zero():
            raise DivisionByZero(f"Division of {self.to_string()} by zero")
        pool = [f for f, _ in self._factors]
        return self * other.inverse(pool)

    def __rtruediv__(self, other: RationalLike) -> "RationalFunction":
        return as_ratfun(other) / self

    def __pow__(self, exp: int) -> "RationalFunction":
        if exp < 0:
            return self.inverse() ** (-exp)
        return RationalFunction._build(self._num ** exp, {f: e * exp for f, e in self._factors}, cancel=False)

    def scale(self, factor: Number) -> "RationalFunction":
        return RationalFunction._build(self._num.scale(factor), dict(self._factors), cancel=False)

    def diff(self, symbol: Symbol) -> "RationalFunction":
        """Derivative by the quotient rule, keeping the factored denominator."""
        if not self._factors:
            return RationalFunction(self._num.diff(symbol))
        factors = dict(self._factors)
        plain = _product({f: 1 for f in factors})
        total = self._num.diff(symbol) * plain
        for factor, exp in factors.items():
            others = _product({f: 1 for f in factors if f is not factor})
            total = total - self._num * factor.diff(symbol) * others * exp
        return RationalFunction._build(total, {f: e + 1 for f, e in factors.items()})

    def evaluate(self, values: Mapping[Symbol, complex]) -> complex:
        return self._num.evaluate(values) / self.den.evaluate(values)

    # Comparison and text

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, Polynomial, Symbol)):
            other = as_ratfun(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        if self._factors == other._factors:
            return self._num == other._num
        return self._num * other.den == other._num * self.den

    __hash__ = None

    def equals(self, other: RationalLike, rs: Optional["RewriteSystem"] = None) -> bool:
        """Cross-multiplication equality, modulo ``rs`` if given."""
        other = as_ratfun(other)
        difference = self._num * other.den - other._num * self.den
        if rs is not None:
            difference = rs.reduce(difference)
        return difference.is_zero()

    def den_string(self) -> str:
        parts = []
        for factor, exp in self._factors:
            if factor.as_symbol() is not None:
                text = factor.to_string()
            else:
                text = f"({factor.to_string()})"
            parts.append(text if exp == 1 else f"{text}^{exp}")
        return "*".join(parts)

    def to_string(self) -> str:
        if not self._factors:
            return self._num.to_string()
        return f"({self._num.to_string()})/({self.den_string()})"

    __str__ = to_string

    def __repr__(self) -> str:
        return f"RationalFunction({self.to_string()})"


def as_ratfun(value: RationalLike) -> RationalFunction:
    if isinstance(value, RationalFunction):
        return value
    return RationalFunction(as_polynomial(value))


class RewriteRule:
    """Oriented rule ``pattern -> replacement``."""

    __slots__ = ("pattern", "replacement", "name")

    def __init__(self, pattern: Union[Monomial, Polynomial, Symbol], replacement: PolynomialLike, name: str = ""):
        if isinstance(pattern, Symbol):
            pattern = Monomial.of(pattern)
        elif isinstance(pattern, Polynomial):
            if len(pattern.terms) != 1:
                raise UsageError(f"Rule pattern must be a monomial: {pattern}")
            (mono, coef), = pattern.terms.items()
            if coef != 1:
                raise UsageError(f"Rule pattern must have coefficient 1: {pattern}")
            pattern = mono
        if pattern.is_one():
            raise UsageError("Rule pattern must not be constant")
        replacement = as_polynomial(replacement)
        rewritten = pattern.symbols()
        for mono in replacement.terms:
            if mono.degree_in(rewritten) >= pattern.degree:
                raise UsageError(
                    f"Rule {pattern} -> {replacement} does not lower the degree in {', '.join(s.name for s in rewritten)}"
                )
        self.pattern = pattern
        self.replacement = replacement
        self.name = name or pattern.to_string()

    def is_power_rule(self) -> bool:
        return len(self.pattern.vars) == 1

    def to_string(self) -> str:
        return f"{self.pattern.to_string()} -> {self.replacement.to_string()}"

    def __repr__(self) -> str:
        return f"RewriteRule({self.to_string()})"


RuleLike = Union[RewriteRule, Tuple[Union[Monomial, Polynomial, Symbol], PolynomialLike]]


class RewriteSystem:
    """
    Terminating monomial rewrite system.

    Pure-power rules are tried before mixed-product rules, each group in
    the order given. Monomial normal forms are memoized per instance.
    """

    def __init__(self, rules: Iterable[RuleLike] = (), budget: int = DEFAULT_REWRITE_BUDGET):
        parsed = [rule if isinstance(rule, RewriteRule) else RewriteRule(*rule) for rule in rules]
        self._rules: Tuple[RewriteRule, ...] = tuple(
            [r for r in parsed if r.is_power_rule()] + [r for r in parsed if not r.is_power_rule()]
        )
        self._symbols = frozenset(sym for rule in self._rules for sym in rule.pattern.symbols())
        self._budget = budget
        self._memo: Dict[Monomial, Polynomial] = {}
        self._lock = threading.Lock()

    @property
    def rules(self) -> Tuple[RewriteRule, ...]:
        return self._rules

    @property
    def budget(self) -> int:
        return self._budget

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self) -> Iterator[RewriteRule]:
        return iter(self._rules)

    def extend(self, other: Union["RewriteSystem", Iterable[RuleLike]]) -> "RewriteSystem":
        extra = other.rules if isinstance(other, RewriteSystem) else other
        return RewriteSystem(list(self._rules) + list(extra), budget=self._budget)

    __add__ = extend

    # Reduction

    def reduce(self, value: PolynomialLike) -> Polynomial:
        """Normal form of ``value``; no monomial of the result matches a rule."""
        poly = as_polynomial(value)
        if not self._rules or poly.is_zero():
            return poly
        steps = [0]
        out: Dict[Monomial, Fraction] = {}
        for mono, coef in poly.terms.items():
            if not mono.touches(self._symbols):
                out[mono] = out.get(mono, 0) + coef
                continue
            for r_mono, r_coef in self._reduce_monomial(mono, steps, 0).terms.items():
                out[r_mono] = out.get(r_mono, 0) + coef * r_coef
        return Polynomial._make({m: c for m, c in out.items() if c})

    def _reduce_monomial(self, mono: Monomial, steps: List[int], depth: int) -> Polynomial:
        cached = self._memo.get(mono)
        if cached is not None:
            return cached
        if depth > _MAX_REWRITE_DEPTH:
            raise NonTerminating(f"Rewrite depth exceeded while reducing {mono}")
        result = None
        for rule in self._rules:
            if not rule.pattern.divides(mono):
                continue
            steps[0] += 1
            if steps[0] > self._budget:
                raise NonTerminating(f"Rewrite budget of {self._budget} steps exceeded at {mono}")
            rest = mono / rule.pattern
            acc: Dict[Monomial, Fraction] = {}
            for r_mono, r_coef in rule.replacement.terms.items():
                image = r_mono * rest
                if image.touches(self._symbols):
                    reduced = self._reduce_monomial(image, steps, depth + 1)
                else:
                    reduced = Polynomial.monomial(image)
                for s_mono, s_coef in reduced.terms.items():
                    acc[s_mono] = acc.get(s_mono, 0) + r_coef * s_coef
            result = Polynomial._make({m: c for m, c in acc.items() if c})
            break
        if result is None:
            result = Polynomial.monomial(mono)
        with self._lock:
            self._memo[mono] = result
        return result

    def is_zero(self, value: RationalLike) -> bool:
        if isinstance(value, RationalFunction):
            return self.reduce(value.num).is_zero()
        return self.reduce(value).is_zero()

    def reduce_ratfun(self, value: RationalLike) -> RationalFunction:
        """
        Reduce the numerator and rationalize denominator factors that are
        single extension symbols (1/s -> s/s^2 with s^2 rewritten).
        """
        value = as_ratfun(value)
        squares = {
            rule.pattern.vars[0][0]: rule.replacement
            for rule in self._rules
            if rule.is_power_rule() and rule.pattern.vars[0][1] == 2
        }
        result = RationalFunction._build(self.reduce(value.num), dict(value.den_factors))
        for _ in range(len(squares) + 1):
            factors = dict(result.den_factors)
            movable = [(f, e) for f, e in factors.items() if f.as_symbol() in squares]
            if not movable:
                break
            num = result.num
            divisor = ONE_POLY
            for factor, exp in movable:
                del factors[factor]
                num = num * factor ** exp
                divisor = divisor * squares[factor.as_symbol()] ** exp
            result = RationalFunction._build(self.reduce(num), factors) / divisor
            result = RationalFunction._build(self.reduce(result.num), dict(result.den_factors))
        return result

    def equal(self, a: RationalLike, b: RationalLike) -> bool:
        return as_ratfun(a).equals(b, self)

    # Diagnostics

    def critical_pairs(self) -> List[Tuple[RewriteRule, RewriteRule]]:
        """Overlapping rule pairs whose two reductions disagree."""
        failing = []
        for left, right in combinations(self._rules, 2):
            if not set(left.pattern.symbols()) & set(right.pattern.symbols()):
                continue
            overlap = left.pattern.lcm(right.pattern)
            via_left = self.reduce(left.replacement.mul_monomial(overlap / left.pattern))
            via_right = self.reduce(right.replacement.mul_monomial(overlap / right.pattern))
            if via_left != via_right:
                failing.append((left, right))
        return failing

    def is_confluent(self) -> bool:
        return not self.critical_pairs()

    def to_lines(self) -> List[str]:
        return [rule.to_string() for rule in self._rules]


def poly_arith(a: PolynomialLike, b: PolynomialLike, op: str) -> Polynomial:
    """Exact polynomial ``add``, ``sub`` or ``mul``."""
    a, b = as_polynomial(a), as_polynomial(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"Unsupported polynomial operation: {op}")


def poly_divide_exact(dividend: PolynomialLike, divisor: PolynomialLike) -> Polynomial:
    """q with q * divisor == dividend; raises NotDivisible or ZeroDivisor."""
    return as_polynomial(dividend).divide_exact(divisor)


def rewrite_fixpoint(p: PolynomialLike, rs: RewriteSystem) -> Polynomial:
    return rs.reduce(p)


def ratfun_arith(a: RationalLike, b: RationalLike, op: str) -> RationalFunction:
    """Exact rational-function ``add``, ``sub``, ``mul`` or ``div``."""
    a, b = as_ratfun(a), as_ratfun(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"Unsupported rational-function operation: {op}")
