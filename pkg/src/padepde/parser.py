"""
Expression grammar.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-')* power
    power  := atom ('^' integer)?
    atom   := integer | 'd' '(' 'phi' ';' var ('^' integer)? ... ')' | 'phi' | name | '(' expr ')'

Multiplication is always explicit except between the variables listed inside
``d(...)``. ``phi`` is reserved for the unknown field.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple, Union

import pyparsing as pp

from .algebra import COORDINATE, RHO, Polynomial, RationalFunction, Symbol, SymbolTable
from .errors import ExpressionSyntaxError, UnknownSymbol, UsageError
from .pade import RationalAnsatz
from .series import EulerEquation, EulerTerm, SpacetimeEquation, SpacetimeTerm

logger = logging.getLogger(__name__)

RESERVED = frozenset({"phi", "d"})


# Syntax tree

@dataclass(frozen=True)
class Number:
    value: int
    loc: int


@dataclass(frozen=True)
class Name:
    name: str
    loc: int


@dataclass(frozen=True)
class VarPower:
    name: str
    exp: int
    loc: int


@dataclass(frozen=True)
class FieldNode:
    """phi or one of its derivatives."""

    orders: Tuple[VarPower, ...]
    loc: int


@dataclass(frozen=True)
class Unary:
    negative: bool
    operand: object
    loc: int


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: object
    rhs: object
    loc: int


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int
    loc: int


def _fold(s, loc, toks):
    node = toks[0]
    for position in range(1, len(toks), 2):
        node = Binary(toks[position], node, toks[position + 1], loc)
    return node


def _unary(s, loc, toks):
    *signs, operand = toks
    if not signs:
        return operand
    return Unary(signs.count("-") % 2 == 1, operand, loc)


def _power(s, loc, toks):
    if len(toks) == 1:
        return toks[0]
    return Power(toks[0], int(toks[1]), loc)


@lru_cache(maxsize=1)
def _grammar() -> pp.ParserElement:
    integer = pp.Word(pp.nums)
    ident = pp.Word(pp.alphas + "_", pp.alphanums + "_")
    lpar, rpar = pp.Suppress("("), pp.Suppress(")")
    caret = pp.Suppress("^")

    expr = pp.Forward()

    var_power = ident + pp.Optional(caret + integer)
    var_power.set_parse_action(lambda s, loc, t: VarPower(t[0], int(t[1]) if len(t) > 1 else 1, loc))

    derivative = (
        pp.Suppress(pp.Keyword("d"))
        + lpar
        + pp.Suppress(pp.Keyword("phi"))
        + pp.Suppress(";")
        + pp.OneOrMore(var_power)
        + rpar
    )
    derivative.set_parse_action(lambda s, loc, t: FieldNode(tuple(t), loc))

    field = pp.Keyword("phi")
    field.set_parse_action(lambda s, loc, t: FieldNode((), loc))

    number = integer.copy()
    number.set_parse_action(lambda s, loc, t: Number(int(t[0]), loc))

    name = ident.copy()
    name.set_parse_action(lambda s, loc, t: Name(t[0], loc))

    atom = derivative | field | number | name | (lpar + expr + rpar)
    power = atom + pp.Optional(caret + integer)
    power.set_parse_action(_power)
    unary = pp.ZeroOrMore(pp.one_of("+ -")) + power
    unary.set_parse_action(_unary)
    term = unary + pp.ZeroOrMore(pp.one_of("* /") + unary)
    term.set_parse_action(_fold)
    expr <<= term + pp.ZeroOrMore(pp.one_of("+ -") + term)
    expr.set_parse_action(_fold)
    return expr


# Values

DerivativeSpec = Tuple[Tuple[Symbol, int], ...]
FieldKey = Tuple[DerivativeSpec, ...]


def _spec_key(spec: DerivativeSpec) -> tuple:
    return tuple((sym.index, exp) for sym, exp in spec)


def _key(specs) -> FieldKey:
    return tuple(sorted(specs, key=_spec_key))


class FieldExpr:
    """Polynomial in phi and its derivatives with rational-function coefficients."""

    def __init__(self, terms: Dict[FieldKey, RationalFunction]):
        self.terms = {key: coef for key, coef in terms.items() if not coef.is_zero()}

    @classmethod
    def constant(cls, value) -> "FieldExpr":
        return cls({(): RationalFunction(value) if not isinstance(value, RationalFunction) else value})

    def is_field_free(self) -> bool:
        return all(not key for key in self.terms)

    def value(self) -> RationalFunction:
        return self.terms.get((), RationalFunction())

    def __add__(self, other: "FieldExpr") -> "FieldExpr":
        out = dict(self.terms)
        for key, coef in other.terms.items():
            out[key] = out[key] + coef if key in out else coef
        return FieldExpr(out)

    def __neg__(self) -> "FieldExpr":
        return FieldExpr({key: -coef for key, coef in self.terms.items()})

    def __sub__(self, other: "FieldExpr") -> "FieldExpr":
        return self + (-other)

    def __mul__(self, other: "FieldExpr") -> "FieldExpr":
        out: Dict[FieldKey, RationalFunction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = _key(k1 + k2)
                product = c1 * c2
                out[key] = out[key] + product if key in out else product
        return FieldExpr(out)

    def divide(self, divisor: RationalFunction) -> "FieldExpr":
        return FieldExpr({key: coef / divisor for key, coef in self.terms.items()})

    def __pow__(self, exp: int) -> "FieldExpr":
        result = FieldExpr.constant(1)
        for _ in range(exp):
            result = result * self
        return result

    def to_spacetime(self, coordinates: Sequence[Symbol]) -> SpacetimeEquation:
        coordinates = tuple(coordinates)
        terms = []
        for key, coef in self.terms.items():
            factors = []
            for spec in key:
                table = dict(spec)
                if any(sym not in coordinates for sym in table):
                    raise UsageError("Spacetime equations differentiate by coordinates only")
                factors.append(tuple(table.get(x, 0) for x in coordinates))
            if any(s.kind in (COORDINATE, RHO) for s in coef.symbols()):
                raise UsageError(f"Equation coefficient {coef} depends on coordinates or rho variables")
            terms.append(SpacetimeTerm(coef, tuple(factors)))
        terms.sort(key=lambda t: (-sum(map(sum, t.factors)), -len(t.factors), t.factors))
        return SpacetimeEquation(tuple(terms), coordinates)

    def to_euler(self, rho_symbols: Sequence[Symbol]) -> EulerEquation:
        rhos = tuple(rho_symbols)
        terms = []
        for key, coef in self.terms.items():
            derivatives = []
            for spec in key:
                table = dict(spec)
                if any(sym not in rhos for sym in table):
                    raise UsageError("Equations in rho form differentiate by rho variables only")
                derivatives.append(tuple(table.get(r, 0) for r in rhos))
            for factor, _ in coef.den_factors:
                if any(s in rhos for s in factor.symbols()):
                    raise UsageError(f"Coefficient {coef} has rho variables in its denominator")
            for mono, rest in coef.num.coefficients_in(rhos).items():
                part = RationalFunction.from_factors(rest, dict(coef.den_factors))
                terms.append(EulerTerm(part, mono, tuple(derivatives)))
        return EulerEquation.build(terms, rhos)


Parsed = Union[Polynomial, RationalFunction, FieldExpr]


def _position(text: str, loc: int) -> Tuple[int, int]:
    return pp.lineno(loc, text), pp.col(loc, text)


def _evaluate(node, symtab: SymbolTable, text: str) -> FieldExpr:
    if isinstance(node, Number):
        return FieldExpr.constant(node.value)
    if isinstance(node, Name):
        if node.name in RESERVED:
            raise ExpressionSyntaxError(f"'{node.name}' is reserved", *_position(text, node.loc))
        symbol = symtab.get(node.name)
        if symbol is None:
            raise UnknownSymbol(node.name, *_position(text, node.loc))
        return FieldExpr.constant(Polynomial.symbol(symbol))
    if isinstance(node, FieldNode):
        spec: Dict[Symbol, int] = {}
        for var in node.orders:
            symbol = symtab.get(var.name)
            if symbol is None:
                raise UnknownSymbol(var.name, *_position(text, var.loc))
            if symbol.kind not in (COORDINATE, RHO):
                raise ExpressionSyntaxError(
                    f"Cannot differentiate by '{var.name}' ({symbol.kind})", *_position(text, var.loc)
                )
            spec[symbol] = spec.get(symbol, 0) + var.exp
        ordered = tuple(sorted(((s, e) for s, e in spec.items() if e), key=lambda item: item[0].index))
        return FieldExpr({(ordered,): RationalFunction(1)})
    if isinstance(node, Unary):
        value = _evaluate(node.operand, symtab, text)
        return -value if node.negative else value
    if isinstance(node, Power):
        return _evaluate(node.base, symtab, text) ** node.exponent
    if isinstance(node, Binary):
        lhs = _evaluate(node.lhs, symtab, text)
        rhs = _evaluate(node.rhs, symtab, text)
        if node.op == "+":
            return lhs + rhs
        if node.op == "-":
            return lhs - rhs
        if node.op == "*":
            return lhs * rhs
        if not rhs.is_field_free():
            raise ExpressionSyntaxError("Cannot divide by an expression in phi", *_position(text, node.loc))
        divisor = rhs.value()
        if divisor.is_zero():
            raise ExpressionSyntaxError("Division by zero", *_position(text, node.loc))
        return lhs.divide(divisor)
    raise TypeError(f"Unexpected syntax node {node!r}")


def parse_field_expression(text: str, symtab: SymbolTable) -> FieldExpr:
    """
    Parse ``text`` into a FieldExpr.

    Raises:
        ExpressionSyntaxError: on malformed input, with 1-based line and column
        UnknownSymbol: if a name was never declared
    """
    try:
        tree = _grammar().parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as error:
        raise ExpressionSyntaxError(f"Syntax error: {error.msg}", error.lineno, error.col) from None
    return _evaluate(tree, symtab, text)


def parse_expression(text: str, symtab: SymbolTable) -> Parsed:
    """Polynomial, RationalFunction, or FieldExpr when phi occurs."""
    value = parse_field_expression(text, symtab)
    if not value.is_field_free():
        return value
    result = value.value()
    return result.num if result.is_polynomial() else result


def parse_rational(text: str, symtab: SymbolTable) -> RationalFunction:
    value = parse_field_expression(text, symtab)
    if not value.is_field_free():
        raise UsageError(f"Expected an expression without phi: {text}")
    return value.value()


def parse_polynomial(text: str, symtab: SymbolTable) -> Polynomial:
    value = parse_rational(text, symtab)
    if not value.is_polynomial():
        raise UsageError(f"Expected a polynomial: {text}")
    return value.num


def parse_ansatz(text: str, symtab: SymbolTable, rho_symbols: Sequence[Symbol] = ()) -> RationalAnsatz:
    return RationalAnsatz.from_ratfun(parse_rational(text, symtab), rho_symbols)


def parse_spacetime_equation(text: str, symtab: SymbolTable, coordinates: Sequence[Symbol]) -> SpacetimeEquation:
    return parse_field_expression(text, symtab).to_spacetime(coordinates)


def parse_euler_equation(text: str, symtab: SymbolTable, rho_symbols: Sequence[Symbol]) -> EulerEquation:
    return parse_field_expression(text, symtab).to_euler(rho_symbols)


def parse_rule(text: str, symtab: SymbolTable) -> Tuple[Polynomial, Polynomial]:
    """``pattern -> replacement``."""
    if text.count("->") != 1:
        raise UsageError(f"Expected 'pattern -> replacement': {text}")
    left, right = text.split("->")
    return parse_polynomial(left, symtab), parse_polynomial(right, symtab)


def parse_list(text: str) -> List[str]:
    """Comma-separated items, blanks dropped."""
    return [item.strip() for item in text.split(",") if item.strip()]
