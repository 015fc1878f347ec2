#!/usr/bin/env python3
"""
Tests for exact polynomial, rational-function and rewrite arithmetic.
"""

import random
import unittest
from fractions import Fraction

from padepde.algebra import (
    Monomial,
    Polynomial,
    RationalFunction,
    RewriteRule,
    RewriteSystem,
    SymbolTable,
    factorize,
    poly_arith,
    poly_divide_exact,
    ratfun_arith,
    rewrite_fixpoint,
)
from padepde.errors import (
    DivisionByZero,
    NonTerminating,
    NotDivisible,
    UnknownSymbol,
    UsageError,
    ZeroDivisor,
)


def random_polynomial(rng: random.Random, variables, terms: int = 4, degree: int = 3) -> Polynomial:
    poly = Polynomial()
    for _ in range(rng.randint(0, terms)):
        mono = Monomial({v: rng.randint(0, degree) for v in rng.sample(variables, rng.randint(0, len(variables)))})
        coef = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        poly = poly + Polynomial.monomial(mono, coef)
    return poly


class TestSymbols(unittest.TestCase):
    """Symbol table behaviour."""

    def setUp(self):
        self.table = SymbolTable()

    def test_symbols_are_interned(self):
        self.assertIs(self.table.parameter("m"), self.table.parameter("m"))

    def test_kind_clash_is_rejected(self):
        self.table.parameter("m")
        with self.assertRaises(UsageError):
            self.table.rho("m")

    def test_unknown_lookup_raises(self):
        with self.assertRaises(UnknownSymbol):
            self.table["nothing"]
        self.assertIsNone(self.table.get("nothing"))

    def test_extension_rules_follow_declarations(self):
        lam = self.table.parameter("lambda")
        self.table.extension("i", -1)
        self.table.extension("slam", lam)
        rs = self.table.extension_rules()
        self.assertEqual(len(rs), 2)
        self.assertEqual(rs.to_lines(), ["i^2 -> -1", "slam^2 -> lambda"])


class TestPolynomial(unittest.TestCase):
    """Canonical polynomial arithmetic."""

    def setUp(self):
        self.table = SymbolTable()
        self.x = Polynomial.symbol(self.table.parameter("x"))
        self.y = Polynomial.symbol(self.table.parameter("y"))

    def test_expansion_is_canonical(self):
        left = (self.x + self.y) ** 2
        right = self.x ** 2 + 2 * self.x * self.y + self.y ** 2
        self.assertEqual(left, right)
        self.assertEqual(left.to_string(), "x^2 + 2*x*y + y^2")

    def test_zero_prints_as_zero(self):
        self.assertEqual((self.x - self.x).to_string(), "0")
        self.assertTrue((self.x - self.x).is_zero())

    def test_rational_coefficients(self):
        poly = self.x.scale(Fraction(1, 8)) - 3
        self.assertEqual(poly.to_string(), "1/8*x - 3")

    def test_exact_division(self):
        quotient = poly_divide_exact(self.x ** 2 - self.y ** 2, self.x - self.y)
        self.assertEqual(quotient, self.x + self.y)

    def test_inexact_division_raises(self):
        with self.assertRaises(NotDivisible):
            (self.x ** 2 + self.y ** 2).divide_exact(self.x - self.y)
        self.assertIsNone((self.x ** 2 + 1).try_divide(self.x + 1))

    def test_division_by_zero_polynomial(self):
        with self.assertRaises(ZeroDivisor):
            self.x.divide_exact(Polynomial())
        with self.assertRaises(ZeroDivisionError):
            self.x.divide_exact(0)

    def test_derivative(self):
        poly = self.x ** 3 * self.y + self.x
        self.assertEqual(poly.diff(self.table["x"]), 3 * self.x ** 2 * self.y + 1)

    def test_coefficients_in(self):
        poly = self.x ** 2 * self.y + 2 * self.x ** 2 + self.y
        groups = poly.coefficients_in([self.table["x"]])
        self.assertEqual(groups[Monomial.of(self.table["x"], 2)], self.y + 2)
        self.assertEqual(groups[Monomial()], self.y)

    def test_primitive_part(self):
        content, part = (-4 * self.x + 6).primitive()
        self.assertEqual(content * part, -4 * self.x + 6)
        self.assertGreater(part.leading_term()[1], 0)

    def test_function_forms(self):
        self.assertEqual(poly_arith(self.x, self.y, "add"), self.x + self.y)
        self.assertEqual(poly_arith(self.x, self.y, "mul"), self.x * self.y)
        with self.assertRaises(ValueError):
            poly_arith(self.x, self.y, "%")

    def test_evaluate(self):
        poly = self.x ** 2 - 3 * self.y
        value = poly.evaluate({self.table["x"]: 2.0, self.table["y"]: 1j})
        self.assertAlmostEqual(value, 4 - 3j)

    def test_ring_axioms_randomized(self):
        rng = random.Random(11)
        variables = [self.table.parameter(name) for name in ("a", "b", "c")]
        for _ in range(200):
            p, q, r = (random_polynomial(rng, variables) for _ in range(3))
            self.assertEqual(p + q, q + p)
            self.assertEqual(p * q, q * p)
            self.assertEqual((p + q) + r, p + (q + r))
            self.assertEqual((p * q) * r, p * (q * r))
            self.assertEqual(p * (q + r), p * q + p * r)
            self.assertTrue((p - p).is_zero())
            if not q.is_zero():
                self.assertEqual((p * q).divide_exact(q), p)


class TestRationalFunction(unittest.TestCase):
    """Quotients with factored denominators."""

    def setUp(self):
        self.table = SymbolTable()
        self.x = Polynomial.symbol(self.table.parameter("x"))
        self.y = Polynomial.symbol(self.table.parameter("y"))

    def test_sum_over_common_denominator(self):
        total = RationalFunction(1, self.x - self.y) + RationalFunction(1, self.x + self.y)
        self.assertEqual(total, RationalFunction(2 * self.x, self.x ** 2 - self.y ** 2))

    def test_cancellation(self):
        value = RationalFunction(self.x ** 2 - self.y ** 2, self.x - self.y)
        self.assertTrue(value.is_polynomial())
        self.assertEqual(value.as_polynomial(), self.x + self.y)

    def test_division_by_zero(self):
        with self.assertRaises(DivisionByZero):
            RationalFunction(self.x) / RationalFunction()

    def test_derivative_quotient_rule(self):
        value = RationalFunction(1, self.x)
        self.assertEqual(value.diff(self.table["x"]), RationalFunction(-1, self.x ** 2))

    def test_function_form(self):
        self.assertEqual(ratfun_arith(self.x, self.y, "div"), RationalFunction(self.x, self.y))

    def test_factorize_uses_pool(self):
        content, factors = factorize(2 * (self.x + 1) * (self.y - 1), [self.x + 1])
        self.assertEqual(content, 2)
        self.assertEqual(factors[self.x + 1], 1)

    def test_field_axioms_randomized(self):
        rng = random.Random(5)
        variables = [self.table.parameter(name) for name in ("a", "b")]
        checked = 0
        while checked < 200:
            p, q, r = (random_polynomial(rng, variables, terms=3, degree=2) for _ in range(3))
            if q.is_zero() or r.is_zero():
                continue
            u, v = RationalFunction(p, q), RationalFunction(q, r)
            self.assertEqual(u + v, v + u)
            self.assertEqual(u * v, v * u)
            self.assertEqual((u + v) * v, u * v + v * v)
            self.assertEqual(u * v / v, u)
            checked += 1


class TestRewriteSystem(unittest.TestCase):
    """Monomial rewriting modulo extension and constraint rules."""

    def setUp(self):
        self.table = SymbolTable()
        self.lam = self.table.parameter("lambda")
        self.i = self.table.extension("i", -1)
        self.mu = self.table.extension("mu", 1)
        self.slam = self.table.extension("slam", self.lam)
        self.rs = self.table.extension_rules()
        self.I = Polynomial.symbol(self.i)
        self.S = Polynomial.symbol(self.slam)

    def test_imaginary_unit(self):
        self.assertEqual(self.rs.reduce((1 + self.I) ** 2), 2 * self.I)
        self.assertEqual(self.rs.reduce(self.I ** 4), Polynomial.constant(1))

    def test_square_root_of_lambda(self):
        self.assertEqual(self.rs.reduce(self.S ** 3), Polynomial.symbol(self.lam) * self.S)

    def test_rule_must_lower_degree(self):
        x = self.table.parameter("x")
        with self.assertRaises(UsageError):
            RewriteRule(Monomial.of(x), Polynomial.symbol(x) + 1)

    def test_reciprocal_extension_is_rationalized(self):
        value = self.rs.reduce_ratfun(RationalFunction(1, self.S))
        self.assertTrue(value.equals(RationalFunction(self.S, Polynomial.symbol(self.lam)), self.rs))
        self.assertEqual(value.den_factors[0][0], Polynomial.symbol(self.lam))

    def test_budget_is_enforced(self):
        tight = RewriteSystem(self.rs.rules, budget=1)
        with self.assertRaises(NonTerminating):
            tight.reduce(self.I ** 6)

    def test_fixpoint_function(self):
        self.assertEqual(rewrite_fixpoint(self.I ** 3, self.rs), -self.I)

    def test_idempotence_and_homomorphism_randomized(self):
        rng = random.Random(3)
        variables = [self.i, self.mu, self.slam, self.lam]
        for _ in range(200):
            p = random_polynomial(rng, variables, degree=4)
            q = random_polynomial(rng, variables, degree=4)
            rp, rq = self.rs.reduce(p), self.rs.reduce(q)
            self.assertEqual(self.rs.reduce(rp), rp)
            self.assertEqual(self.rs.reduce(p + q), rp + rq)
            self.assertEqual(self.rs.reduce(p * q), self.rs.reduce(rp * rq))

    def test_extensions_with_product_rule_are_confluent(self):
        params = {name: self.table.parameter(name) for name in ("k10", "k20", "k11", "k21", "m")}
        product = RewriteRule(
            Monomial({params["k10"]: 1, params["k20"]: 1}),
            Polynomial.symbol(params["k11"]) * Polynomial.symbol(params["k21"]) - Polynomial.symbol(params["m"]) ** 2,
            name="condN2",
        )
        self.assertTrue(self.rs.extend([product]).is_confluent())

    def test_mass_shell_and_product_rule_overlap(self):
        params = {name: self.table.parameter(name) for name in ("k10", "k20", "k11", "m")}
        shell = RewriteRule(
            Monomial.of(params["k10"], 2),
            Polynomial.symbol(params["k11"]) ** 2 - Polynomial.symbol(params["m"]) ** 2,
        )
        product = RewriteRule(Monomial({params["k10"]: 1, params["k20"]: 1}), -Polynomial.symbol(params["m"]) ** 2)
        self.assertFalse(RewriteSystem([shell, product]).is_confluent())


if __name__ == "__main__":
    unittest.main()
