#!/usr/bin/env python3
"""
Tests for the rho-variable transform, seed roots and Taylor solving.
"""

import random
import unittest
from fractions import Fraction
from pathlib import Path

from padepde.algebra import Monomial, Polynomial, RationalFunction, SymbolTable
from padepde.errors import NoCandidates, Obstruction, UnsupportedAnsatz, UsageError
from padepde.parser import parse_rational
from padepde.problem import load_problem
from padepde.series import (
    AnsatzDefinition,
    EulerEquation,
    EulerTerm,
    SeedRoot,
    SpacetimeEquation,
    SpacetimeTerm,
    indices_of_degree,
    seed_roots,
    series_residual,
    solve_series,
    transform,
)

CORPUS = Path(__file__).resolve().parents[2] / "corpus"


def ode(rho, terms):
    """Build a one-variable Euler equation from (coef, rho power, derivative orders)."""
    return EulerEquation.build(
        [
            EulerTerm(RationalFunction(coef), Monomial.of(rho, power), tuple((b,) for b in orders))
            for coef, power, orders in terms
        ],
        (rho,),
    )


class TestTransform(unittest.TestCase):
    """Chain rule into exponential-wave variables."""

    def setUp(self):
        self.table = SymbolTable()
        self.k = self.table.parameter("k")
        self.rho = self.table.rho("rho")
        self.x = self.table.coordinate("x")
        K = Polynomial.symbol(self.k)
        self.ansatz = AnsatzDefinition.exponential((self.rho,), (self.x,), [[K]])

    def test_second_derivative(self):
        eq = SpacetimeEquation(
            (SpacetimeTerm(RationalFunction(1), ((2,),)), SpacetimeTerm(RationalFunction(-1), ((0,),))),
            (self.x,),
        )
        result = transform(eq, self.ansatz)
        self.assertEqual(result.to_string(), "k^2*rho^2*d(phi; rho^2) + k^2*rho*d(phi; rho) - phi")
        self.assertTrue(result.is_euler_homogeneous())

    def test_rates(self):
        self.assertEqual(self.ansatz.rates(0), [Polynomial.symbol(self.k)])

    def test_non_exponential_ansatz_has_no_rates(self):
        ansatz = AnsatzDefinition((self.rho,), (self.x,), {(0, 0): Polynomial.symbol(self.rho) ** 2})
        with self.assertRaises(UnsupportedAnsatz):
            ansatz.rates(0)

    def test_dimension_mismatch(self):
        t = self.table.coordinate("t")
        eq = SpacetimeEquation((SpacetimeTerm(RationalFunction(1), ((1, 0),)),), (t, self.x))
        with self.assertRaises(UnsupportedAnsatz):
            transform(eq, self.ansatz)

    def test_empty_equation_rejected(self):
        with self.assertRaises(UsageError):
            SpacetimeEquation((), (self.x,))


class TestSeeds(unittest.TestCase):
    """Constant solutions."""

    def setUp(self):
        self.table = SymbolTable()
        self.rho = self.table.rho("rho")

    def test_candidates_are_verified(self):
        eq = ode(self.rho, [(1, 0, (0, 0)), (-1, 0, (0,))])
        roots = seed_roots(eq, [1, 2])
        self.assertEqual([root.value for root in roots], [RationalFunction(1), RationalFunction(0)])

    def test_duplicates_collapse(self):
        eq = ode(self.rho, [(1, 0, (0, 0)), (-1, 0, (0,))])
        self.assertEqual(len(seed_roots(eq, [0, 1, 1])), 2)

    def test_no_candidates(self):
        eq = ode(self.rho, [(1, 0, (0,)), (-1, 0, ())])
        with self.assertRaises(NoCandidates):
            seed_roots(eq, [])


class TestSolveSeries(unittest.TestCase):
    """Degree-by-degree Taylor coefficients."""

    def setUp(self):
        self.table = SymbolTable()
        self.rho = self.table.rho("rho")
        self.c1 = self.table.parameter("c1")
        self.zero = SeedRoot(RationalFunction())

    def test_exponential_solution(self):
        # rho*phi' - phi = 0 has phi = c1*rho
        eq = ode(self.rho, [(1, 1, (1,)), (-1, 0, (0,))])
        series = solve_series(eq, self.zero, [((1,), self.c1)], 5)
        self.assertEqual(series.indices(), [(1,)])
        self.assertEqual(series.coefficient((1,)), RationalFunction(Polynomial.symbol(self.c1)))
        self.assertTrue(series.coefficient((4,)).is_zero())
        with self.assertRaises(ValueError):
            series.coefficient((6,))

    def test_obstruction(self):
        # linear part (J-1)(J-2) vanishes at J=2 while c1^2 does not
        eq = ode(self.rho, [(1, 2, (2,)), (-2, 1, (1,)), (2, 0, (0,)), (1, 0, (0, 0))])
        with self.assertRaises(Obstruction) as caught:
            solve_series(eq, self.zero, [((1,), self.c1)], 3)
        self.assertEqual(caught.exception.index, (2,))

    def test_forced_free_coefficient(self):
        eq = ode(self.rho, [(1, 1, (1,)), (-2, 0, (0,))])
        with self.assertRaises(Obstruction):
            solve_series(eq, self.zero, [((1,), self.c1)], 2)

    def test_invalid_free_index(self):
        eq = ode(self.rho, [(1, 1, (1,)), (-1, 0, (0,))])
        with self.assertRaises(UsageError):
            solve_series(eq, self.zero, [((0,), self.c1)], 2)

    def test_non_homogeneous_equation_rejected(self):
        eq = ode(self.rho, [(1, 0, (1,)), (-1, 0, (0,))])
        with self.assertRaises(UnsupportedAnsatz):
            solve_series(eq, self.zero, [], 2)

    def test_random_equations_leave_no_residual(self):
        rng = random.Random(2024)
        for _ in range(200):
            # a*J(J-1) + b*J + c with b + c = 0 keeps c1 free and J >= 2 solvable
            a = Fraction(rng.randint(1, 5), rng.randint(1, 3))
            b = Fraction(rng.randint(1, 5), rng.randint(1, 3))
            quadratic = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            cubic = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            eq = ode(
                self.rho,
                [(a, 2, (2,)), (b, 1, (1,)), (-b, 0, (0,)), (quadratic, 0, (0, 0)), (cubic, 0, (0, 0, 0))],
            )
            order = rng.randint(2, 6)
            series = solve_series(eq, self.zero, [((1,), self.c1)], order)
            self.assertEqual(series_residual(eq, series), {})


class TestPlaneWaveSeries(unittest.TestCase):
    """Series of the single-wave lambda phi^4 problem."""

    @classmethod
    def setUpClass(cls):
        cls.problem = load_problem(CORPUS / "one_wave_massshell.problem")
        cls.rs = cls.problem.extension_rules()
        cls.equation = cls.problem.euler_equation()
        cls.seed = seed_roots(cls.equation, cls.problem.seed_candidates, cls.rs)[0]
        cls.series = solve_series(cls.equation, cls.seed, cls.problem.frees, 7, cls.rs)

    def expect(self, index, text):
        value = parse_rational(text, self.problem.symtab)
        self.assertTrue(self.series.coefficient(index).equals(value, self.rs), self.series.coefficient(index))

    def test_odd_coefficients(self):
        self.expect((1,), "c1")
        self.expect((3,), "c1^3*lambda/(8*m^2)")
        self.expect((5,), "c1^5*lambda^2/(64*m^4)")
        self.expect((7,), "c1^7*lambda^3/(512*m^6)")

    def test_even_coefficients_vanish(self):
        for j in (2, 4, 6):
            self.assertTrue(self.series.coefficient((j,)).is_zero())

    def test_residual_is_zero(self):
        self.assertEqual(series_residual(self.equation, self.series, self.rs), {})

    def test_graded_order(self):
        self.assertEqual(indices_of_degree(2, 2), [(2, 0), (1, 1), (0, 2)])


if __name__ == "__main__":
    unittest.main()
