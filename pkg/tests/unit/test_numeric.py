#!/usr/bin/env python3
"""
Tests for the floating-point oracle.
"""

import unittest
from fractions import Fraction
from pathlib import Path
from unittest.mock import patch

import numpy as np

from padepde.algebra import Monomial, Polynomial, RewriteRule
from padepde.errors import NearPole, NoNumericSolution, UsageError
from padepde.numeric import (
    NumericAssignment,
    _extension_value,
    _newton,
    finite_difference_residual,
    numeric_residual,
    sampled_residuals,
    solved_symbols,
    spacetime_numerators,
)
from padepde.pade import RationalAnsatz
from padepde.parser import parse_ansatz, parse_polynomial
from padepde.problem import load_problem, parse_problem

CORPUS = Path(__file__).resolve().parents[2] / "corpus"

GROWTH = """\
[symbols]
parameters = a, c1
rho = rho

[equation]
rho = rho*d(phi; rho) - a*phi

[rules]
unit = a -> 1
"""


class TestSolvedSymbols(unittest.TestCase):
    """Choice of the unknowns behind each rule."""

    def setUp(self):
        self.problem = load_problem(CORPUS / "two_wave_massshell.problem")
        self.symtab = self.problem.symtab

    def test_first_unused_pattern_symbol(self):
        rules = [self.problem.constraints["massshell1"], self.problem.rules["condN2"]]
        chosen = solved_symbols(rules)
        self.assertEqual([s.name for s in chosen], ["k10", "k20"])

    def test_preferred_symbols_fill_gaps(self):
        rules = [self.problem.constraints["massshell1"], RewriteRule(Monomial.of(self.symtab["k10"]), 1, "again")]
        chosen = solved_symbols(rules, self.problem.solve_for)
        self.assertEqual([s.name for s in chosen], ["k10", "k11"])

    def test_no_symbol_left(self):
        rule = RewriteRule(Monomial({self.symtab["i"]: 1, self.symtab["k10"]: 1}), 1, "mixed")
        with self.assertRaises(UsageError):
            solved_symbols([rule, rule, rule])


class TestAssignment(unittest.TestCase):
    """Sampling of parameters and constraint solutions."""

    def setUp(self):
        self.problem = load_problem(CORPUS / "one_wave_massshell.problem")
        self.rules = list(self.problem.constraints.values())

    def test_constraints_hold_numerically(self):
        assign = NumericAssignment.sample(self.problem, np.random.default_rng(7), self.rules, points=5, seed=7)
        self.assertLessEqual(assign.rule_residual(self.rules), 1e-10)
        self.assertAlmostEqual(assign.values[self.problem.symtab["i"]], 1j)
        self.assertEqual(len(assign.points), 5)
        self.assertEqual(len(assign.points[0]), 4)
        self.assertEqual(assign.seed, 7)

    def test_same_seed_same_values(self):
        first = NumericAssignment.sample(self.problem, np.random.default_rng(3), self.rules)
        second = NumericAssignment.sample(self.problem, np.random.default_rng(3), self.rules)
        self.assertEqual(first.values, second.values)
        self.assertEqual(first.points, second.points)

    def test_newton_failure(self):
        m = self.problem.symtab["m"]
        with self.assertRaises(NoNumericSolution):
            _newton([Polynomial.constant(1)], [m], {}, np.random.default_rng(0))

    def test_extension_roots(self):
        """Test that only a unit square draws a random sign."""
        rng = np.random.default_rng(0)
        self.assertEqual(_extension_value(-1, rng), 1j)
        self.assertEqual(_extension_value(4, rng), 2)
        signs = {_extension_value(1, rng) for _ in range(32)}
        self.assertEqual(signs, {1, -1})


class TestResiduals(unittest.TestCase):
    """Scaled residuals of exact and inexact single-wave ansatze."""

    def setUp(self):
        self.problem = load_problem(CORPUS / "one_wave_massshell.problem")
        self.rules = list(self.problem.constraints.values())
        symtab, rhos = self.problem.symtab, self.problem.rho_symbols
        self.exact = parse_ansatz("8*c1*m^2*rho1/(8*m^2 - c1^2*lambda*rho1^2)", symtab, rhos)
        self.linear = parse_ansatz("c1*rho1", symtab, rhos)

    def test_exact_ansatz(self):
        residuals = sampled_residuals(self.exact, self.problem, self.rules, [1, 2, 3])
        self.assertEqual(len(residuals), 3)
        self.assertLessEqual(max(residuals), 1e-8)

    def test_inexact_ansatz(self):
        residuals = sampled_residuals(self.linear, self.problem, self.rules, [1, 2, 3])
        self.assertGreaterEqual(min(residuals), 1e-3)

    def test_finite_differences_agree_with_transform(self):
        assign = NumericAssignment.sample(self.problem, np.random.default_rng(11), self.rules, points=3)
        self.assertLessEqual(finite_difference_residual(self.linear, self.problem, assign), 1e-5)

    def test_chain_rule_derivatives(self):
        numerators = spacetime_numerators(self.linear, self.problem)
        symtab = self.problem.symtab
        self.assertEqual(numerators[(1, 0, 0, 0)], parse_polynomial("i*k10*c1*rho1", symtab))
        second = self.problem.extension_rules().reduce(numerators[(2, 0, 0, 0)])
        self.assertEqual(second, parse_polynomial("-k10^2*c1*rho1", symtab))

    def test_residual_does_not_use_transform(self):
        with patch("padepde.numeric.transform", side_effect=AssertionError("transform called")):
            residuals = sampled_residuals(self.exact, self.problem, self.rules, [4, 5])
        self.assertLessEqual(max(residuals), 1e-8)

    def test_rho_form_has_no_spacetime_derivatives(self):
        with self.assertRaises(UsageError):
            spacetime_numerators(self.linear, parse_problem(GROWTH))

    def test_near_pole(self):
        flat = RationalAnsatz(Polynomial.constant(1), Polynomial.constant(Fraction(1, 10**9)), self.problem.rho_symbols)
        assign = NumericAssignment.sample(self.problem, np.random.default_rng(1), self.rules, points=2)
        with self.assertRaises(NearPole):
            numeric_residual(flat, self.problem, assign)

    def test_rho_form_problem(self):
        problem = parse_problem(GROWTH)
        rules = [problem.rules["unit"]]
        ansatz = parse_ansatz("c1*rho", problem.symtab, problem.rho_symbols)
        assign = NumericAssignment.sample(problem, np.random.default_rng(5), rules, points=4)
        self.assertLessEqual(numeric_residual(ansatz, problem, assign), 1e-12)
        with self.assertRaises(UsageError):
            finite_difference_residual(ansatz, problem, assign)


if __name__ == "__main__":
    unittest.main()
