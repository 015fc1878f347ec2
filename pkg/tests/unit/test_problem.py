#!/usr/bin/env python3
"""
Tests for problem files.
"""

import tempfile
import unittest
from pathlib import Path

from padepde.algebra import Polynomial
from padepde.errors import ProblemFileError, UsageError
from padepde.problem import load_problem, parse_problem, read_sections

CORPUS = Path(__file__).resolve().parents[2] / "corpus"

LINEAR = """\
# exponential growth in one rho variable
[problem]
name = linear

[symbols]
parameters = a, c1
rho = rho

[equation]
rho = rho*d(phi; rho) - a*phi

[rules]
unit = a -> 1

[seeds]
candidates = 0

[frees]
rho = c1

[run]
order = 4
L = 1
M = 0
rules = unit
"""


class TestReadSections(unittest.TestCase):
    """Section splitting."""

    def test_continuation_lines(self):
        sections, errors = read_sections("[equation]\nspacetime = d(phi; t^2)\n  + phi\n")
        self.assertEqual(errors, [])
        self.assertEqual(sections["equation"]["spacetime"], ("d(phi; t^2) + phi", 2))

    def test_comments_and_blank_lines(self):
        sections, errors = read_sections("# header\n\n[run]\nL = 2  # numerator\n")
        self.assertEqual(errors, [])
        self.assertEqual(sections["run"]["L"], ("2", 4))

    def test_structural_errors(self):
        _, errors = read_sections("stray\n[unknown]\n[run]\nL = 1\nL = 2\n")
        self.assertEqual([line for line, _ in errors], [1, 2, 5])


class TestParseProblem(unittest.TestCase):
    """Resolution of sections into a Problem."""

    def test_linear_problem(self):
        problem = parse_problem(LINEAR)
        self.assertEqual(problem.name, "linear")
        self.assertEqual([rho.name for rho in problem.rho_symbols], ["rho"])
        self.assertEqual(problem.order, 4)
        self.assertEqual((problem.L, problem.M), (1, 0))
        self.assertEqual(problem.run_rules, ["unit"])
        self.assertEqual(problem.frees, [((1,), problem.symtab["c1"])])
        self.assertEqual(problem.euler_equation().to_string(), "rho*d(phi; rho) - a*phi")

    def test_extra_rules(self):
        problem = parse_problem(LINEAR)
        self.assertEqual(problem.extra_rules(["unit"]).to_lines(), ["a -> 1"])
        with self.assertRaises(UsageError):
            problem.extra_rules(["missing"])

    def test_all_errors_are_reported(self):
        text = LINEAR.replace("order = 4", "order = four").replace("rules = unit", "rules = unit, missing")
        with self.assertRaises(ProblemFileError) as caught:
            parse_problem(text, "broken.problem")
        messages = [message for _, message in caught.exception.errors]
        self.assertTrue(any("order must be an integer" in message for message in messages))
        self.assertTrue(any("Unknown rule 'missing'" in message for message in messages))
        self.assertIn("broken.problem:", str(caught.exception))

    def test_unknown_symbol_in_equation(self):
        text = LINEAR.replace("- a*phi", "- b*phi")
        with self.assertRaises(ProblemFileError) as caught:
            parse_problem(text)
        self.assertEqual(caught.exception.errors[0][0], 10)

    def test_missing_rho(self):
        with self.assertRaises(ProblemFileError):
            parse_problem("[symbols]\nparameters = a\n[equation]\nrho = phi\n")

    def test_reserved_symbol_name(self):
        with self.assertRaises(ProblemFileError):
            parse_problem(LINEAR.replace("parameters = a, c1", "parameters = a, c1, phi"))

    def test_free_must_be_parameter(self):
        with self.assertRaises(ProblemFileError):
            parse_problem(LINEAR.replace("rho = c1\n", "rho = q\n"))

    def test_missing_file(self):
        with self.assertRaises(UsageError):
            load_problem(Path(tempfile.gettempdir()) / "does-not-exist.problem")


class TestCorpusProblems(unittest.TestCase):
    """The shipped lambda phi^4 problem files."""

    def test_all_corpus_files_load(self):
        for path in sorted(CORPUS.glob("*.problem")):
            with self.subTest(path=path.name):
                problem = load_problem(path)
                self.assertTrue(problem.euler_equation().is_euler_homogeneous())

    def test_two_wave_constraints_reduce_the_equation(self):
        problem = load_problem(CORPUS / "two_wave_massshell.problem")
        self.assertEqual(sorted(problem.constraints), ["massshell1", "massshell2"])
        self.assertEqual(sorted(problem.rules), ["condN2", "kleingordon"])
        self.assertEqual(problem.solve_for, [problem.symtab["k11"]])
        rs = problem.constraint_rules()
        k10 = Polynomial.symbol(problem.symtab["k10"])
        for term in problem.euler_equation().terms:
            self.assertEqual(rs.reduce(term.coef.num), term.coef.num)
        self.assertNotEqual(rs.reduce(k10 ** 2), k10 ** 2)

    def test_second_branch_seed_choice(self):
        problem = load_problem(CORPUS / "one_wave_secondbranch.problem")
        self.assertIsNotNone(problem.seed_choice)
        self.assertEqual(len(problem.seed_candidates), 2)
        self.assertEqual(problem.extension_rules().to_lines(), ["i^2 -> -1", "mu^2 -> 1", "slam^2 -> lambda"])


if __name__ == "__main__":
    unittest.main()
