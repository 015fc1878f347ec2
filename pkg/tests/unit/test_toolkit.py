#!/usr/bin/env python3
"""
Test suite for the PadeToolkit facade.
"""

import unittest
from pathlib import Path

from padepde import PadeToolkit, Settings

CORPUS = Path(__file__).resolve().parents[2] / "corpus"

RICCATI = """\
[symbols]
parameters = a, c1
rho = rho

[equation]
rho = rho*d(phi; rho) - a*phi^2 - phi

[rules]
unit = a -> 1

[seeds]
candidates = 0

[frees]
rho = c1

[run]
L = 1
M = 1
ansatz = c1*rho/(1 - c1*rho)
"""


class TestPadeToolkit(unittest.TestCase):
    """Test cases for loading problems and running commands."""

    def setUp(self):
        """Set up a toolkit with default settings."""
        self.toolkit = PadeToolkit(Settings())

    def test_run_without_problem(self):
        """Test that commands need a loaded problem."""
        result = self.toolkit.expand()
        self.assertFalse(result["success"])
        self.assertIn("No problem loaded", result["error"])
        self.assertEqual(self.toolkit.get_history(), [])

    def test_load_file(self):
        result = self.toolkit.load(CORPUS / "one_wave_massshell.problem")
        self.assertEqual(result, {"success": True, "problem": "one-wave/massshell", "rho": ["rho1"]})

    def test_load_reports_errors(self):
        """Test that a broken problem comes back as an error result."""
        result = self.toolkit.load("[symbols]\nparameters = a\n", text=True)
        self.assertFalse(result["success"])
        self.assertIn("Invalid problem file", result["error"])

    def test_expand(self):
        self.toolkit.load(CORPUS / "one_wave_massshell.problem")
        result = self.toolkit.expand(order=3)
        self.assertTrue(result["success"])
        coefficients = result["report"]["series"]["coefficients"]
        self.assertEqual(coefficients["1"], "c1")
        self.assertIn("series[3] = ", result["text"])

    def test_verify_with_rule(self):
        """Test that the extra rule makes the fixed ansatz exact."""
        self.toolkit.load(RICCATI, text=True)
        plain = self.toolkit.verify()
        with_rule = self.toolkit.verify(rules=["unit"])
        self.assertTrue(plain["success"])
        self.assertFalse(plain["report"]["verdict"]["exact"])
        self.assertTrue(with_rule["report"]["verdict"]["exact"])
        self.assertIn("exact = true", with_rule["text"])

    def test_unknown_rule_is_an_error_result(self):
        self.toolkit.load(RICCATI, text=True)
        result = self.toolkit.verify(rules=["missing"])
        self.assertFalse(result["success"])
        self.assertEqual(result["kind"], "UsageError")

    def test_history(self):
        """Test history bookkeeping."""
        self.toolkit.load(RICCATI, text=True)
        self.toolkit.pade()
        self.toolkit.conditions()
        history = self.toolkit.get_history()
        self.assertEqual([entry["command"] for entry in history], ["pade", "conditions"])
        history.clear()
        self.assertEqual(len(self.toolkit.get_history()), 2)
        self.toolkit.clear_history()
        self.assertEqual(self.toolkit.get_history(), [])

    def test_list_scenarios(self):
        names = self.toolkit.list_scenarios()
        self.assertIn("one-wave/massshell/[1/1]", names)
        self.assertEqual(len(names), len(set(names)))


if __name__ == "__main__":
    unittest.main()
