#!/usr/bin/env python3
"""
Tests for golden files and scenario bookkeeping.
"""

import shutil
import tempfile
import unittest
from pathlib import Path

from padepde.config import Settings
from padepde.errors import UsageError
from padepde.phi4corpus import SCENARIOS, CorpusResult, Scenario, ScenarioResult, read_golden, run_corpus, run_scenario

CORPUS = Path(__file__).resolve().parents[2] / "corpus"


class TestReadGolden(unittest.TestCase):
    """Golden file syntax."""

    def test_abbreviations_cascade(self):
        golden = read_golden("let X = a + b\nlet Y = X*c\nE[1] = Y - X\n")
        self.assertEqual(golden, {"E[1]": ("((a + b)*c) - (a + b)", 3)})

    def test_abbreviation_needs_word_boundary(self):
        golden = read_golden("let X = 2\nD = X*X1\n")
        self.assertEqual(golden["D"][0], "(2)*X1")

    def test_continuation_and_comments(self):
        golden = read_golden("# header\nansatz = a +\n    b  # tail\nexact = true\n")
        self.assertEqual(golden["ansatz"], ("a + b", 2))
        self.assertEqual(golden["exact"], ("true", 4))

    def test_malformed_lines(self):
        with self.assertRaises(UsageError):
            read_golden("exact\n")
        with self.assertRaises(UsageError):
            read_golden("D = 1\nD = 2\n")

    def test_shipped_goldens_parse(self):
        for scenario in SCENARIOS.values():
            with self.subTest(scenario=scenario.name):
                text = (CORPUS / "golden" / scenario.golden).read_text(encoding="utf-8")
                self.assertTrue(read_golden(text))


class TestScenarioResults(unittest.TestCase):
    """Rows, statuses and error capture."""

    def test_row_status(self):
        result = ScenarioResult("demo")
        result.check("series[1]", True)
        self.assertEqual(result.to_row()["status"], "PASS")
        result.check("exact", False, "true")
        row = result.to_row()
        self.assertEqual(row["status"], "FAIL")
        self.assertEqual(row["failed"], ["exact: true"])
        result.error = "UsageError: boom"
        self.assertEqual(result.to_row()["status"], "ERROR")

    def test_missing_golden_is_an_error_row(self):
        scenario = Scenario("broken", "one_wave_massshell.problem", "missing.txt", 1, 1)
        result = run_scenario(scenario, Settings())
        self.assertFalse(result.passed)
        self.assertIn("FileNotFoundError", result.error)

    def test_wrong_golden_fails(self):
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            (root / "golden").mkdir()
            shutil.copy(CORPUS / "one_wave_massshell.problem", root)
            (root / "golden" / "wrong.txt").write_text("ansatz = c1*rho1\nexact = true\n", encoding="utf-8")
            scenario = Scenario("wrong", "one_wave_massshell.problem", "wrong.txt", 1, 1)
            result = run_scenario(scenario, Settings(corpus_dir=root))
        row = result.to_row()
        self.assertEqual(row["status"], "FAIL")
        self.assertEqual(row["failed"], ["exact: false"])
        self.assertFalse(row["exact"])

    def test_no_match(self):
        result = run_corpus("no-such-scenario", Settings())
        self.assertEqual(result.rows, [])
        self.assertTrue(result.passed)

    def test_text_summary(self):
        rows = [ScenarioResult("a").to_row(), ScenarioResult("b", error="UsageError: x").to_row()]
        text = CorpusResult(rows, 5).to_text()
        self.assertIn("b: UsageError: x", text)
        self.assertIn("1/2 scenarios passed (seed 5)", text)
        self.assertEqual(CorpusResult(rows, 5).to_dict()["success"], False)


if __name__ == "__main__":
    unittest.main()
