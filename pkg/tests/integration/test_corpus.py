#!/usr/bin/env python3
"""
Integration tests running the lambda phi^4 scenario corpus end to end.
"""

import unittest

from padepde.config import Settings
from padepde.phi4corpus import SCENARIOS, run_corpus, run_scenario


class TestScenarioCorpus(unittest.TestCase):
    """Every shipped scenario must reproduce its golden values."""

    @classmethod
    def setUpClass(cls):
        cls.settings = Settings()

    def test_each_scenario_passes(self):
        for scenario in SCENARIOS.values():
            with self.subTest(scenario=scenario.name):
                row = run_scenario(scenario, self.settings).to_row()
                detail = row.get("error") or "; ".join(row["failed"])
                self.assertEqual(row["status"], "PASS", detail)
                self.assertGreater(row["checks"], 0)

    def test_exactness_column(self):
        """Test the exact/inexact split across the catalog."""
        result = run_corpus("*/massshell/*", self.settings)
        exact = {row["scenario"]: row["exact"] for row in result.rows}
        self.assertFalse(exact["one-wave/massshell/[1/1]"])
        self.assertTrue(exact["one-wave/massshell/[2/2]"])
        self.assertFalse(exact["two-wave/massshell/[1/1]"])
        self.assertTrue(exact["two-wave/massshell/[1/1]+kleingordon"])
        self.assertTrue(exact["two-wave/massshell/[2/2]+condN2"])

    def test_condition_counts(self):
        result = run_corpus("one-wave/massshell/[1/1]", self.settings)
        self.assertEqual(result.rows[0]["conditions"], 1)

    def test_second_branch_factor_table(self):
        """Test the full two-wave second-branch table of series and factors."""
        result = run_corpus("two-wave/secondbranch/?1?1?", self.settings)
        self.assertEqual(len(result.rows), 1)
        row = result.rows[0]
        self.assertEqual(row["failed"], [])
        self.assertEqual(row["status"], "PASS")
        self.assertGreaterEqual(row["checks"], 16)

    def test_filter_selects_in_catalog_order(self):
        result = run_corpus("one-wave/*", self.settings)
        names = [row["scenario"] for row in result.rows]
        self.assertEqual(names, [name for name in SCENARIOS if name.startswith("one-wave/")])
        self.assertEqual(len(names), 6)

    def test_table(self):
        result = run_corpus("two-wave/secondbranch/*", self.settings)
        table = result.table
        self.assertEqual(list(table["status"]), ["PASS", "PASS"])
        self.assertIn("2/2 scenarios passed", result.to_text())


if __name__ == "__main__":
    unittest.main()
