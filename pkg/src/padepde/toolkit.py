"""
PadeToolkit - convenience facade over the padepde pipeline.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from .config import Settings, get_settings
from .errors import PadePDEError
from .phi4corpus import SCENARIOS, run_corpus
from .pipeline import run_pipeline
from .problem import Problem, load_problem, parse_problem

logger = logging.getLogger(__name__)


class PadeToolkit:
    """
    Load problems and run the pipeline stages with a run history.

    Every method returns a dictionary with ``success`` and either the report
    or an ``error`` message; nothing is raised for bad input or failed math.
    """

    def __init__(self, settings: Optional[Settings] = None):
        """
        Initialize the toolkit.

        Args:
            settings (Settings, optional): configuration (defaults to the environment)
        """
        self.settings = settings or get_settings()
        self.problem: Optional[Problem] = None
        self.history: List[Dict[str, Any]] = []

    def load(self, source: Union[str, Path], text: bool = False) -> Dict[str, Any]:
        """
        Load a problem from a file, or from problem text when ``text`` is true.

        Returns:
            Dict[str, Any]: success flag, problem name and rho variables
        """
        try:
            self.problem = parse_problem(str(source)) if text else load_problem(source)
        except PadePDEError as error:
            return {"success": False, "error": str(error)}
        return {
            "success": True,
            "problem": self.problem.name,
            "rho": [rho.name for rho in self.problem.rho_symbols],
        }

    def run(
        self,
        command: str,
        order: Optional[int] = None,
        L: Optional[int] = None,
        M: Optional[int] = None,
        rules: Optional[Sequence[str]] = None,
    ) -> Dict[str, Any]:
        """
        Run one pipeline command on the loaded problem.

        Args:
            command (str): expand, pade, conditions or verify
            order (int, optional): series truncation degree
            L (int, optional): numerator degree
            M (int, optional): denominator degree
            rules (Sequence[str], optional): extra rule names for verify

        Returns:
            Dict[str, Any]: ``success`` plus the structured report
        """
        if self.problem is None:
            return {"success": False, "error": "No problem loaded"}
        try:
            report = run_pipeline(self.problem, command, order=order, L=L, M=M, rules=rules, settings=self.settings)
            result = {"success": True, "report": report.model_dump(exclude_none=True), "text": report.to_text()}
        except PadePDEError as error:
            logger.warning(f"{command} failed: {error}")
            result = {"success": False, "error": str(error), "kind": type(error).__name__}
        self.history.append({"command": command, "problem": self.problem.name, **result})
        return result

    def expand(self, order: Optional[int] = None) -> Dict[str, Any]:
        return self.run("expand", order=order)

    def pade(self, L: Optional[int] = None, M: Optional[int] = None) -> Dict[str, Any]:
        return self.run("pade", L=L, M=M)

    def conditions(self, L: Optional[int] = None, M: Optional[int] = None) -> Dict[str, Any]:
        return self.run("conditions", L=L, M=M)

    def verify(
        self,
        L: Optional[int] = None,
        M: Optional[int] = None,
        rules: Optional[Sequence[str]] = None,
    ) -> Dict[str, Any]:
        return self.run("verify", L=L, M=M, rules=rules)

    def corpus(self, pattern: Optional[str] = None) -> Dict[str, Any]:
        """Run the scenario corpus (optionally filtered by a glob pattern)."""
        result = run_corpus(pattern, settings=self.settings).to_dict()
        self.history.append({"command": "corpus", "filter": pattern, "success": result["success"]})
        return result

    def list_scenarios(self) -> List[str]:
        return list(SCENARIOS)

    def clear_history(self):
        self.history = []

    def get_history(self) -> List[Dict[str, Any]]:
        return self.history.copy()
