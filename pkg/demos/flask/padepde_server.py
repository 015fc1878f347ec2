#!/usr/bin/env python3
"""
padepde REST server
Runs pipeline commands and the scenario corpus over HTTP.
"""

import logging
import os
import sys
from datetime import datetime
from pathlib import Path

from flask import Flask, jsonify, request
from flask_cors import CORS

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..", "src"))

from padepde import PadeToolkit, __version__, get_settings  # noqa: E402
from padepde.pipeline import COMMANDS  # noqa: E402

app = Flask(__name__)
CORS(app)  # Enable CORS for all routes

logger = logging.getLogger(__name__)


def _toolkit() -> PadeToolkit:
    return PadeToolkit(get_settings())


@app.route("/api/health", methods=["GET"])
def health_check():
    """Health check endpoint."""
    return jsonify({"status": "healthy", "version": __version__, "timestamp": datetime.now().isoformat()})


@app.route("/api/scenarios", methods=["GET"])
def list_scenarios():
    """Names of the corpus scenarios in catalog order."""
    return jsonify({"success": True, "scenarios": _toolkit().list_scenarios()})


@app.route("/api/run", methods=["POST"])
def run_command():
    """
    Run one command.

    Body: {"command": ..., "problem_text": ... | "problem": <corpus file name>,
           "L": n, "M": n, "order": n, "rules": [...]}
    """
    data = request.get_json(silent=True)
    if not data or data.get("command") not in COMMANDS:
        return jsonify({"success": False, "error": f"command must be one of {', '.join(COMMANDS)}"}), 400

    toolkit = _toolkit()
    if "problem_text" in data:
        loaded = toolkit.load(data["problem_text"], text=True)
    elif "problem" in data:
        name = Path(data["problem"]).name
        loaded = toolkit.load(Path(toolkit.settings.corpus_dir) / name)
    else:
        return jsonify({"success": False, "error": "problem_text or problem is required"}), 400
    if not loaded["success"]:
        return jsonify(loaded), 400

    try:
        result = toolkit.run(
            data["command"],
            order=data.get("order"),
            L=data.get("L"),
            M=data.get("M"),
            rules=data.get("rules"),
        )
    except Exception as e:
        logger.exception("run failed")
        return jsonify({"success": False, "error": str(e)}), 500
    return jsonify(result), (200 if result["success"] else 422)


@app.route("/api/corpus", methods=["POST"])
def run_corpus_endpoint():
    """Run the corpus; body may carry {"filter": "<glob>"}."""
    data = request.get_json(silent=True) or {}
    try:
        return jsonify(_toolkit().corpus(data.get("filter")))
    except Exception as e:
        return jsonify({"success": False, "error": str(e)}), 500


if __name__ == "__main__":
    logging.basicConfig(level=get_settings().log_level)
    print("🚀 Starting padepde server...")
    print("=" * 50)
    print("Available endpoints:")
    print("  GET  /api/health     - Health check")
    print("  GET  /api/scenarios  - Corpus scenario names")
    print("  POST /api/run        - Run expand / pade / conditions / verify")
    print("  POST /api/corpus     - Run the scenario corpus")
    print("=" * 50)
    print("Server will start on http://localhost:5001")
    print("=" * 50)

    app.run(debug=True, host="0.0.0.0", port=5001)
