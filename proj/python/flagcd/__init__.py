"""Kernels, invariants and matrix models for flag-structured Cowen-Douglas operators."""

import json as _json

from ._flagcd import *  # noqa: F401,F403
from ._flagcd import __version__, run_job_json


def run_job(config_text):
    """Run a JSON job config and return the report as a dict."""
    return _json.loads(run_job_json(config_text))
