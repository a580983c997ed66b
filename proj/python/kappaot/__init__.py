"""Numerical checks of transport-entropy inequalities for kappa-concave measures."""

import json

from ._kappaot import *  # noqa: F401,F403
from ._kappaot import __version__, run_suite as _run_suite


def run_suite(suite, seed=None, models=(), grid=4096, jobs=1):
    """Run a suite and return the parsed JSON report."""
    return json.loads(_run_suite(suite, seed, list(models), grid, jobs))
