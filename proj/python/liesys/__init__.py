"""Lie systems: closure, superposition rules, group and PDE solvers.

Expressions are strings in the liesys grammar; problems and reports are
plain dictionaries with the same layout as the CLI's JSON files.
"""

import json as _json

from ._core import (
    ExprParseError,
    SchemaError,
    __version__,
    catalog_names,
    closure,
    derivative,
    diagonal_prolongation,
    evaluate,
    integrate,
    lie_bracket,
    minimal_m,
    simplify,
)
from . import _core

__all__ = [
    "ExprParseError",
    "SchemaError",
    "__version__",
    "catalog_names",
    "closure",
    "derivative",
    "diagonal_prolongation",
    "evaluate",
    "example",
    "integrate",
    "lie_bracket",
    "minimal_m",
    "run",
    "run_all",
    "simplify",
]


def example(name):
    """The catalog entry `name` as a problem dictionary."""
    return _json.loads(_core.catalog_document(name))


def run(problem, task=None, **settings):
    """Runs one task (or every task listed in the problem) and returns the report.

    `problem` is a dictionary or a catalog name; settings are tol, tol_const,
    seed, t_span, complete, samples and k.
    """
    if isinstance(problem, str):
        problem = example(problem)
    return _json.loads(_core.run(_json.dumps(problem), task, **settings))


def run_all(seed=None):
    """Runs the whole catalog concurrently; returns the combined report."""
    return _json.loads(_core.run_catalog(seed))
