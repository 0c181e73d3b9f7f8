"""Second-gradient elastic surfaces on a structured grid.

Configs are plain dicts in the RunConfig layout used by the ``nonsimple`` CLI.
"""

import json
import os

from ._nonsimple import (
    BisectionFailure,
    ConfigError,
    DegenerateMetric,
    Inapplicable,
    InfeasibleStart,
    MaterialParams,
    cone_integral,
    invert_cone_integral,
    kinematic_state,
    psi,
    psi_grad,
)
from . import _nonsimple

__all__ = [
    "BisectionFailure",
    "ConfigError",
    "DegenerateMetric",
    "Inapplicable",
    "InfeasibleStart",
    "MaterialParams",
    "check",
    "cone_integral",
    "invert_cone_integral",
    "kinematic_state",
    "psi",
    "psi_grad",
    "run",
    "solve",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def check(config, base_dir="", allow_noncoercive=False, seed=1):
    """Returns (exit_code, report) for the configured density."""
    code, report = _nonsimple.check(_text(config), os.fspath(base_dir), allow_noncoercive, seed)
    return code, json.loads(report)


def solve(config, base_dir=""):
    """Minimizes the configured scenario and returns the field and its reports."""
    out = _nonsimple.solve(_text(config), os.fspath(base_dir))
    out["eta"] = json.loads(out["eta"])
    return out


def run(config, out_dir, base_dir="", allow_noncoercive=False):
    """Same as ``nonsimple run``; returns (exit_code, log)."""
    return _nonsimple.run(_text(config), os.fspath(base_dir), os.fspath(out_dir),
                          allow_noncoercive)
