"""Numerical checks for parabolic complex Monge-Ampere flows on flat tori."""

import json as _json
from pathlib import Path as _Path

from . import _core
from ._core import MaflError, entropy_p, hessian_eigenvalues

__all__ = [
    "MaflError",
    "abp",
    "degiorgi",
    "entropy_p",
    "hessian_eigenvalues",
    "run_scenario",
    "scenario_hash",
]


def _text(scenario):
    if isinstance(scenario, (str, _Path)) and _Path(scenario).is_file():
        return _Path(scenario).read_text()
    if isinstance(scenario, dict):
        return _json.dumps(scenario)
    return str(scenario)


def scenario_hash(scenario):
    """SHA-256 of the canonical scenario; accepts a path, a dict or JSON text."""
    return _core.scenario_hash(_text(scenario))


def run_scenario(scenario, out_dir=None, resume=True):
    """Run a scenario and return the report as a dict."""
    return _json.loads(_core.run_scenario(_text(scenario), str(out_dir or ""), resume))


def degiorgi(s, phi, b0, delta0, r_max=None, E=None):
    s = [float(v) for v in s]
    if r_max is None:
        r_max = s[-1] - s[0] if s else 1.0
    return _json.loads(_core.degiorgi(s, [float(v) for v in phi], b0, delta0, r_max, E))


def abp(patch, c_dim=None):
    return _json.loads(_core.abp(_json.dumps(patch) if isinstance(patch, dict) else patch, c_dim))
