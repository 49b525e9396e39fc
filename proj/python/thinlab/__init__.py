"""Thin-obstacle solver and free-boundary analysis.

Fields are numpy arrays of shape (m,) * n sampled on [-1, 1]^n, with the
thin plane at the middle index of the last axis.
"""

import json
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _thinlab
from ._thinlab import SCHEMA_VERSION, ThinlabError, read_field, write_field

__all__ = [
    "SCHEMA_VERSION",
    "ThinlabError",
    "classify",
    "exact",
    "frequency",
    "read_field",
    "selftest",
    "solve",
    "write_field",
]


def _config_text(config) -> str:
    if config is None:
        return ""
    if isinstance(config, Mapping):
        return "".join(f"{k} = {_value(v)}\n" for k, v in config.items())
    return str(config)


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _overrides(overrides: Optional[Mapping]) -> dict:
    return {k: _value(v) for k, v in (overrides or {}).items()}


def solve(config, overrides: Optional[Mapping] = None, include_thin: bool = False) -> Tuple[np.ndarray, dict]:
    """Solve the problem described by a config (text or mapping)."""
    field, report = _thinlab.solve(_config_text(config), _overrides(overrides), include_thin)
    return field, json.loads(report)


def exact(kind: str, n: int = 2, m: int = 129, nu: Sequence[float] = (), amplitude: float = 1.0,
          degree: int = 2) -> np.ndarray:
    return _thinlab.exact(kind, n, m, list(nu), amplitude, degree)


def frequency(field: np.ndarray, at: Sequence[float], config=None, overrides: Optional[Mapping] = None) -> dict:
    """Frequency estimate at a thin point; the report carries the profile."""
    return json.loads(_thinlab.frequency(field, list(at), _config_text(config), _overrides(overrides)))


def classify(field: np.ndarray, config=None, overrides: Optional[Mapping] = None) -> dict:
    return json.loads(_thinlab.classify(field, _config_text(config), _overrides(overrides)))


def selftest() -> dict:
    return json.loads(_thinlab.selftest())
