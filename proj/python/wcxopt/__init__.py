"""Adaptive stochastic methods (AMSGrad family) for weakly convex problems."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import preset_json as _preset_json, verify as _verify

__version__ = "0.1.0"


def preset(name):
    """Preset run configuration as a dict."""
    return _json.loads(_preset_json(name))


def verify():
    """Run the property suite; returns the JSON report as a dict."""
    return _json.loads(_verify())
