"""Python access to the tiglab core. Configs and reports are plain dicts."""

import json

from . import _tiglab
from ._tiglab import ConfigError, TiglabError, auroc, average_precision, spearman, synthetic_events

__all__ = [
    "ConfigError",
    "TiglabError",
    "auroc",
    "average_precision",
    "efficiency",
    "normalize_config",
    "run",
    "spearman",
    "synthetic_events",
]


def normalize_config(config):
    return json.loads(_tiglab.normalize_config(json.dumps(config)))


def run(config, write_outputs=False):
    """Runs every configured seed and returns the report dict."""
    return json.loads(_tiglab.run(json.dumps(config), write_outputs))


def efficiency(config):
    return json.loads(_tiglab.efficiency(json.dumps(config)))
