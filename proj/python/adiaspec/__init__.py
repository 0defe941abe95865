"""Adiabatic evolution, spectral flow and linear response on small spin lattices."""

import json

from ._adiaspec import (
    ConfigError,
    GapError,
    NumericalError,
    Path,
    dressing_defect,
    evolve_state,
    filter_map,
    filter_map_timedomain,
    flow_generator,
    kubo,
    kubo_time_integral,
    list_experiments,
    patch_projector,
)
from ._adiaspec import _run_json


def run_experiment(config, threads=1):
    """Run one experiment. `config` is a dict or a JSON string; returns a dict
    with columns, rows, summary, pass and the fully resolved config."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_run_json(text, threads))


__all__ = [
    "ConfigError",
    "GapError",
    "NumericalError",
    "Path",
    "dressing_defect",
    "evolve_state",
    "filter_map",
    "filter_map_timedomain",
    "flow_generator",
    "kubo",
    "kubo_time_integral",
    "list_experiments",
    "patch_projector",
    "run_experiment",
]
