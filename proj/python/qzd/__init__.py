"""Zeno-dynamics adiabatic passage simulator.

Every entry point takes a TOML scenario as a string (the same format the
``qzd`` command reads) and returns plain Python data.
"""

import json

from . import _qzd
from ._qzd import ConfigError, SimulationError, __version__

__all__ = ["ConfigError", "SimulationError", "spec", "simulate", "protocol", "sweep", "zeno", "__version__"]


def spec(config="", preset=""):
    """Parsed scenario with all defaults filled in."""
    return json.loads(_qzd.spec_json(config, preset))


def simulate(config="", workers=1, preset=""):
    """Run the scenario. Returns (columns, samples array, summary dict)."""
    columns, data, summary = _qzd.simulate(config, workers, preset)
    return columns, data, json.loads(summary)


def protocol(config="", n=None, family=None, workers=1, preset=""):
    """Run a protocol with N atoms (n-atom) or N modes (high-dim)."""
    return json.loads(_qzd.protocol(config, n, family, workers, preset))


def sweep(config, workers=1, preset=""):
    """Loss sweep over the [sweep] grid."""
    return json.loads(_qzd.sweep(config, workers, preset))


def zeno(config="", preset=""):
    """Zeno spectrum, effective model and dark states."""
    return json.loads(_qzd.zeno(config, preset))
