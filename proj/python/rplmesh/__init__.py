"""RPL downward-routing reliability simulator."""

import json as _json

from ._core import (
    SynthParams,
    Topology,
    etx_from_rssi,
    generate_synthetic,
    header_size,
    hop_success,
    load_trace,
    make_addresses,
    path_delivery,
    path_delivery_down,
    rank_etxn,
    rank_lr,
    rule_of_three,
    save_trace,
)
from ._core import replay_study_json as _replay_study_json
from ._core import run_config_file as _run_config_file
from ._core import run_config_text as _run_config_text

__all__ = [
    "SynthParams",
    "Topology",
    "etx_from_rssi",
    "generate_synthetic",
    "header_size",
    "hop_success",
    "load_trace",
    "make_addresses",
    "path_delivery",
    "path_delivery_down",
    "rank_etxn",
    "rank_lr",
    "replay_study",
    "rule_of_three",
    "run",
    "run_file",
    "save_trace",
]


def run(config_text, seed=None):
    """Run one scenario from config text; returns the report as a dict."""
    return _json.loads(_run_config_text(config_text, seed))


def run_file(config_path, seed=None):
    """Run one scenario from a config file; returns the report as a dict."""
    return _json.loads(_run_config_file(str(config_path), seed))


def replay_study(topology, metrics="etx,etxn:2,lr", retries=8, window_ms=60000):
    """Trace-replay metric study; returns one summary dict per metric."""
    return _json.loads(_replay_study_json(topology, metrics, retries, window_ms))
