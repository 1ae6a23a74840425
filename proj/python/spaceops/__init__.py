"""Python bindings for the spaceops core."""

import json

from . import _core
from ._core import (
    SpaceopsError,
    TeleopSession,
    enumerate_actions,
    export_session,
    fixture_names,
    format_action,
    parse_action,
    prograde,
    propagate,
    render_fixture,
    score,
    split_sessions,
)

__all__ = [
    "SpaceopsError",
    "TeleopSession",
    "enumerate_actions",
    "export_session",
    "fixture_names",
    "format_action",
    "parse_action",
    "prograde",
    "propagate",
    "render_fixture",
    "run",
    "scenario_config",
    "score",
    "split_sessions",
]


def run(scenario, agent, episodes=1, seed=0, max_time=None, jobs=1):
    """Run episodes; returns the decoded EpisodeResult list."""
    return json.loads(_core.run_json(scenario, agent, episodes, seed, max_time, jobs))


def scenario_config(scenario):
    return json.loads(_core.scenario_config(scenario))
