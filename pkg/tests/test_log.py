from __future__ import annotations

import numpy as np

from wdce.lib import log
from wdce.lib.log.utils import EventFilter, msgspec_json_renderer, round_floats
from wdce.lib.serialization import from_json


def test_round_floats_trims_noise_and_unwraps_numpy() -> None:
    event = round_floats(None, "info", {"loss": 0.1 + 0.2, "acc": np.float64(0.25000000001), "step": np.int64(4)})
    assert event == {"loss": 0.3, "acc": 0.25, "step": 4}
    assert type(event["acc"]) is float
    assert type(event["step"]) is int


def test_round_floats_leaves_other_values() -> None:
    event = {"event": "epoch", "modality": "bone", "count": 3}
    assert round_floats(None, "info", dict(event)) == event


def test_event_filter_drops_keys() -> None:
    event = EventFilter(["color_message", "missing"])(None, "info", {"event": "x", "color_message": "y"})
    assert event == {"event": "x"}


def test_msgspec_renderer_sorts_keys() -> None:
    rendered = msgspec_json_renderer(None, "info", {"step": 2, "event": "step", "loss": np.float64(0.5)})
    assert rendered == b'{"event":"step","loss":0.5,"step":2}'
    assert from_json(rendered)["loss"] == 0.5


def test_configure_is_idempotent() -> None:
    log.configure()
    log.configure()
    logger = log.get_logger("wdce.test")
    logger.info("configured", value=1.0)
