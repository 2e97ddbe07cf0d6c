"""Distributed, calibration-free RSS location identification (DALIS).

Library, deterministic simulator and command-line front end.
"""

from .channel import PathLossEnvironment, is_received, received_rss, sample_shadowing
from .estimation import MovingAverageWindow, aggregate_ple, estimate_distance, estimate_ple, window_push_and_mean
from .geometry import Point2D, RangeAnchor, centroid, euclidean_distance, localization_error, trilaterate
from .mobility import Area, MobilityParams, MobilityState, init_mobility, mobility_step
from .nodes import (BlindNode, ReferenceArray, ReferenceNode, blind_current_location, blind_on_beacon,
                    reference_emit_beacon, reference_on_beacon)
from .protocol import BeaconPacket, decode_ssid, encode_ssid
from .sim import (BlindSpec, LocalizationTrace, ReferenceSpec, ScenarioConfig, ScenarioStats, generate_grid,
                  run_scenario, run_trial)

__version__ = "0.1.0"
