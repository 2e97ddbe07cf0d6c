"""Beacon packets and their SSID text encoding.

SSID layout (at most 32 bytes)::

    D:<id>:<x>:<y>:<ple>

``id`` is 0-999, ``x``/``y`` are metres with two decimals and ``ple`` has
three decimals, e.g. ``D:4:12.50:3.25:2.410``. Transmit power is not carried;
in SSID mode it is deployment-wide configuration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import EncodingRangeError, MalformedBeaconError
from .geometry import Point2D

PREFIX = "D:"
MAX_SSID_BYTES = 32
MAX_NODE_ID = 999
MAX_COORD = 1000.0
MAX_PLE = 10.0

_SSID_RE = re.compile(r"D:(\d{1,3}):(-?\d{1,4}\.\d{2}):(-?\d{1,4}\.\d{2}):(\d{1,2}\.\d{3})")


@dataclass(frozen=True)
class BeaconPacket:
    node_id: int
    position: Point2D
    tx_power: Optional[float]
    ple_estimate: float

    def __post_init__(self):
        if self.node_id < 0:
            raise ValueError(f"node_id must be non-negative, got {self.node_id}")
        if not self.ple_estimate > 0:
            raise ValueError(f"ple_estimate must be positive, got {self.ple_estimate}")
        if not isinstance(self.position, Point2D):
            object.__setattr__(self, "position", Point2D(*self.position))


def _fixed(value: float, digits: int) -> str:
    s = f"{value:.{digits}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def encode_ssid(packet: BeaconPacket) -> str:
    x, y = packet.position
    if not 0 <= packet.node_id <= MAX_NODE_ID:
        raise EncodingRangeError(f"node_id {packet.node_id} does not fit in 3 digits")
    if not (abs(x) < MAX_COORD and abs(y) < MAX_COORD):
        raise EncodingRangeError(f"coordinates ({x}, {y}) outside +/-{MAX_COORD} m")
    if not 0 < packet.ple_estimate < MAX_PLE:
        raise EncodingRangeError(f"path-loss exponent {packet.ple_estimate} outside (0, {MAX_PLE})")
    ssid = f"{PREFIX}{packet.node_id}:{_fixed(x, 2)}:{_fixed(y, 2)}:{_fixed(packet.ple_estimate, 3)}"
    if len(ssid.encode("ascii")) > MAX_SSID_BYTES:  # unreachable for in-range input
        raise EncodingRangeError(f"SSID {ssid!r} exceeds {MAX_SSID_BYTES} bytes")
    return ssid


def decode_ssid(ssid: str, tx_power: Optional[float] = None) -> Optional[BeaconPacket]:
    """Parse a beacon SSID.

    Returns ``None`` for SSIDs that are not ours (no ``D:`` prefix) and raises
    :class:`MalformedBeaconError` for prefixed strings that do not parse.
    ``tx_power`` fills the field the SSID does not carry.
    """
    if not ssid.startswith(PREFIX):
        return None
    m = _SSID_RE.fullmatch(ssid)
    if m is None:
        raise MalformedBeaconError(f"malformed beacon SSID {ssid!r}")
    node_id = int(m.group(1))
    ple = float(m.group(4))
    if ple <= 0:
        raise MalformedBeaconError(f"non-positive path-loss exponent in {ssid!r}")
    return BeaconPacket(node_id, Point2D(float(m.group(2)), float(m.group(3))), tx_power, ple)
