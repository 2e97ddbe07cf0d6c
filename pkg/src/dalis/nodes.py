"""Reference-node and blind-node protocol state machines.

Reference nodes beacon their position, transmit power and current
path-loss exponent (PLE) estimate, and refine that estimate from the beacons
of other references at known distances. The blind node turns averaged RSS
into distances using each sender's advertised PLE and trilaterates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import DegenerateAnchorsError
from .estimation import INF, MovingAverageWindow, aggregate_ple, estimate_distance, estimate_ple
from .geometry import Point2D, euclidean_distance, trilaterate_arrays
from .protocol import BeaconPacket

log = logging.getLogger(__name__)

BOOTSTRAP_PLE = 2.0  # free space, used until the first aggregate


@dataclass
class NeighborEntry:
    rss_window: MovingAverageWindow
    last_position: Point2D
    ple_pair: Optional[float] = None


class ReferenceNode:
    def __init__(self, node_id: int, position, tx_power: float, pl_d0: float, d0: float,
                 w_r: float, bootstrap_ple: float = BOOTSTRAP_PLE):
        self.node_id = node_id
        self.position = Point2D(*position)
        self.tx_power = tx_power
        self.pl_d0 = pl_d0
        self.d0 = d0
        self.w_r = w_r
        self.current_ple = bootstrap_ple
        self.neighbors: Dict[int, NeighborEntry] = {}

    def emit_beacon(self) -> BeaconPacket:
        return BeaconPacket(self.node_id, self.position, self.tx_power, self.current_ple)

    def on_beacon(self, packet: BeaconPacket, rss: float) -> None:
        if packet.node_id == self.node_id:
            log.warning("reference %d ignoring its own beacon", self.node_id)
            return
        entry = self.neighbors.get(packet.node_id)
        if entry is None:
            entry = NeighborEntry(MovingAverageWindow(self.w_r), packet.position)
            self.neighbors[packet.node_id] = entry
        entry.rss_window.push(rss)
        entry.last_position = packet.position
        if not entry.rss_window.full:
            return

        d = euclidean_distance(self.position, packet.position)
        if d <= self.d0:
            entry.ple_pair = None  # pair too close to carry PLE information
        else:
            tx = self.tx_power if packet.tx_power is None else packet.tx_power
            entry.ple_pair = estimate_ple(tx, self.pl_d0, self.d0, entry.rss_window.mean(), d)
        self._refresh_ple()

    def _refresh_ple(self) -> None:
        pairs = [e.ple_pair for e in self.neighbors.values() if e.ple_pair is not None]
        if not pairs:
            return
        n = aggregate_ple(pairs)
        # A non-positive aggregate can only come from extreme noise at short
        # range; advertising it would be a corrupt beacon, so keep the old one.
        if n > 0 and math.isfinite(n):
            self.current_ple = n


def reference_emit_beacon(state: ReferenceNode) -> BeaconPacket:
    return state.emit_beacon()


def reference_on_beacon(state: ReferenceNode, packet: BeaconPacket, rss: float) -> ReferenceNode:
    state.on_beacon(packet, rss)
    return state


@dataclass
class _RefTrack:
    rss_window: MovingAverageWindow
    distance_window: MovingAverageWindow
    last_beacon: BeaconPacket
    slot: int = -1  # row in the anchor arrays once a distance exists


class BlindNode:
    """Passive receiver that localizes itself from reference beacons.

    ``tx_power`` is used for beacons that do not carry one (decoded SSIDs).
    """

    def __init__(self, pl_d0: float, d0: float, w_r: float, w_d: float = 1, w_l: float = 1,
                 tx_power: Optional[float] = None):
        self.pl_d0 = pl_d0
        self.d0 = d0
        self.w_r = w_r
        self.w_d = w_d
        self.w_l = w_l
        self.tx_power = tx_power
        self.refs: Dict[int, _RefTrack] = {}
        self._loc_x = MovingAverageWindow(w_l)
        self._loc_y = MovingAverageWindow(w_l)
        self.current_estimate: Optional[Point2D] = None
        self.last_fix: Optional[Point2D] = None  # latest raw trilateration
        self._anchor_pos = np.zeros((8, 2))
        self._anchor_range = np.zeros(8)
        self._n_anchors = 0

    @property
    def n_anchors(self) -> int:
        return self._n_anchors

    def on_beacon(self, packet: BeaconPacket, rss: float) -> None:
        track = self.refs.get(packet.node_id)
        if track is None:
            track = _RefTrack(MovingAverageWindow(self.w_r), MovingAverageWindow(self.w_d), packet)
            self.refs[packet.node_id] = track
        track.rss_window.push(rss)
        track.last_beacon = packet
        if not track.rss_window.full:
            return

        tx = packet.tx_power if packet.tx_power is not None else self.tx_power
        if tx is None:
            raise ValueError(f"beacon from node {packet.node_id} has no transmit power")
        d_hat = estimate_distance(tx, self.pl_d0, self.d0, track.rss_window.mean(), packet.ple_estimate)
        track.distance_window.push(d_hat)
        self._set_anchor(track, packet.position, track.distance_window.mean())

        if self._n_anchors >= 3:
            m = self._n_anchors
            try:
                fix = trilaterate_arrays(self._anchor_pos[:m], self._anchor_range[:m])
            except DegenerateAnchorsError:
                return  # keep the previous estimate
            self.last_fix = fix
            self._loc_x.push(fix.x)
            self._loc_y.push(fix.y)
            self.current_estimate = Point2D(self._loc_x.mean(), self._loc_y.mean())

    def _set_anchor(self, track: _RefTrack, position, rng: float) -> None:
        if track.slot < 0:
            if self._n_anchors == len(self._anchor_range):
                self._anchor_pos = np.concatenate([self._anchor_pos, np.zeros_like(self._anchor_pos)])
                self._anchor_range = np.concatenate([self._anchor_range, np.zeros_like(self._anchor_range)])
            track.slot = self._n_anchors
            self._n_anchors += 1
        self._anchor_pos[track.slot] = position
        self._anchor_range[track.slot] = rng

    def current_location(self) -> Optional[Point2D]:
        return self.current_estimate


def blind_on_beacon(state: BlindNode, packet: BeaconPacket, rss: float) -> BlindNode:
    state.on_beacon(packet, rss)
    return state


def blind_current_location(state: BlindNode) -> Optional[Point2D]:
    return state.current_location()


class ReferenceArray:
    """Array-backed equivalent of a set of :class:`ReferenceNode` objects.

    Same protocol, vectorized over all ordered (receiver, sender) pairs so
    that deployments of ~100 references stay tractable. Beacons within one
    call to :meth:`deliver` are processed as simultaneous.
    """

    def __init__(self, node_ids: Sequence[int], tx_powers: Sequence[float], pl_d0: float,
                 d0: float, w_r: float, bootstrap_ple: float = BOOTSTRAP_PLE):
        self.node_ids = list(node_ids)
        n = len(self.node_ids)
        self.tx_power = np.asarray(tx_powers, dtype=float)
        self.pl_d0 = pl_d0
        self.d0 = d0
        self.w_r = w_r
        self.current_ple = np.full(n, float(bootstrap_ple))
        self.ple_pair = np.full((n, n), np.nan)  # [receiver, sender]
        self._count = np.zeros((n, n), dtype=np.int64)
        if w_r == INF:
            self._total = np.zeros((n, n))
            self._buf = None
        else:
            w = int(w_r)
            self._buf = np.zeros((n, n, w))
            self._head = np.zeros((n, n), dtype=np.int64)
            self._flat_base = np.arange(n * n, dtype=np.int64).reshape(n, n) * w
        self._offdiag = ~np.eye(n, dtype=bool)

    def deliver(self, positions: np.ndarray, rss: np.ndarray, received: np.ndarray,
                distances: Optional[np.ndarray] = None) -> None:
        """Process one round of beacons.

        ``rss[j, i]`` is what receiver ``j`` measured from sender ``i`` and
        ``received[j, i]`` says whether that beacon got through.
        """
        mask = received & self._offdiag
        if not mask.any():
            return
        if self._buf is None:
            self._total += np.where(mask, rss, 0.0)
            self._count += mask
            ready = mask
            means = self._total / np.maximum(self._count, 1)
        else:
            w = self._buf.shape[2]
            flat = (self._flat_base + self._head)[mask]
            self._buf.reshape(-1)[flat] = rss[mask]
            self._head[mask] = (self._head[mask] + 1) % w
            np.minimum(self._count + mask, w, out=self._count)
            ready = mask & (self._count >= w)
            if not ready.any():
                return
            means = self._buf.sum(axis=2) / w

        if distances is None:
            diff = positions[:, None, :] - positions[None, :, :]
            distances = np.hypot(diff[..., 0], diff[..., 1])
        ok = distances > self.d0
        with np.errstate(divide="ignore", invalid="ignore"):
            pair = (self.tx_power[None, :] - self.pl_d0 - means) / (10.0 * np.log10(distances / self.d0))
        pair = np.where(ok, pair, np.nan)
        self.ple_pair = np.where(ready, pair, self.ple_pair)

        valid = ~np.isnan(self.ple_pair)
        cnt = valid.sum(axis=1)
        agg = np.where(valid, self.ple_pair, 0.0).sum(axis=1) / np.maximum(cnt, 1)
        keep = ready.any(axis=1) & (cnt > 0) & (agg > 0) & np.isfinite(agg)
        self.current_ple = np.where(keep, agg, self.current_ple)
