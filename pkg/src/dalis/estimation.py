"""Windowed averaging and closed-form inversions of the path-loss model."""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable

from .errors import DegenerateGeometryError, InvalidParameterError, NoDataError

INF = math.inf


class MovingAverageWindow:
    """Sliding-window arithmetic mean over the last ``capacity`` samples.

    ``capacity=math.inf`` gives the cumulative mean of everything pushed.
    """

    def __init__(self, capacity: float):
        if capacity != INF and (capacity < 1 or int(capacity) != capacity):
            raise ValueError(f"window capacity must be a positive integer or inf, got {capacity}")
        self.capacity = capacity
        if capacity == INF:
            self._buf = None
            self._total = 0.0
            self._count = 0
        else:
            self._buf = deque(maxlen=int(capacity))

    def __len__(self):
        return self._count if self._buf is None else len(self._buf)

    @property
    def empty(self) -> bool:
        return len(self) == 0

    @property
    def full(self) -> bool:
        # An unbounded window counts as full as soon as it holds one sample.
        if self._buf is None:
            return self._count >= 1
        return len(self._buf) == self._buf.maxlen

    def push(self, sample: float) -> None:
        if self._buf is None:
            self._total += sample
            self._count += 1
        else:
            self._buf.append(sample)

    def mean(self) -> float:
        if self.empty:
            raise NoDataError("mean of an empty window")
        if self._buf is None:
            return self._total / self._count
        return sum(self._buf) / len(self._buf)

    def push_and_mean(self, sample: float) -> float:
        self.push(sample)
        return self.mean()

    def samples(self) -> list:
        if self._buf is None:
            raise TypeError("an unbounded window keeps only its running sum")
        return list(self._buf)


def window_push_and_mean(win: MovingAverageWindow, sample: float) -> float:
    return win.push_and_mean(sample)


def estimate_ple(tx_power: float, pl_d0: float, d0: float, avg_rss: float, distance: float) -> float:
    """Path-loss exponent implied by an averaged RSS at a known distance."""
    if not distance > d0:
        raise DegenerateGeometryError(
            f"distance {distance} m must exceed the reference distance {d0} m"
        )
    return (tx_power - pl_d0 - avg_rss) / (10.0 * math.log10(distance / d0))


def aggregate_ple(neighbor_ples: Iterable[float]) -> float:
    vals = list(neighbor_ples)
    if not vals:
        raise NoDataError("no neighbor path-loss estimates to aggregate")
    return sum(vals) / len(vals)


def estimate_distance(tx_power: float, pl_d0: float, d0: float, avg_rss: float, n_hat: float) -> float:
    """Distance implied by an averaged RSS and a path-loss exponent.

    Clamped below at ``d0``, where the model stops being valid.
    """
    if not n_hat > 0:
        raise InvalidParameterError(f"path-loss exponent must be positive, got {n_hat}")
    d = d0 * 10.0 ** ((tx_power - pl_d0 - avg_rss) / (10.0 * n_hat))
    return max(d, d0)
