"""Stationary nodes and a locality-constrained random-waypoint walk."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .geometry import Point2D

STATIONARY = "stationary"
RWP = "rwp"
MODES = (STATIONARY, RWP)

_PAUSE_EPS = 1e-9


@dataclass(frozen=True)
class Area:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"area must have positive size, got {self.width} x {self.height}")

    @property
    def center(self) -> Point2D:
        return Point2D(self.width / 2.0, self.height / 2.0)

    def contains(self, p, tol: float = 1e-9) -> bool:
        return -tol <= p[0] <= self.width + tol and -tol <= p[1] <= self.height + tol


@dataclass(frozen=True)
class MobilityParams:
    speed_range: Tuple[float, float] = (1.0, 3.0)  # m/s, mean 2
    pause_time: float = 0.0  # s
    locality_fraction: float = 0.10

    def __post_init__(self):
        lo, hi = self.speed_range
        if not 0 < lo <= hi:
            raise ValueError(f"speed_range must satisfy 0 < min <= max, got {self.speed_range}")
        if self.pause_time < 0:
            raise ValueError("pause_time must be >= 0")
        if not self.locality_fraction > 0:
            raise ValueError("locality_fraction must be positive")


@dataclass
class MobilityState:
    position: Point2D
    waypoint: Point2D
    speed: float
    pause_remaining: float = 0.0
    mode: str = STATIONARY


def draw_waypoint(position, area: Area, params: MobilityParams, rng: np.random.Generator) -> Point2D:
    """Uniform point in the square of half-width ``locality_fraction * max(w, h)``
    around ``position``, intersected with the area."""
    h = params.locality_fraction * max(area.width, area.height)
    x0, x1 = max(0.0, position[0] - h), min(area.width, position[0] + h)
    y0, y1 = max(0.0, position[1] - h), min(area.height, position[1] + h)
    return Point2D(float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))


def _new_leg(state: MobilityState, area, params, rng) -> None:
    state.waypoint = draw_waypoint(state.position, area, params, rng)
    state.speed = float(rng.uniform(*params.speed_range))


def init_mobility(position, mode: str, area: Area, params: MobilityParams,
                  rng: np.random.Generator) -> MobilityState:
    if mode not in MODES:
        raise ValueError(f"unknown mobility mode {mode!r}")
    p = Point2D(*position)
    state = MobilityState(position=p, waypoint=p, speed=0.0, mode=mode)
    if mode == RWP:
        _new_leg(state, area, params, rng)
    return state


def mobility_step(state: MobilityState, dt: float, area: Area, params: MobilityParams,
                  rng: np.random.Generator) -> MobilityState:
    """Advance ``state`` by ``dt`` seconds in place and return it.

    A step that reaches the waypoint stops exactly on it; any leftover time
    in that step is dropped.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if state.mode == STATIONARY:
        return state

    if state.pause_remaining > 0:
        state.pause_remaining -= dt
        if state.pause_remaining <= _PAUSE_EPS:
            state.pause_remaining = 0.0
            _new_leg(state, area, params, rng)
        return state

    px, py = state.position
    wx, wy = state.waypoint
    dist = math.hypot(wx - px, wy - py)
    travel = state.speed * dt
    if dist <= travel:
        state.position = state.waypoint
        if params.pause_time > 0:
            state.pause_remaining = params.pause_time
        else:
            _new_leg(state, area, params, rng)
    else:
        f = travel / dist
        state.position = Point2D(px + (wx - px) * f, py + (wy - py) * f)
    return state
