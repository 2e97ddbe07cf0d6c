"""Lognormal shadowing with exponential path loss.

This is the ground truth the simulator uses to produce received signal
strength. Nodes never see a :class:`PathLossEnvironment`; they only know
``pl_d0`` and ``d0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometryError


@dataclass(frozen=True)
class PathLossEnvironment:
    pl_d0: float = 40.0  # dB at d0
    d0: float = 1.0  # m
    n_true: float = 3.0
    sigma: float = 4.0  # dB
    default_tx_power: float = 20.0  # dBm
    rx_sensitivity: float = -90.0  # dBm, -inf disables the filter

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"d0 must be positive, got {self.d0}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not self.n_true > 0:
            raise ValueError(f"n_true must be positive, got {self.n_true}")
        if not self.pl_d0 >= 0:
            raise ValueError(f"pl_d0 must be >= 0, got {self.pl_d0}")


def sample_shadowing(env: PathLossEnvironment, rng: np.random.Generator) -> float:
    """One zero-mean Gaussian shadowing draw in dB."""
    return env.sigma * float(rng.standard_normal())


def sample_shadowing_block(env: PathLossEnvironment, rng: np.random.Generator, size) -> np.ndarray:
    # Same stream as repeated sample_shadowing calls on the same generator.
    return env.sigma * rng.standard_normal(size)


def mean_rss(env: PathLossEnvironment, tx_power: float, distance: float) -> float:
    """Deterministic part of the received power (no shadowing)."""
    if not distance > 0:
        raise InvalidGeometryError(f"distance must be positive, got {distance}")
    d = max(distance, env.d0)
    return tx_power - env.pl_d0 - 10.0 * env.n_true * math.log10(d / env.d0)


def received_rss(env: PathLossEnvironment, tx_power: float, distance: float, shadowing: float) -> float:
    """RSS in dBm at ``distance`` metres; distances below d0 are clamped to d0."""
    return mean_rss(env, tx_power, distance) + shadowing


def received_rss_array(env: PathLossEnvironment, tx_power, distance, shadowing) -> np.ndarray:
    """Vectorized :func:`received_rss`. Non-positive distances raise."""
    distance = np.asarray(distance, dtype=float)
    if np.any(~(distance > 0)):
        raise InvalidGeometryError("distance must be positive (co-located nodes)")
    d = np.maximum(distance, env.d0)
    return tx_power - env.pl_d0 - 10.0 * env.n_true * np.log10(d / env.d0) + shadowing


def is_received(env: PathLossEnvironment, rss: float) -> bool:
    return rss >= env.rx_sensitivity
