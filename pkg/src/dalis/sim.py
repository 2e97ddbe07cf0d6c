"""Deterministic fixed-step simulation of a DALIS deployment.

One tick is one beacon interval. On every tick all mobile nodes move, every
reference emits one beacon (a snapshot of its state at the start of the
tick), beacons are delivered in node-id order through the shadowing channel,
and one trace row is recorded.

Randomness is split into independent substreams keyed by role and node ids,
so adding a node does not perturb the draws of unrelated links.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import PathLossEnvironment, received_rss_array
from .errors import ConfigError, InvalidGeometryError
from .estimation import INF
from .geometry import Point2D
from .mobility import MODES, RWP, STATIONARY, Area, MobilityParams, init_mobility, mobility_step
from .nodes import BOOTSTRAP_PLE, BlindNode, ReferenceArray, ReferenceNode
from .protocol import BeaconPacket

# spawn-key roles
_KEY_REF_MOBILITY = 1
_KEY_BLIND_MOBILITY = 2
_KEY_REF_LINK = 3
_KEY_BLIND_LINK = 4

_SHADOW_CHUNK = 256  # ticks of shadowing drawn per link at a time


@dataclass(frozen=True)
class ReferenceSpec:
    node_id: int
    position: Point2D
    tx_power: float
    mobility: str = STATIONARY


@dataclass(frozen=True)
class BlindSpec:
    position: Point2D
    mobility: str = STATIONARY


@dataclass(frozen=True)
class ScenarioConfig:
    area: Area
    env: PathLossEnvironment
    references: Tuple[ReferenceSpec, ...]
    blind: BlindSpec
    w_r: float = 1
    w_d: float = 1
    w_l: float = 1
    ref_w_r: Optional[float] = None  # None: same as the blind's w_r
    mobility: MobilityParams = field(default_factory=MobilityParams)
    beacon_rate: float = 10.0
    duration: float = 60.0
    trials: int = 100
    base_seed: int = 0
    warmup: Optional[int] = None  # ticks after the first estimate; None: auto
    bootstrap_ple: float = BOOTSTRAP_PLE

    @property
    def reference_w_r(self) -> float:
        return self.w_r if self.ref_w_r is None else self.ref_w_r

    @property
    def tick(self) -> float:
        return 1.0 / self.beacon_rate

    @property
    def n_ticks(self) -> int:
        return int(math.floor(self.duration * self.beacon_rate + 1e-9))

    @property
    def warmup_ticks(self) -> int:
        if self.warmup is not None:
            return self.warmup
        # First full windows at both ends of every link, plus the one tick a
        # freshly computed PLE waits before it is beaconed.
        finite = [w for w in (self.w_r, self.reference_w_r) if w != INF]
        return int(max(finite)) + 1 if finite else 1

    def validate(self) -> None:
        if len(self.references) < 3:
            raise ConfigError(f"need at least 3 reference nodes, got {len(self.references)}")
        ids = [r.node_id for r in self.references]
        if len(set(ids)) != len(ids):
            raise ConfigError("reference node ids must be unique")
        if any(i < 0 for i in ids):
            raise ConfigError("reference node ids must be non-negative")
        if not self.beacon_rate > 0:
            raise ConfigError("beacon_rate must be positive")
        if not self.duration > 0 or self.n_ticks < 1:
            raise ConfigError("duration must cover at least one beacon interval")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be non-negative")
        if self.warmup is not None and self.warmup < 0:
            raise ConfigError("warmup must be >= 0")
        if not self.bootstrap_ple > 0:
            raise ConfigError("bootstrap_ple must be positive")
        for name in ("w_r", "w_d", "w_l"):
            _check_window(name, getattr(self, name))
        if self.ref_w_r is not None:
            _check_window("ref_w_r", self.ref_w_r)
        positions = [r.position for r in self.references] + [self.blind.position]
        for r in self.references:
            if r.mobility not in MODES:
                raise ConfigError(f"unknown mobility mode {r.mobility!r}")
        if self.blind.mobility not in MODES:
            raise ConfigError(f"unknown mobility mode {self.blind.mobility!r}")
        for p in positions:
            if not self.area.contains(p):
                raise ConfigError(f"position {tuple(p)} is outside the {self.area.width} x {self.area.height} area")
        if len(set(map(tuple, positions))) != len(positions):
            raise ConfigError("two nodes start at identical coordinates")


def _check_window(name, w):
    if w == INF:
        return
    if not (w >= 1 and int(w) == w):
        raise ConfigError(f"{name} must be a positive integer or inf, got {w}")


def generate_grid(area: Area, spacing: float) -> List[Point2D]:
    """Corner-anchored lattice of points ``spacing`` apart covering ``area``."""
    if not spacing > 0:
        raise ConfigError(f"grid spacing must be positive, got {spacing}")
    nx = int(math.floor(area.width / spacing + 1e-9)) + 1
    ny = int(math.floor(area.height / spacing + 1e-9)) + 1
    if nx * ny < 3:
        raise ConfigError(
            f"grid spacing {spacing} m on a {area.width} x {area.height} m area gives {nx * ny} nodes; need >= 3"
        )
    return [Point2D(i * spacing, j * spacing) for j in range(ny) for i in range(nx)]


def triangle_positions(area: Area) -> List[Point2D]:
    """Largest upward equilateral triangle centred in the area."""
    cx, cy = area.center
    r = min(area.height / 2.0, area.width / math.sqrt(3.0))
    out = []
    for deg in (90.0, 210.0, 330.0):
        a = math.radians(deg)
        out.append(Point2D(cx + r * math.cos(a), cy + r * math.sin(a)))
    return out


def square_positions(area: Area) -> List[Point2D]:
    """Three corners of the area, leaving the origin corner empty."""
    return [Point2D(area.width, 0.0), Point2D(area.width, area.height), Point2D(0.0, area.height)]


@dataclass
class LocalizationTrace:
    times: np.ndarray  # (T,)
    true_positions: np.ndarray  # (T, 2)
    estimates: np.ndarray  # (T, 2), NaN where no estimate yet
    errors: np.ndarray  # (T,), NaN where no estimate yet
    ples: np.ndarray  # (T, N) advertised PLE per reference at end of tick
    reference_ids: Tuple[int, ...]
    seed: int

    @property
    def first_estimate_tick(self) -> Optional[int]:
        idx = np.flatnonzero(~np.isnan(self.errors))
        return int(idx[0]) if len(idx) else None

    def scored_errors(self, warmup: int) -> np.ndarray:
        """Errors from ``warmup`` ticks after the first estimate onward."""
        f = self.first_estimate_tick
        if f is None:
            return np.empty(0)
        e = self.errors[f + warmup:]
        return e[~np.isnan(e)]


@dataclass
class ScenarioStats:
    mle: float
    error_percentiles: dict
    per_trial_mle: List[float]
    seeds: List[int]
    n_samples: int
    per_trial_percentiles: List[dict] = field(default_factory=list)
    per_trial_samples: List[int] = field(default_factory=list)


PERCENTILES = (50, 90, 95)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


class _Shadowing:
    """Per-link i.i.d. shadowing, pre-drawn in chunks of ticks."""

    def __init__(self, env: PathLossEnvironment, seed: int, ref_ids: Sequence[int]):
        self.env = env
        self.ref_ids = list(ref_ids)
        n = len(self.ref_ids)
        # gens[i][j]: sender i -> receiver j; column n is the blind node
        self._gens = []
        for i, tx in enumerate(self.ref_ids):
            row = [
                _stream(seed, _KEY_REF_LINK, tx, rx) if rx != tx else None
                for rx in self.ref_ids
            ]
            row.append(_stream(seed, _KEY_BLIND_LINK, tx))
            self._gens.append(row)
        self._block = np.zeros((n, n + 1, _SHADOW_CHUNK))
        self._pos = _SHADOW_CHUNK

    def next(self) -> np.ndarray:
        if self._pos == _SHADOW_CHUNK:
            for i, row in enumerate(self._gens):
                for j, g in enumerate(row):
                    if g is not None:
                        self._block[i, j] = g.standard_normal(_SHADOW_CHUNK)
            self._block *= self.env.sigma
            self._pos = 0
        out = self._block[:, :, self._pos]
        self._pos += 1
        return out


class _ObjectNetwork:
    """Reference nodes as individual :class:`ReferenceNode` state machines."""

    def __init__(self, config: ScenarioConfig):
        env = config.env
        self.nodes = [
            ReferenceNode(r.node_id, r.position, r.tx_power, env.pl_d0, env.d0,
                          config.reference_w_r, config.bootstrap_ple)
            for r in config.references
        ]

    @property
    def current_ple(self) -> np.ndarray:
        return np.array([n.current_ple for n in self.nodes])

    def deliver(self, positions, rss, received, packets) -> None:
        for node, p in zip(self.nodes, positions):
            node.position = Point2D(float(p[0]), float(p[1]))
        for i, pkt in enumerate(packets):
            for j, node in enumerate(self.nodes):
                if j != i and received[j, i]:
                    node.on_beacon(pkt, float(rss[j, i]))


class _ArrayNetwork:
    def __init__(self, config: ScenarioConfig):
        env = config.env
        self.array = ReferenceArray(
            [r.node_id for r in config.references], [r.tx_power for r in config.references],
            env.pl_d0, env.d0, config.reference_w_r, config.bootstrap_ple,
        )

    @property
    def current_ple(self) -> np.ndarray:
        return self.array.current_ple.copy()

    def deliver(self, positions, rss, received, packets) -> None:
        self.array.deliver(positions, rss, received)


ENGINES = {"array": _ArrayNetwork, "nodes": _ObjectNetwork}


def run_trial(config: ScenarioConfig, seed: int, engine: str = "array") -> LocalizationTrace:
    """Simulate one trial and return its per-tick trace."""
    config.validate()
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    env = config.env
    area = config.area
    refs = config.references
    n = len(refs)
    ids = [r.node_id for r in refs]
    dt = config.tick
    n_ticks = config.n_ticks

    ref_rngs = [_stream(seed, _KEY_REF_MOBILITY, r.node_id) for r in refs]
    ref_motion = [
        init_mobility(r.position, r.mobility, area, config.mobility, rng)
        for r, rng in zip(refs, ref_rngs)
    ]
    blind_rng = _stream(seed, _KEY_BLIND_MOBILITY)
    blind_motion = init_mobility(config.blind.position, config.blind.mobility, area, config.mobility, blind_rng)
    shadow = _Shadowing(env, seed, ids)
    network = ENGINES[engine](config)
    blind = BlindNode(env.pl_d0, env.d0, config.w_r, config.w_d, config.w_l)
    tx = np.array([r.tx_power for r in refs])
    sens = env.rx_sensitivity
    offdiag = ~np.eye(n, dtype=bool)

    times = np.empty(n_ticks)
    true_pos = np.empty((n_ticks, 2))
    est = np.full((n_ticks, 2), np.nan)
    err = np.full(n_ticks, np.nan)
    ples = np.empty((n_ticks, n))
    positions = np.array([m.position for m in ref_motion], dtype=float)

    for k in range(n_ticks):
        for m, rng in zip(ref_motion, ref_rngs):
            mobility_step(m, dt, area, config.mobility, rng)
        mobility_step(blind_motion, dt, area, config.mobility, blind_rng)
        positions = np.array([m.position for m in ref_motion], dtype=float)
        bpos = np.asarray(blind_motion.position, dtype=float)

        snapshot = network.current_ple
        packets = [
            BeaconPacket(ids[i], Point2D(positions[i, 0], positions[i, 1]), refs[i].tx_power, snapshot[i])
            for i in range(n)
        ]
        noise = shadow.next()

        diff = positions[:, None, :] - positions[None, :, :]
        dist_rr = np.hypot(diff[..., 0], diff[..., 1])  # [receiver, sender], symmetric
        if np.any(dist_rr[offdiag] <= 0):
            raise InvalidGeometryError("two reference nodes are at identical coordinates")
        dist_rr[~offdiag] = 1.0
        rss_rr = received_rss_array(env, tx[None, :], dist_rr, noise[:, :n].T)
        got_rr = (rss_rr >= sens) & offdiag
        network.deliver(positions, rss_rr, got_rr, packets)

        dist_b = np.hypot(*(positions - bpos).T)
        rss_b = received_rss_array(env, tx, dist_b, noise[:, n])
        for i in range(n):
            if rss_b[i] >= sens:
                blind.on_beacon(packets[i], float(rss_b[i]))

        times[k] = (k + 1) * dt
        true_pos[k] = bpos
        loc = blind.current_estimate
        if loc is not None:
            est[k] = loc
            err[k] = math.hypot(loc[0] - bpos[0], loc[1] - bpos[1])
        ples[k] = network.current_ple

    return LocalizationTrace(times, true_pos, est, err, ples, tuple(ids), seed)


def _trial_errors(args) -> np.ndarray:
    config, seed, engine = args
    trace = run_trial(config, seed, engine)
    return trace.scored_errors(config.warmup_ticks)


def _percentiles(errors: np.ndarray) -> dict:
    if len(errors) == 0:
        return {p: math.nan for p in PERCENTILES}
    vals = np.percentile(errors, PERCENTILES)
    return {p: float(v) for p, v in zip(PERCENTILES, vals)}


def run_scenario(config: ScenarioConfig, workers: int = 1, engine: str = "array") -> ScenarioStats:
    """Run ``config.trials`` trials with seeds ``base_seed + k`` and aggregate.

    The MLE is the mean scored error of each trial, averaged over trials.
    Percentiles pool the scored errors of all trials. ``workers > 1`` runs
    trials in separate processes with identical results.
    """
    config.validate()
    seeds = [config.base_seed + k for k in range(config.trials)]
    jobs = [(config, s, engine) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            per_trial = list(ex.map(_trial_errors, jobs))
    else:
        per_trial = [_trial_errors(j) for j in jobs]

    mles = [float(np.mean(e)) if len(e) else math.nan for e in per_trial]
    pooled = np.concatenate(per_trial) if per_trial else np.empty(0)
    valid = [m for m in mles if not math.isnan(m)]
    mle = float(np.mean(valid)) if valid else math.nan
    return ScenarioStats(
        mle=mle,
        error_percentiles=_percentiles(pooled),
        per_trial_mle=mles,
        seeds=seeds,
        n_samples=int(len(pooled)),
        per_trial_percentiles=[_percentiles(e) for e in per_trial],
        per_trial_samples=[int(len(e)) for e in per_trial],
    )
