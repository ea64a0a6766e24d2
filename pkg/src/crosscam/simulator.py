"""Synthetic multi-camera pedestrian worlds for desk-scale experiments.

Identities walk a camera graph under a ground-truth first-order Markov
model. Each identity owns a prototype feature vector; every emitted
observation is prototype + a fixed per-camera bias + fresh noise, then
part-normalized. Camera bias models the view-angle and pose shift between
cameras; without it, cross-camera matching is unrealistically easy.

Randomness discipline
---------------------
All randomness flows through numpy's PCG64 generator, seeded through
``numpy.random.SeedSequence``. Streams are derived from the configured
64-bit seed and fixed spawn keys:

    spawn_key (0, c)   bias vector of camera index c
    spawn_key (1, k)   everything drawn for identity index k
    spawn_key (2,)     identity train/test assignment (from the split seed)

Identity streams are independent of each other and of generation order, so
a world is a pure function of its config and replays byte-identically.
Within one identity the draw order is: prototype, visit count, start
camera, then per visit (walk step for visits after the first, observation
count, and per observation a noise vector followed by a time increment).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .embeddings import Observation, normalize_parts
from .errors import (
    DegenerateSplitError,
    InvalidConfigError,
    ParseError,
    ValidationError,
)
from .graph import CameraGraph, load_graph, read_graph
from .transition import Trajectory, Visit

DEFAULT_IDENTITIES = 128
DEFAULT_VISITS = (2, 5)
DEFAULT_OBS_PER_VISIT = (3, 10)
DEFAULT_PARTS = 6
DEFAULT_DIM = 16
DEFAULT_NOISE_SIGMA = 1.7
DEFAULT_BIAS_SIGMA = 0.8
DEFAULT_SKEW = 0.95

# Bounds (seconds) for the uniform draws that advance the clock.
OBS_GAP = (0.5, 3.0)
TRAVEL_GAP = (5.0, 60.0)
DAY_SECONDS = 86400.0

DEFAULT_GRAPH_TEXT = """\
# Default five-camera office topology: a corridor C1..C5 with a C2-C4 shortcut.
C1 C2
C2 C3
C3 C4
C4 C5
C2 C4
"""


def default_graph() -> CameraGraph:
    return load_graph(DEFAULT_GRAPH_TEXT)


def skewed_transitions(graph: CameraGraph,
                       skew: float = DEFAULT_SKEW) -> dict[str, dict[str, float]]:
    """Ground-truth rows favoring a main corridor, traveled both ways.

    Neighbors one registration index away count as corridor links and share
    ``skew`` of each row's mass; remaining neighbors (shortcuts) share the
    rest. Cameras with only one kind of neighbor spread the row uniformly.
    Heavy bidirectional corridor flow plus rarely-used shortcuts is the
    regime where the prior carries information; uniform rows would make it
    uninformative.
    """
    if not 0.0 < skew <= 1.0:
        raise InvalidConfigError(f"skew must be in (0, 1], got {skew}")
    rows: dict[str, dict[str, float]] = {}
    for cam in graph.cameras:
        neighbors = graph.neighbors(cam)
        if not neighbors:
            continue
        here = graph.index(cam)
        corridor = [n for n in neighbors if abs(graph.index(n) - here) == 1]
        shortcut = [n for n in neighbors if abs(graph.index(n) - here) != 1]
        row: dict[str, float] = {}
        if corridor and shortcut:
            for n in corridor:
                row[n] = skew / len(corridor)
            for n in shortcut:
                row[n] = (1.0 - skew) / len(shortcut)
        else:
            pool = corridor or shortcut
            for n in pool:
                row[n] = 1.0 / len(pool)
        rows[cam] = row
    return rows


def uniform_transitions(graph: CameraGraph) -> dict[str, dict[str, float]]:
    rows: dict[str, dict[str, float]] = {}
    for cam in graph.cameras:
        neighbors = graph.neighbors(cam)
        if neighbors:
            rows[cam] = {n: 1.0 / len(neighbors) for n in neighbors}
    return rows


@dataclass(frozen=True)
class SimConfig:
    seed: int
    graph: CameraGraph
    identities: int = DEFAULT_IDENTITIES
    transitions: Mapping[str, Mapping[str, float]] | None = None
    visits_min: int = DEFAULT_VISITS[0]
    visits_max: int = DEFAULT_VISITS[1]
    obs_min: int = DEFAULT_OBS_PER_VISIT[0]
    obs_max: int = DEFAULT_OBS_PER_VISIT[1]
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    bias_sigma: float = DEFAULT_BIAS_SIGMA
    parts: int = DEFAULT_PARTS
    dim: int = DEFAULT_DIM
    start_distribution: Mapping[str, float] | None = None
    days: int = 1

    def __post_init__(self):
        if self.transitions is None:
            object.__setattr__(self, "transitions",
                               skewed_transitions(self.graph))
        self.validate()

    def validate(self) -> None:
        if len(self.graph) == 0:
            raise InvalidConfigError("graph has no cameras")
        if self.identities < 1:
            raise InvalidConfigError("identities must be positive")
        if not (1 <= self.visits_min <= self.visits_max):
            raise InvalidConfigError(
                f"bad visit range [{self.visits_min}, {self.visits_max}]")
        if not (1 <= self.obs_min <= self.obs_max):
            raise InvalidConfigError(
                f"bad observations-per-visit range "
                f"[{self.obs_min}, {self.obs_max}]")
        if self.noise_sigma < 0 or self.bias_sigma < 0:
            raise InvalidConfigError("sigmas must be >= 0")
        if self.parts < 1 or self.dim < 1:
            raise InvalidConfigError("parts and dim must be positive")
        if self.days < 1:
            raise InvalidConfigError("days must be positive")
        for cam, row in self.transitions.items():
            neighbors = self.graph.neighbors(cam)
            if set(row) != set(neighbors):
                raise InvalidConfigError(
                    f"transition row of {cam!r} must cover exactly its "
                    f"neighbors {neighbors}")
            total = 0.0
            for n in neighbors:
                p = row[n]
                if p < 0:
                    raise InvalidConfigError(
                        f"negative transition probability {cam}->{n}")
                total += p
            if abs(total - 1.0) > 1e-9:
                raise InvalidConfigError(
                    f"transition row of {cam!r} sums to {total!r}, not 1")
        for cam in self.graph.cameras:
            if self.graph.neighbors(cam) and cam not in self.transitions:
                raise InvalidConfigError(
                    f"camera {cam!r} has neighbors but no transition row")
        if self.start_distribution is not None:
            unknown = set(self.start_distribution) - set(self.graph.cameras)
            if unknown:
                raise InvalidConfigError(
                    f"start distribution names unknown cameras {sorted(unknown)}")
            total = sum(self.start_distribution.values())
            if abs(total - 1.0) > 1e-9:
                raise InvalidConfigError(
                    f"start distribution sums to {total!r}, not 1")
            if any(p < 0 for p in self.start_distribution.values()):
                raise InvalidConfigError("negative start probability")
        if self.visits_min >= 2:
            for cam, p in self._start_items():
                if p > 0 and not self.graph.neighbors(cam):
                    raise InvalidConfigError(
                        f"start camera {cam!r} is isolated but walks need "
                        f"{self.visits_min} visits")

    def _start_items(self) -> list[tuple[str, float]]:
        if self.start_distribution is None:
            n = len(self.graph)
            return [(cam, 1.0 / n) for cam in self.graph.cameras]
        return [(cam, self.start_distribution.get(cam, 0.0))
                for cam in self.graph.cameras]


@dataclass(frozen=True)
class SimWorld:
    observations: tuple[Observation, ...]
    trajectories: tuple[Trajectory, ...]
    prototypes: Mapping[str, np.ndarray]
    config: SimConfig


def _identity_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1, index))))


def _pick(cum: np.ndarray, u: float) -> int:
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, len(cum) - 1)


def simulate(config: SimConfig) -> SimWorld:
    """Generate a world: a pure, replayable function of the config."""
    graph = config.graph
    cameras = graph.cameras
    dims = config.parts * config.dim

    bias: dict[str, np.ndarray] = {}
    for idx, cam in enumerate(cameras):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(config.seed, spawn_key=(0, idx))))
        bias[cam] = rng.normal(0.0, config.bias_sigma, dims)

    start = config._start_items()
    start_cum = np.cumsum([p for _, p in start])
    # Neighbor order within a row follows the graph's neighbor listing.
    rows: dict[str, tuple[list[str], np.ndarray]] = {}
    for cam in cameras:
        neighbors = graph.neighbors(cam)
        if neighbors:
            probs = [config.transitions[cam][n] for n in neighbors]
            rows[cam] = (neighbors, np.cumsum(probs))

    pad = max(4, len(str(config.identities - 1)))
    observations: list[Observation] = []
    trajectories: list[Trajectory] = []
    prototypes: dict[str, np.ndarray] = {}
    for k in range(config.identities):
        rng = _identity_rng(config.seed, k)
        pid = f"p{k:0{pad}d}"
        proto = rng.standard_normal(dims)
        prototypes[pid] = proto
        n_visits = int(rng.integers(config.visits_min, config.visits_max + 1))
        cam = cameras[_pick(start_cum, float(rng.random()))]
        t = float(rng.uniform(0.0, config.days * DAY_SECONDS))
        visits: list[Visit] = []
        for v in range(n_visits):
            if v > 0:
                neighbors, cum = rows[cam]
                cam = neighbors[_pick(cum, float(rng.random()))]
                t += float(rng.uniform(*TRAVEL_GAP))
            n_obs = int(rng.integers(config.obs_min, config.obs_max + 1))
            first_seen = t
            for o in range(n_obs):
                noise = rng.normal(0.0, config.noise_sigma, dims)
                raw = (proto + bias[cam] + noise).reshape(config.parts,
                                                          config.dim)
                embedding = normalize_parts(raw)
                observations.append(Observation(
                    obs_id=f"{pid}-v{v:02d}-o{o:02d}",
                    person_id=pid, camera=cam, timestamp=t,
                    embedding=embedding))
                last_seen = t
                t += float(rng.uniform(*OBS_GAP))
            visits.append(Visit(cam, first_seen, last_seen))
        trajectories.append(Trajectory(pid, tuple(visits)))
    return SimWorld(observations=tuple(observations),
                    trajectories=tuple(trajectories),
                    prototypes=prototypes, config=config)


def split_identities(world: SimWorld | Sequence[Observation], ratio: float,
                     seed: int) -> tuple[list[Observation], list[Observation]]:
    """Identity-disjoint train/test split.

    Each identity goes to the training side independently with probability
    ``ratio``; all of its observations follow. Raises when either side ends
    up empty.
    """
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    observations = (world.observations if isinstance(world, SimWorld)
                    else list(world))
    pids = sorted({obs.person_id for obs in observations
                   if obs.person_id is not None})
    if len(pids) < 2 or any(obs.person_id is None for obs in observations):
        raise ValidationError(
            "split needs at least two labeled identities")
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(2,))))
    draws = rng.random(len(pids))
    train_ids = {pid for pid, u in zip(pids, draws) if u < ratio}
    train = [o for o in observations if o.person_id in train_ids]
    test = [o for o in observations if o.person_id not in train_ids]
    if not train or not test:
        raise DegenerateSplitError(
            f"degenerate split: {len(train_ids)} of {len(pids)} identities "
            "landed in training")
    return train, test


@dataclass(frozen=True)
class ParsedSimConfig:
    config: SimConfig
    split_ratio: float | None = None
    split_seed: int | None = None


_INT_KEYS = {"seed", "identities", "visits_min", "visits_max", "obs_min",
             "obs_max", "parts", "dim", "days", "split_seed"}
_FLOAT_KEYS = {"noise_sigma", "bias_sigma", "skew", "split_ratio"}
_STR_KEYS = {"profile", "graph_file", "start"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def parse_sim_config(text: str, source: str | None = None,
                     base_dir: str | None = None) -> ParsedSimConfig:
    """Parse the flat key-value simulator config format.

    One ``key = value`` pair per line; ``#`` starts a comment. See the
    README for the documented keys. ``seed`` is required, everything else
    has defaults.
    """
    import os.path

    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}",
                             source=source, line=lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _ALL_KEYS:
            raise ParseError(f"unknown config key {key!r}",
                             source=source, line=lineno)
        if key in values:
            raise ParseError(f"duplicate config key {key!r}",
                             source=source, line=lineno)
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError:
            raise ParseError(f"bad value {value!r} for key {key!r}",
                             source=source, line=lineno) from None
    if "seed" not in values:
        raise ParseError("config must set 'seed'", source=source)

    graph_file = values.pop("graph_file", None)
    if graph_file is not None:
        path = str(graph_file)
        if base_dir is not None and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        graph = read_graph(path)
    else:
        graph = default_graph()

    profile = str(values.pop("profile", "skewed"))
    skew = float(values.pop("skew", DEFAULT_SKEW))
    if profile == "skewed":
        transitions = skewed_transitions(graph, skew)
    elif profile == "uniform":
        transitions = uniform_transitions(graph)
    else:
        raise ParseError(
            f"unknown profile {profile!r} (expected 'skewed' or 'uniform')",
            source=source)

    start = None
    if "start" in values:
        start = {}
        for item in str(values.pop("start")).split(","):
            cam, _, prob = item.partition(":")
            if not prob:
                raise ParseError(
                    f"bad start entry {item!r}, expected CAM:PROB",
                    source=source)
            try:
                start[cam.strip()] = float(prob)
            except ValueError:
                raise ParseError(f"bad start probability in {item!r}",
                                 source=source) from None

    split_ratio = values.pop("split_ratio", None)
    split_seed = values.pop("split_seed", None)
    seed = int(values.pop("seed"))
    if split_ratio is not None and split_seed is None:
        split_seed = seed
    if split_ratio is None and split_seed is not None:
        raise ParseError("split_seed given without split_ratio",
                         source=source)

    config = SimConfig(seed=seed, graph=graph, transitions=transitions,
                       start_distribution=start,
                       **{k: v for k, v in values.items()})  # type: ignore[arg-type]
    return ParsedSimConfig(
        config=config,
        split_ratio=None if split_ratio is None else float(split_ratio),
        split_seed=None if split_seed is None else int(split_seed))
