"""Transition counting and the row-stochastic camera transition matrix.

Given labeled trajectories over a camera graph, the model counts consecutive
visit pairs i -> j for neighboring cameras and turns each camera's counts
into a probability row

    p(j | i) = (N(j|i) + alpha) / sum_k in neighbors(i) (N(k|i) + alpha)

so every defined row sums to one. ``alpha`` is optional additive smoothing,
zero by default. Transitions observed between non-adjacent cameras never
enter the matrix; they are kept as diagnostics.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

from .embeddings import Observation
from .errors import (
    DegenerateDataError,
    ParseError,
    UndefinedRowError,
    UnknownCameraError,
    ValidationError,
)
from .graph import CameraGraph


@dataclass(frozen=True)
class Visit:
    """A maximal run of consecutive observations on one camera."""

    camera: str
    first_seen: float
    last_seen: float

    def __post_init__(self):
        if self.last_seen < self.first_seen:
            raise ValidationError(
                f"visit on {self.camera!r} ends before it starts")


@dataclass(frozen=True)
class Trajectory:
    person_id: str
    visits: tuple[Visit, ...]

    def __post_init__(self):
        for prev, cur in zip(self.visits, self.visits[1:]):
            if prev.camera == cur.camera:
                raise ValidationError(
                    f"consecutive visits of {self.person_id!r} share camera "
                    f"{cur.camera!r}")
            if cur.first_seen < prev.last_seen:
                raise ValidationError(
                    f"visits of {self.person_id!r} are not time-ordered")

    @property
    def entry_camera(self) -> str:
        return self.visits[0].camera

    @property
    def exit_camera(self) -> str:
        return self.visits[-1].camera


def extract_trajectories(observations: Iterable[Observation]) -> list[Trajectory]:
    """Group observations by identity into camera-visit trajectories.

    Observations are ordered by (timestamp, obs_id), so the result does not
    depend on input order. Consecutive same-camera runs collapse into one
    visit. Output is sorted by person_id.
    """
    by_person: dict[str, list[Observation]] = {}
    for obs in observations:
        if obs.person_id is None:
            raise ValidationError(
                f"observation {obs.obs_id!r} has no person_id; trajectories "
                "need labeled data")
        by_person.setdefault(obs.person_id, []).append(obs)
    trajectories = []
    for pid in sorted(by_person):
        ordered = sorted(by_person[pid], key=lambda o: (o.timestamp, o.obs_id))
        visits: list[Visit] = []
        for obs in ordered:
            if visits and visits[-1].camera == obs.camera:
                visits[-1] = Visit(obs.camera, visits[-1].first_seen,
                                   obs.timestamp)
            else:
                visits.append(Visit(obs.camera, obs.timestamp, obs.timestamp))
        trajectories.append(Trajectory(pid, tuple(visits)))
    return trajectories


@dataclass(frozen=True)
class TransitionModel:
    """Counts and row-stochastic probabilities over graph-adjacent pairs.

    ``probs`` holds only defined rows; cameras listed in ``undefined`` have
    zero denominator (no observed departures and no smoothing mass, or no
    neighbors at all). ``non_adjacent`` records transitions that the graph
    does not permit, keyed by (from, to).
    """

    graph: CameraGraph
    counts: Mapping[str, Mapping[str, int]]
    probs: Mapping[str, Mapping[str, float]]
    smoothing: float | None
    undefined: tuple[str, ...]
    non_adjacent: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def prob(self, origin: str, dest: str) -> float:
        """p(dest | origin); 0.0 for registered but non-adjacent pairs."""
        self.graph.index(origin)
        self.graph.index(dest)
        if not self.graph.has_edge(origin, dest):
            return 0.0
        if origin in self.undefined:
            raise UndefinedRowError(
                f"transition row for camera {origin!r} is undefined "
                "(no observed departures; consider smoothing alpha > 0)")
        return self.probs[origin][dest]

    def row_defined(self, origin: str) -> bool:
        self.graph.index(origin)
        return origin not in self.undefined


def estimate(graph: CameraGraph, trajectories: Iterable[Trajectory],
             smoothing: float = 0.0) -> TransitionModel:
    """Estimate the first-order transition model from trajectories."""
    if smoothing < 0:
        raise ValidationError(f"smoothing must be >= 0, got {smoothing}")
    counts: dict[str, dict[str, int]] = {
        cam: {n: 0 for n in graph.neighbors(cam)} for cam in graph.cameras}
    non_adjacent: Counter[tuple[str, str]] = Counter()
    for traj in trajectories:
        for prev, cur in zip(traj.visits, traj.visits[1:]):
            i, j = prev.camera, cur.camera
            if i not in graph or j not in graph:
                missing = i if i not in graph else j
                raise UnknownCameraError(
                    f"trajectory of {traj.person_id!r} visits unregistered "
                    f"camera {missing!r}")
            if graph.has_edge(i, j):
                counts[i][j] += 1
            else:
                non_adjacent[(i, j)] += 1
    probs: dict[str, dict[str, float]] = {}
    undefined: list[str] = []
    for cam in graph.cameras:
        neighbors = graph.neighbors(cam)
        denom = 0.0
        for n in neighbors:
            denom += counts[cam][n] + smoothing
        if denom > 0:
            probs[cam] = {n: (counts[cam][n] + smoothing) / denom
                          for n in neighbors}
        else:
            undefined.append(cam)
    return TransitionModel(graph=graph, counts=counts, probs=probs,
                           smoothing=smoothing, undefined=tuple(undefined),
                           non_adjacent=dict(non_adjacent))


@dataclass(frozen=True)
class EntryExitStats:
    per_camera: Mapping[str, tuple[int, int]]   # camera -> (entries, exits)
    per_day: Mapping[str, int]                  # UTC day of first visit -> count


def _utc_day(timestamp: float) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date().isoformat()


def entry_exit_stats(trajectories: Sequence[Trajectory]) -> EntryExitStats:
    """Per-camera entry/exit counts and per-day trajectory totals.

    The entry camera is the first visit's camera, the exit camera the last
    visit's. Daily totals bucket each trajectory by the UTC calendar day of
    its first observation.
    """
    if not trajectories:
        raise DegenerateDataError("no trajectories to aggregate")
    entries: Counter[str] = Counter()
    exits: Counter[str] = Counter()
    per_day: Counter[str] = Counter()
    for traj in trajectories:
        entries[traj.entry_camera] += 1
        exits[traj.exit_camera] += 1
        per_day[_utc_day(traj.visits[0].first_seen)] += 1
    cameras = sorted(set(entries) | set(exits))
    return EntryExitStats(
        per_camera={c: (entries[c], exits[c]) for c in cameras},
        per_day=dict(sorted(per_day.items())))


def export_matrix(model: TransitionModel) -> str:
    """Render counts and probabilities as a two-block CSV document.

    Rows and columns follow camera registration order. Non-adjacent cells
    are empty; probability rows of undefined cameras are entirely empty.
    Probabilities carry six decimals.
    """
    cams = model.graph.cameras
    lines = ["counts", "," + ",".join(cams)]
    for i in cams:
        row = [i]
        for j in cams:
            row.append(str(model.counts[i][j])
                       if model.graph.has_edge(i, j) else "")
        lines.append(",".join(row))
    lines.append("probabilities")
    lines.append("," + ",".join(cams))
    for i in cams:
        row = [i]
        defined = i not in model.undefined
        for j in cams:
            if defined and model.graph.has_edge(i, j):
                row.append(f"{model.probs[i][j]:.6f}")
            else:
                row.append("")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str, graph: CameraGraph,
                 source: str | None = None) -> TransitionModel:
    """Parse :func:`export_matrix` output back into a TransitionModel.

    Probabilities are taken as stored (six-decimal precision), so a
    round-trip recovers them within 1e-6.
    """
    lines = [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "counts":
        raise ParseError("expected leading 'counts' block marker",
                         source=source, line=1)
    try:
        prob_marker = lines.index("probabilities")
    except ValueError:
        raise ParseError("missing 'probabilities' block marker",
                         source=source) from None
    count_block = lines[1:prob_marker]
    prob_block = lines[prob_marker + 1:]
    cams = _parse_header(count_block, graph, source)
    if _parse_header(prob_block, graph, source) != cams:
        raise ParseError("count and probability headers disagree",
                         source=source)
    counts = {}
    for row_cam, cells in _parse_rows(count_block, cams, source):
        row = {}
        for j, cell in zip(cams, cells):
            adjacent = graph.has_edge(row_cam, j)
            if cell and not adjacent:
                raise ValidationError(
                    f"count for non-adjacent pair {row_cam}->{j}")
            if adjacent:
                if not cell:
                    raise ParseError(
                        f"missing count for adjacent pair {row_cam}->{j}",
                        source=source)
                row[j] = int(cell)
        counts[row_cam] = row
    probs = {}
    undefined = []
    for row_cam, cells in _parse_rows(prob_block, cams, source):
        row = {}
        for j, cell in zip(cams, cells):
            if cell and not graph.has_edge(row_cam, j):
                raise ValidationError(
                    f"probability for non-adjacent pair {row_cam}->{j}")
            if cell:
                row[j] = float(cell)
        if row:
            probs[row_cam] = row
        else:
            undefined.append(row_cam)
    return TransitionModel(graph=graph, counts=counts, probs=probs,
                           smoothing=None, undefined=tuple(undefined))


def _parse_header(block: list[str], graph: CameraGraph,
                  source: str | None) -> tuple[str, ...]:
    if not block:
        raise ParseError("empty matrix block", source=source)
    header = block[0].split(",")
    if header[0] != "":
        raise ParseError("matrix header must start with an empty cell",
                         source=source)
    cams = tuple(header[1:])
    if cams != graph.cameras:
        raise ValidationError(
            f"matrix cameras {list(cams)} do not match graph registration "
            f"order {list(graph.cameras)}")
    return cams


def _parse_rows(block: list[str], cams: tuple[str, ...],
                source: str | None):
    rows = block[1:]
    if len(rows) != len(cams):
        raise ParseError(
            f"expected {len(cams)} matrix rows, got {len(rows)}",
            source=source)
    for expected, line in zip(cams, rows):
        cells = line.split(",")
        if cells[0] != expected or len(cells) != len(cams) + 1:
            raise ParseError(f"malformed matrix row {line!r}", source=source)
        yield expected, cells[1:]
