"""Undirected camera-network topology with deterministic orderings."""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import ParseError, SelfLoopError, UnknownCameraError, ValidationError


def _check_camera_id(name: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValidationError(f"camera id must be a non-empty string, got {name!r}")
    if any(ch.isspace() for ch in name) or "," in name:
        raise ValidationError(
            f"camera id {name!r} may not contain whitespace or commas")
    return name


class CameraGraph:
    """Cameras and the undirected links between them.

    Cameras keep registration order (first mention) and edges keep insertion
    order; both orderings are what downstream matrix exports and neighbor
    listings use, so a graph loaded from the same text always produces the
    same layouts. Instances are immutable once built.
    """

    def __init__(self, cameras: Iterable[str] = (),
                 edges: Iterable[Sequence[str]] = ()):
        self._cameras: list[str] = []
        self._index: dict[str, int] = {}
        self._edges: list[tuple[str, str]] = []
        self._edge_set: set[frozenset[str]] = set()
        self._adjacency: dict[str, list[str]] = {}
        for cam in cameras:
            self._register(cam)
        for edge in edges:
            a, b = edge
            self._add_edge(a, b)

    def _register(self, cam: str) -> str:
        if cam not in self._index:
            _check_camera_id(cam)
            self._index[cam] = len(self._cameras)
            self._cameras.append(cam)
            self._adjacency[cam] = []
        return cam

    def _add_edge(self, a: str, b: str) -> None:
        if a == b:
            raise SelfLoopError(f"self-loop on camera {a!r}")
        self._register(a)
        self._register(b)
        key = frozenset((a, b))
        if key in self._edge_set:
            return
        self._edge_set.add(key)
        self._edges.append((a, b))
        self._adjacency[a].append(b)
        self._adjacency[b].append(a)

    @property
    def cameras(self) -> tuple[str, ...]:
        return tuple(self._cameras)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._edges)

    def __len__(self) -> int:
        return len(self._cameras)

    def __contains__(self, cam: str) -> bool:
        return cam in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CameraGraph):
            return NotImplemented
        return self._cameras == other._cameras and self._edges == other._edges

    def index(self, cam: str) -> int:
        """Registration index of ``cam``, the row/column used in exports."""
        self._require(cam)
        return self._index[cam]

    def has_edge(self, a: str, b: str) -> bool:
        self._require(a)
        self._require(b)
        return frozenset((a, b)) in self._edge_set

    def neighbors(self, cam: str) -> list[str]:
        """Cameras sharing an edge with ``cam``, in edge-insertion order."""
        self._require(cam)
        return list(self._adjacency[cam])

    def _require(self, cam: str) -> None:
        if cam not in self._index:
            raise UnknownCameraError(f"camera {cam!r} is not registered")

    def to_text(self) -> str:
        """Edge-list document that :func:`load_graph` parses back to ``self``."""
        lines = [f"node {cam}" for cam in self._cameras]
        lines.extend(f"{a} {b}" for a, b in self._edges)
        return "\n".join(lines) + "\n"


def load_graph(text: str, source: str | None = None) -> CameraGraph:
    """Parse an edge-list document.

    Each non-comment line is either ``A B`` (an undirected edge) or
    ``node A`` (an isolated camera declaration). ``#`` starts a comment,
    duplicate edges collapse, self-loops are rejected.
    """
    graph = CameraGraph()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) == 2 and fields[0] == "node":
            graph._register(fields[1])
        elif len(fields) == 2:
            try:
                graph._add_edge(fields[0], fields[1])
            except SelfLoopError as exc:
                raise SelfLoopError(f"{source or '<graph>'}:line {lineno}: {exc}") from exc
        else:
            raise ParseError(
                f"expected 'A B' or 'node A', got {line!r}",
                source=source, line=lineno)
    return graph


def read_graph(path: str) -> CameraGraph:
    with open(path, "r", encoding="utf-8") as handle:
        return load_graph(handle.read(), source=path)
