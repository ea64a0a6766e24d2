"""CMC curves, before/after rank-K tables, and similarity diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embeddings import Observation
from .errors import DegenerateDataError, ValidationError
from .fusion import RankingResult


@dataclass(frozen=True)
class CmcCurve:
    """Cumulative matching accuracies indexed by rank K = 1..depth.

    ``accuracies[k-1]`` is the fraction of retained queries whose first
    correct match appears at rank <= k. ``dropped`` counts queries whose
    post-exclusion gallery held no correct match at all; they are excluded
    from the denominator.
    """

    accuracies: tuple[float, ...]
    query_count: int
    dropped: int = 0

    def __post_init__(self):
        if not self.accuracies:
            raise ValidationError("CMC curve must cover at least rank 1")
        prev = 0.0
        for value in self.accuracies:
            if value < 0.0 or value > 1.0:
                raise ValidationError(f"CMC value {value} outside [0, 1]")
            if value < prev:
                raise ValidationError("CMC curve must be non-decreasing")
            prev = value

    @property
    def depth(self) -> int:
        return len(self.accuracies)

    def accuracy_at(self, k: int) -> float:
        if k < 1 or k > self.depth:
            raise ValidationError(
                f"rank {k} exceeds gallery depth {self.depth}")
        return self.accuracies[k - 1]


def cmc(results: Sequence[RankingResult],
        labels: Mapping[str, str | None]) -> CmcCurve:
    """Cumulative Matching Characteristic curve over ranking results.

    Every query must map to a known identity in ``labels``. Queries without
    any correct match in their ranked gallery are dropped from the
    denominator and reported via ``dropped``.
    """
    first_correct: list[int] = []
    depth = 0
    dropped = 0
    for res in results:
        qpid = labels.get(res.query_id)
        if qpid is None:
            raise ValidationError(
                f"query {res.query_id!r} has no known identity")
        found = None
        for position, (gid, _score) in enumerate(res.ranked, 1):
            if labels.get(gid) == qpid:
                found = position
                break
        if found is None:
            dropped += 1
            continue
        first_correct.append(found)
        depth = max(depth, len(res.ranked))
    if not first_correct:
        raise DegenerateDataError(
            "no retained queries: every query lacks a correct cross-camera "
            "match in its gallery")
    hits_at = np.zeros(depth + 1, dtype=np.int64)
    for position in first_correct:
        hits_at[position] += 1
    cumulative = np.cumsum(hits_at[1:])
    n = len(first_correct)
    accuracies = tuple(float(c) / n for c in cumulative)
    return CmcCurve(accuracies=accuracies, query_count=n, dropped=dropped)


def rank_k_table(before: CmcCurve, after: CmcCurve,
                 ks: Sequence[int] = (1, 5, 10, 15)) -> list[tuple[int, float, float, float]]:
    """Rows of (K, before, after, delta) for the requested ranks."""
    rows = []
    for k in ks:
        b = before.accuracy_at(k)
        a = after.accuracy_at(k)
        rows.append((k, b, a, a - b))
    return rows


def format_percent(delta: float) -> str:
    """Signed percentage with two decimals, e.g. +7.72%."""
    return f"{delta * 100:+.2f}%"


def render_rank_k_csv(rows: Sequence[tuple[int, float, float, float]]) -> str:
    lines = ["rank,appearance,fused,delta"]
    for k, b, a, d in rows:
        lines.append(f"{k},{b:.4f},{a:.4f},{format_percent(d)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SeparationReport:
    intra_mean: float
    inter_mean: float

    @property
    def ratio(self) -> float:
        return self.intra_mean / self.inter_mean


def separation(matrix: np.ndarray, queries: Sequence[Observation],
               gallery: Sequence[Observation]) -> SeparationReport:
    """Mean similarity of same-identity vs different-identity included pairs.

    Operates on a :func:`crosscam.fusion.similarity_matrix` output aligned
    with ``queries`` rows and ``gallery`` columns. Only cross-camera pairs
    count. The ratio intra/inter grows when suppression removes improbable
    impostor pairings faster than true matches.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (len(queries), len(gallery)):
        raise ValidationError(
            f"matrix shape {matrix.shape} does not match "
            f"({len(queries)}, {len(gallery)})")
    qpids = [q.person_id for q in queries]
    gpids = [g.person_id for g in gallery]
    if any(p is None for p in qpids) or any(p is None for p in gpids):
        raise ValidationError("separation needs labeled observations")
    qcams = np.asarray([q.camera for q in queries])
    gcams = np.asarray([g.camera for g in gallery])
    included = qcams[:, None] != gcams[None, :]
    same_identity = (np.asarray(qpids)[:, None] == np.asarray(gpids)[None, :])
    intra_mask = included & same_identity
    inter_mask = included & ~same_identity
    if not intra_mask.any() or not inter_mask.any():
        raise DegenerateDataError(
            "need at least one intra-identity and one inter-identity "
            "cross-camera pair")
    intra_mean = float(matrix[intra_mask].mean())
    inter_mean = float(matrix[inter_mask].mean())
    if inter_mean == 0.0:
        raise DegenerateDataError("inter-identity mean is zero")
    return SeparationReport(intra_mean=intra_mean, inter_mean=inter_mean)


def export_heatmap(matrix: np.ndarray) -> bytes:
    """Binary P5 graymap of a [0, 1] score matrix.

    Pixel value is round(255 * score) with halves rounded away from zero.
    """
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("heatmap needs a 2-D matrix")
    if arr.size == 0:
        raise ValidationError("heatmap matrix is empty")
    if float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise ValidationError("heatmap values must lie in [0, 1]")
    pixels = np.floor(arr * 255.0 + 0.5).astype(np.uint8)
    rows, cols = arr.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + pixels.tobytes(order="C")


def export_cmc(curve: CmcCurve, header: bool = False) -> str:
    """CSV of rank, accuracy rows with four-decimal accuracies."""
    lines = ["rank,accuracy"] if header else []
    for k, acc in enumerate(curve.accuracies, 1):
        lines.append(f"{k},{acc:.4f}")
    return "\n".join(lines)
